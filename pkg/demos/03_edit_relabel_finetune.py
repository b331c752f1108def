# coding: utf-8

# # Removing negative bias, keeping positive bias
#
# The heart of fairsteer is the distill-alter-tune cycle: distill the
# trained predictor into a decision tree, let a human cut away the split
# that encodes an unfair decision, relabel the training prefixes with the
# edited tree, and fine-tune the predictor on that corrected data. Crucially
# the edit is *local*: gender stops influencing the refusal prediction but
# keeps deciding which screening is performed, because that use of the
# attribute is legitimate.

import numpy as np

from fairsteer import (
    MAMMARY,
    PROSTATE,
    REFUSE,
    ParityProbe,
    RemoveNode,
    RetrainSubtreeExcluding,
    SimConfig,
    apply_edits,
    bootstrap,
    builtin_cancer_screening,
    leaves_predicting,
    predict,
    run_iteration,
    simulate,
)

# ## Iteration 0: train, distill, measure
#
# A parity probe rides along with training: it reports each group's mean
# peak probability of being predicted the target class, and the absolute
# gap between the groups.

model = builtin_cancer_screening()  # women refuse with p=0.5, men never
log = simulate(model, SimConfig(num_cases=1000, seed=42))
probe = ParityProbe(
    attribute="gender", groups=("female", "male"), target_class=REFUSE
)
state = bootstrap(log, attributes=("gender",), probes=(probe,))

report = state.metrics_history[0]
parity = report.parity[0]
print(f"iteration 0: accuracy {report.accuracy:.3f}, "
      f"fidelity {report.fidelity:.3f}, {state.tree.num_nodes}-node tree")
print(f"P(predicted {REFUSE!r}): female {parity.group_rates[0]:.3f}, "
      f"male {parity.group_rates[1]:.3f}, gap {parity.gap:.3f}")

# ## Finding the unfair branch
#
# The tree makes the bias legible: some leaf predicts the refusal, and its
# parent is the split that routes people there by gender.

refuse_class = state.tree.class_names.index(REFUSE)
leaf = max(leaves_predicting(state.tree, refuse_class), key=lambda l: l.n)
parent = state.tree.parent_of(leaf.node_id)
print(f"\nleaf [{leaf.node_id}] predicts {REFUSE!r} for {leaf.n} prefixes; "
      f"its parent [{parent.node_id}] splits on {parent.display!r}")

# A human reviews that split in context and declares it negative bias. The
# remedy is an edit action. RemoveNode deletes the split and promotes the
# child that carried more traffic; edits are previewable because they apply
# to a copy.

edit = RemoveNode(parent.node_id)
preview, records = apply_edits(
    state.tree, [edit], state.distillation, state.tree.params
)
print(f"preview: {records[0].summary} "
      f"({state.tree.num_nodes} -> {preview.num_nodes} nodes)")

# ## Iteration 1: relabel + fine-tune
#
# run_iteration applies the edit, relabels every prefix with the edited
# tree, fine-tunes the model from its current weights, and re-distills so
# the next tree reflects what the model actually learned.

state1, relabel = run_iteration(state, [edit])
print(f"\nrelabeled {relabel.changed} of {relabel.total} prefixes, e.g. "
      f"{relabel.examples[:3]}")

report1 = state1.metrics_history[-1]
parity1 = report1.parity[0]
print(f"iteration 1: accuracy {report1.accuracy:.3f}, "
      f"fidelity {report1.fidelity:.3f}")
print(f"P(predicted {REFUSE!r}): female {parity1.group_rates[0]:.3f}, "
      f"male {parity1.group_rates[1]:.3f}, gap {parity1.gap:.3f}")
print(f"gap shrank {1 - parity1.gap / parity.gap:.0%}")

# With the gender split gone, everyone reaching that decision gets the same
# prediction — the majority one, which here is the refusal itself, since
# predicted refusals outnumbered acceptances at that node. Demographic
# parity is achieved by treating the groups identically, not by promising
# nicer outcomes. Accuracy drops accordingly, and by design: metrics are
# computed on the original labels, the original log *is* biased, and a
# fairer model must disagree with some of it.

# ## The positive bias survives
#
# Gender still picks the right screening. Among prefixes of female cases
# whose true next step was a screening exam, the model predicts the mammary
# exam before and after the edit:

gender = {t.case_id: t.case_attributes["gender"] for t in log.traces}
truth = state.dataset.original_labels
exams = (
    state.dataset.class_names.index(MAMMARY),
    state.dataset.class_names.index(PROSTATE),
)
female_screened = np.isin(truth, exams) & np.array(
    [gender[case_id] == "female" for case_id, _ in state.dataset.provenance]
)
for name, mdl in (("before", state.model), ("after", state1.model)):
    predictions = np.asarray(predict(mdl, state.dataset.features))
    share = np.mean(
        predictions[female_screened] == state.dataset.class_names.index(MAMMARY)
    )
    print(f"P(predicted mammary | female, screened) {name}: {share:.3f}")

# ## The scalpel versus the sledgehammer
#
# The alternative to deleting one split is forbidding the attribute in a
# whole subtree: RetrainSubtreeExcluding re-grows the subtree under a node
# without ever testing the excluded attributes. Applied at the root it
# amounts to uniform attribute deletion — which also kills the legitimate
# exam routing and is exactly what the targeted edit avoids.

blunt = RetrainSubtreeExcluding(
    node_id=state.tree.root.node_id, excluded_attributes=("gender",)
)
blunted, records = apply_edits(
    state.tree, [blunt], state.distillation, state.tree.params
)
print(f"\nfor contrast: {records[0].summary}")
tests = [n.display for n in blunted.nodes() if not n.is_leaf and "gender" in n.display]
print(f"gender tests left after excluding it everywhere: {len(tests)}")
predictions = blunted.predict(state.dataset.features)
share = np.mean(predictions[female_screened] == state.dataset.class_names.index(MAMMARY))
print(f"P(predicted mammary | female, screened) then: {share:.3f} — "
      f"the positive bias is gone too, the edit above kept it")
