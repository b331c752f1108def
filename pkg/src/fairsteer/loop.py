"""The distill / edit / relabel / fine-tune cycle.

One iteration takes the current state (model, surrogate tree, dataset),
applies the reviewer's tree edits, relabels every prefix with the edited
tree's predictions, fine-tunes the network on the relabeled dataset from its
current weights, re-distills a fresh surrogate, and recomputes metrics.

Metrics are always evaluated against the dataset's original labels, so a
successful bias removal may legitimately show up as an accuracy drop: the
model stops reproducing decisions that were biased but real.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .encoding import PrefixDataset, build_dataset
from .errors import EmptyGroup, UnknownAttribute
from .eventlog import EventLog
from .mlp import (
    MlpModel,
    TrainConfig,
    finetune_config,
    fine_tune,
    forward,
    init_model,
    predict,
    train,
)
from .surgery import EditAction, EditRecord, apply_edits
from .tree import (
    DecisionTree,
    DistillationDataset,
    TreeParams,
    fidelity,
    induce_tree,
    label_with_model,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParityProbe:
    """A demographic-parity question: does the model commit to ``target_class``
    more readily for one group than the other?"""

    attribute: str
    groups: tuple[str, str]
    target_class: str

    def to_json(self) -> dict:
        return {
            "attribute": self.attribute,
            "groups": list(self.groups),
            "target_class": self.target_class,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ParityProbe":
        return cls(
            attribute=doc["attribute"],
            groups=tuple(doc["groups"]),
            target_class=doc["target_class"],
        )


@dataclass(frozen=True)
class ParityResult:
    probe: ParityProbe
    group_rates: tuple[float, float]
    gap: float

    def to_json(self) -> dict:
        return {
            "probe": self.probe.to_json(),
            "group_rates": list(self.group_rates),
            "gap": self.gap,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ParityResult":
        return cls(
            probe=ParityProbe.from_json(doc["probe"]),
            group_rates=tuple(doc["group_rates"]),
            gap=float(doc["gap"]),
        )


@dataclass(frozen=True)
class MetricsReport:
    """Quality of one iteration's model, on the original labels."""

    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class_support: dict[str, int]
    fidelity: float
    parity: tuple[ParityResult, ...] = ()

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class_support": dict(self.per_class_support),
            "fidelity": self.fidelity,
            "parity": [p.to_json() for p in self.parity],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "MetricsReport":
        return cls(
            accuracy=float(doc["accuracy"]),
            macro_precision=float(doc["macro_precision"]),
            macro_recall=float(doc["macro_recall"]),
            macro_f1=float(doc["macro_f1"]),
            per_class_support={k: int(v) for k, v in doc["per_class_support"].items()},
            fidelity=float(doc["fidelity"]),
            parity=tuple(ParityResult.from_json(p) for p in doc.get("parity", [])),
        )


@dataclass(frozen=True)
class RelabelResult:
    """Outcome of relabeling a dataset with a tree."""

    dataset: PrefixDataset
    changed: int
    total: int
    examples: tuple[tuple[str, int], ...]  # (case_id, prefix_length) of changes

    def to_json(self) -> dict:
        return {
            "changed": self.changed,
            "total": self.total,
            "examples": [[case_id, length] for case_id, length in self.examples],
        }


@dataclass(frozen=True)
class LoopState:
    """Immutable snapshot of the pipeline after ``iteration`` cycles."""

    iteration: int
    model: MlpModel
    tree: DecisionTree
    dataset: PrefixDataset
    distillation: DistillationDataset
    edit_log: tuple[EditRecord, ...]
    metrics_history: tuple[MetricsReport, ...]
    probes: tuple[ParityProbe, ...] = ()


def demographic_parity(
    model: MlpModel,
    dataset: PrefixDataset,
    attribute: str,
    groups: tuple[str, str],
    target_class: str,
) -> ParityResult:
    """Gap in how strongly the model commits to a target class per group.

    For each case we take the peak predicted probability of the target
    class across the case's prefixes; a group's rate is the mean of those
    peaks over its cases. The gap is the absolute difference between the
    two group rates. A model that predicts the target whenever (and only
    when) a case belongs to one group scores a gap of 1; a model whose
    predictions ignore the attribute scores close to 0; on a simulated
    process the gap recovers the difference of the underlying branch
    probabilities toward the target activity.

    Raises:
        UnknownAttribute: the attribute is not an encoded categorical
            case feature, or a group value is not in its domain.
        EmptyGroup: one group matched no cases.
    """
    feature = next(
        (f for f in dataset.spec.case_features if f.attribute == attribute), None
    )
    if feature is None or feature.kind != "onehot":
        raise UnknownAttribute(
            f"{attribute!r} is not an encoded categorical case attribute"
        )
    try:
        target_index = dataset.class_names.index(target_class)
    except ValueError:
        raise UnknownAttribute(f"unknown target class {target_class!r}") from None

    columns = dataset.spec.columns_for_attribute(attribute)
    target_probabilities = forward(model, dataset.features)[:, target_index]

    rates = []
    for group in groups:
        try:
            column = columns[feature.values.index(group)]
        except ValueError:
            raise UnknownAttribute(
                f"value {group!r} not in domain of {attribute!r}"
            ) from None
        member_rows = np.flatnonzero(dataset.features[:, column] == 1.0)
        if member_rows.shape[0] == 0:
            raise EmptyGroup(f"no samples with {attribute} = {group!r}")
        peaks: dict[str, float] = {}
        for row in member_rows:
            case_id = dataset.provenance[row][0]
            probability = float(target_probabilities[row])
            if probability > peaks.get(case_id, -1.0):
                peaks[case_id] = probability
        rates.append(float(np.mean(list(peaks.values()))))

    probe = ParityProbe(attribute=attribute, groups=groups, target_class=target_class)
    return ParityResult(
        probe=probe,
        group_rates=(rates[0], rates[1]),
        gap=abs(rates[0] - rates[1]),
    )


def compute_metrics(
    model: MlpModel,
    dataset: PrefixDataset,
    tree: DecisionTree,
    probes: tuple[ParityProbe, ...] = (),
) -> MetricsReport:
    """Accuracy / macro precision / recall / F1 on the original labels.

    Classes with zero support in the ground truth are excluded from the
    macro averages; per-class support is reported alongside. A class that
    is predicted but never true contributes nothing to the macros.
    """
    truth = dataset.original_labels
    predictions = np.asarray(predict(model, dataset.features), dtype=np.int64)
    num_classes = len(dataset.class_names)

    support = np.bincount(truth, minlength=num_classes)
    precisions = []
    recalls = []
    f1s = []
    for cls in range(num_classes):
        if support[cls] == 0:
            continue
        true_positive = int(np.sum((predictions == cls) & (truth == cls)))
        predicted_positive = int(np.sum(predictions == cls))
        precision = true_positive / predicted_positive if predicted_positive else 0.0
        recall = true_positive / int(support[cls])
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    return MetricsReport(
        accuracy=float(np.mean(predictions == truth)),
        macro_precision=float(np.mean(precisions)),
        macro_recall=float(np.mean(recalls)),
        macro_f1=float(np.mean(f1s)),
        per_class_support={
            dataset.class_names[cls]: int(support[cls])
            for cls in range(num_classes)
            if support[cls] > 0
        },
        fidelity=fidelity(tree, model, dataset.features),
        parity=tuple(
            demographic_parity(
                model, dataset, p.attribute, p.groups, p.target_class
            )
            for p in probes
        ),
    )


def relabel_dataset(tree: DecisionTree, dataset: PrefixDataset) -> RelabelResult:
    """Assign every prefix the class the (edited) tree predicts for it.

    Original labels stay untouched; the result reports how many training
    labels changed and which (case, prefix) pairs were affected.
    """
    new_labels = np.asarray(tree.predict(dataset.features), dtype=np.int64)
    changed_rows = np.flatnonzero(new_labels != dataset.labels)
    return RelabelResult(
        dataset=dataset.with_labels(new_labels),
        changed=int(changed_rows.shape[0]),
        total=dataset.num_samples,
        examples=tuple(dataset.provenance[row] for row in changed_rows[:20]),
    )


def bootstrap(
    log: EventLog,
    window: int = 3,
    attributes: tuple[str, ...] = (),
    hidden_layers: tuple[int, ...] = (64, 64),
    train_config: TrainConfig | None = None,
    tree_params: TreeParams | None = None,
    probes: tuple[ParityProbe, ...] = (),
    on_epoch: Callable[[int, float], None] | None = None,
) -> LoopState:
    """Iteration 0: encode, train from scratch, distill, measure."""
    if train_config is None:
        train_config = TrainConfig()
    if tree_params is None:
        tree_params = TreeParams()
    dataset = build_dataset(log, window=window, attributes=attributes)
    model = init_model(
        (dataset.spec.dimension, *hidden_layers, dataset.spec.num_classes),
        seed=train_config.seed,
    )
    model, history = train(
        model, dataset.features, dataset.labels, train_config, on_epoch
    )
    logger.info(
        "bootstrap: %d samples, loss %.4f -> %.4f",
        dataset.num_samples,
        history[0] if history else float("nan"),
        history[-1] if history else float("nan"),
    )
    distillation = label_with_model(dataset, model)
    tree = induce_tree(distillation, tree_params)
    metrics = compute_metrics(model, dataset, tree, probes)
    return LoopState(
        iteration=0,
        model=model,
        tree=tree,
        dataset=dataset,
        distillation=distillation,
        edit_log=(),
        metrics_history=(metrics,),
        probes=probes,
    )


def run_iteration(
    state: LoopState,
    edits: list[EditAction],
    finetune: TrainConfig | None = None,
    tree_params: TreeParams | None = None,
    changed_only: bool = False,
    on_epoch: Callable[[int, float], None] | None = None,
) -> tuple[LoopState, RelabelResult]:
    """One edit / relabel / fine-tune / re-distill cycle.

    The input state is left untouched; on any error it remains the current
    state. ``changed_only`` restricts fine-tuning to the samples whose
    label the relabeling changed (default trains on the full relabeled
    dataset).

    Returns the next state and the relabeling diff.
    """
    if finetune is None:
        finetune = finetune_config(seed_config(state))
    if tree_params is None:
        tree_params = state.tree.params

    edited_tree, records = apply_edits(
        state.tree, edits, state.distillation, state.tree.params
    )
    relabel = relabel_dataset(edited_tree, state.dataset)

    if changed_only and relabel.changed > 0:
        mask = relabel.dataset.labels != state.dataset.labels
        features = relabel.dataset.features[mask]
        labels = relabel.dataset.labels[mask]
    else:
        features = relabel.dataset.features
        labels = relabel.dataset.labels
    model = fine_tune(state.model, features, labels, finetune, on_epoch)

    distillation = label_with_model(relabel.dataset, model)
    tree = induce_tree(distillation, tree_params)
    metrics = compute_metrics(model, relabel.dataset, tree, state.probes)
    next_state = LoopState(
        iteration=state.iteration + 1,
        model=model,
        tree=tree,
        dataset=relabel.dataset,
        distillation=distillation,
        edit_log=state.edit_log + tuple(records),
        metrics_history=state.metrics_history + (metrics,),
        probes=state.probes,
    )
    logger.info(
        "iteration %d: %d edits, %d/%d labels changed, accuracy %.4f",
        next_state.iteration,
        len(edits),
        relabel.changed,
        relabel.total,
        metrics.accuracy,
    )
    return next_state, relabel


def seed_config(state: LoopState) -> TrainConfig:
    """A TrainConfig carrying the state's model seed (for fine-tuning)."""
    return TrainConfig(seed=state.model.seed)
