# coding: utf-8

# # Simulating a biased screening process
#
# fairsteer ships a small stochastic process simulator so every other
# capability can be exercised without hunting for real event data. This
# walkthrough builds the built-in cancer-screening process, inspects its
# exact ground-truth probabilities, generates an event log, and round-trips
# it through the XES interchange format.

from collections import Counter

from fairsteer import (
    REFUSE,
    SimConfig,
    builtin_cancer_screening,
    ground_truth_rates,
    model_to_json,
    parse_xes,
    serialize_xes,
    simulate,
    visit_probability,
)

# ## The built-in process
#
# Every case registers, then either refuses the screening invitation or
# accepts it (online or via phone, equally likely). Accepted cases get the
# screening matching their gender and finally receive their results. The
# bias knob is the refusal probability per gender: by default women refuse
# with probability 0.5 and men with probability 0.0 — a deliberately stark
# negative bias for the later demos to find and remove.

model = builtin_cancer_screening()  # female_refusal=0.5, male_refusal=0.0
print("activities:", ", ".join(model.activities))

# The simulator can answer probability questions exactly, by enumerating
# paths rather than sampling. That gives us an oracle to validate the
# sampled logs against.

rates = ground_truth_rates(model)
print(f"P(refuse)          = {rates[f'P({REFUSE})']:.3f}")
print(f"P(refuse | female) = {rates[f'P({REFUSE}|gender=female)']:.3f}")
print(f"P(refuse | male)   = {rates[f'P({REFUSE}|gender=male)']:.3f}")

# Conditional queries compose: the probability of a mammary screening for a
# case that never refuses, say.

p = visit_probability(model, "mammary screening", not_visiting=REFUSE)
print(f"P(mammary screening | never refuses) = {p:.3f}")

# ## Generating an event log
#
# Simulation is deterministic per (seed, case index), so logs are exactly
# reproducible and individual cases keep their identity across runs.

log = simulate(model, SimConfig(num_cases=200, seed=7))
print(f"\nsimulated {len(log.traces)} traces,",
      f"{sum(len(t.events) for t in log.traces)} events")

first = log.traces[0]
print(f"first case {first.case_id!r} ({first.case_attributes['gender']}):")
for event in first.events:
    print(f"  {event.timestamp:%H:%M}  {event.activity}")

# Observed refusal frequencies should sit near the exact rates above.

by_gender = Counter()
refused = Counter()
for trace in log.traces:
    gender = trace.case_attributes["gender"]
    by_gender[gender] += 1
    if any(event.activity == REFUSE for event in trace.events):
        refused[gender] += 1
for gender in ("female", "male"):
    share = refused[gender] / by_gender[gender]
    print(f"observed refusal rate ({gender}): {share:.3f} over {by_gender[gender]} cases")

# ## XES round-trip
#
# Logs serialize to standard XES and parse back to an identical value, so
# fairsteer interoperates with process-mining tooling in both directions.

blob = serialize_xes(log)
print(f"\nXES document: {len(blob)} bytes; first lines:")
for line in blob.decode().splitlines()[:4]:
    print(" ", line)

assert parse_xes(blob) == log
assert serialize_xes(parse_xes(blob)) == blob
print("parse(serialize(log)) == log: True")

# ## Custom processes
#
# Processes are plain data — activities, attribute generators, and guarded
# probabilistic transitions — and have a JSON form for the CLI and the REST
# service. Here is the built-in model's own document, abbreviated:

doc = model_to_json(model)
print(f"\nmodel document keys: {sorted(doc)}")
print(f"transitions from 'register': {[t for t in doc['transitions'] if t['from'] == 'register']}")
