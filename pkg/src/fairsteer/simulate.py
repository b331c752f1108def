"""Synthetic event-log generation from small stochastic process models.

A model is a set of activities, per-case attribute generators, and guarded
transitions: for a given activity and case-attribute assignment, the
applicable outgoing outcomes form a probability distribution over the next
activity (or case end). Models are declarative and serializable to JSON, so
biased variants are easy to state and audit.

Simulation is deterministic for a given seed and independent per case: case
``i`` draws from ``default_rng([seed, i])``, so logs are reproducible no
matter how cases are batched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from itertools import product
from typing import Mapping

import numpy as np

from .errors import InvalidProbability, NonTerminatingModel, UnknownAttribute
from .eventlog import AttrValue, Event, EventLog, Trace

#: Start of the first case; case i starts one minute later per case, events
#: within a case are one minute apart.
SIM_BASE_TIME = datetime(2024, 1, 1, 0, 0, 0, tzinfo=timezone.utc)

_PROB_TOL = 1e-9

#: Safety net for terminating-but-cyclic models; hitting it is a bug.
_MAX_TRACE_STEPS = 10_000


@dataclass(frozen=True)
class Guard:
    """Predicate over case attributes, e.g. gender == "female"."""

    attribute: str
    op: str  # "==", "!=", "<=", ">"
    value: AttrValue

    def evaluate(self, attributes: Mapping[str, AttrValue]) -> bool:
        if self.attribute not in attributes:
            raise UnknownAttribute(
                f"guard references unknown attribute {self.attribute!r}"
            )
        actual = attributes[self.attribute]
        if self.op == "==":
            return actual == self.value
        if self.op == "!=":
            return actual != self.value
        if self.op == "<=":
            return float(actual) <= float(self.value)
        if self.op == ">":
            return float(actual) > float(self.value)
        raise ValueError(f"unknown guard operator {self.op!r}")


@dataclass(frozen=True)
class Outcome:
    """One possible next step; target None means the case ends."""

    target: str | None
    probability: float


@dataclass(frozen=True)
class Transition:
    source: str
    outcomes: tuple[Outcome, ...]
    guard: Guard | None = None


@dataclass(frozen=True)
class AttributeGenerator:
    """Distribution for one case attribute.

    kind "categorical" draws from ``values`` with ``weights``; kind
    "numeric" draws uniformly from [lo, hi].
    """

    name: str
    kind: str
    values: tuple[AttrValue, ...] = ()
    weights: tuple[float, ...] = ()
    lo: float = 0.0
    hi: float = 1.0


@dataclass(frozen=True)
class ProcessModel:
    activities: tuple[str, ...]
    start: str
    transitions: tuple[Transition, ...]
    attributes: tuple[AttributeGenerator, ...] = ()

    def outcomes_for(
        self, activity: str, attributes: Mapping[str, AttrValue]
    ) -> tuple[Outcome, ...]:
        """Applicable outcome distribution for (activity, assignment).

        Merges every transition from the activity whose guard passes. An
        activity without applicable transitions ends the case.

        Raises:
            InvalidProbability: probabilities do not sum to 1 (+-1e-9).
        """
        merged: list[Outcome] = []
        for transition in self.transitions:
            if transition.source != activity:
                continue
            if transition.guard is not None and not transition.guard.evaluate(
                attributes
            ):
                continue
            merged.extend(transition.outcomes)
        if not merged:
            return (Outcome(target=None, probability=1.0),)
        total = sum(o.probability for o in merged)
        if abs(total - 1.0) > _PROB_TOL:
            raise InvalidProbability(
                f"outgoing probabilities of {activity!r} sum to {total!r}"
            )
        return tuple(merged)


@dataclass
class SimConfig:
    num_cases: int = 1000
    seed: int = 42
    case_prefix: str = "case"


def validate_model(model: ProcessModel) -> None:
    """Static checks: probabilities in range, targets known, weights sane."""
    for transition in model.transitions:
        if transition.source not in model.activities:
            raise UnknownAttribute(
                f"transition source {transition.source!r} is not an activity"
            )
        for outcome in transition.outcomes:
            if not (0.0 <= outcome.probability <= 1.0):
                raise InvalidProbability(
                    f"probability {outcome.probability!r} out of [0, 1] on "
                    f"{transition.source!r}"
                )
            if outcome.target is not None and outcome.target not in model.activities:
                raise UnknownAttribute(
                    f"transition target {outcome.target!r} is not an activity"
                )
    if model.start not in model.activities:
        raise UnknownAttribute(f"start activity {model.start!r} is not an activity")
    for gen in model.attributes:
        if gen.kind == "categorical":
            if len(gen.values) != len(gen.weights) or not gen.values:
                raise InvalidProbability(
                    f"attribute {gen.name!r}: values and weights must be "
                    "non-empty and equally long"
                )
            if any(w < 0 for w in gen.weights):
                raise InvalidProbability(f"attribute {gen.name!r}: negative weight")
            if abs(sum(gen.weights) - 1.0) > _PROB_TOL:
                raise InvalidProbability(
                    f"attribute {gen.name!r}: weights sum to {sum(gen.weights)!r}"
                )
        elif gen.kind == "numeric":
            if not gen.lo <= gen.hi:
                raise InvalidProbability(
                    f"attribute {gen.name!r}: empty range [{gen.lo}, {gen.hi}]"
                )
        else:
            raise ValueError(f"attribute {gen.name!r}: unknown kind {gen.kind!r}")


def _categorical_assignments(
    model: ProcessModel,
) -> list[tuple[dict[str, AttrValue], float]]:
    """Cross product of categorical attribute values with joint weights."""
    generators = [g for g in model.attributes if g.kind == "categorical"]
    assignments: list[tuple[dict[str, AttrValue], float]] = []
    if not generators:
        return [({}, 1.0)]
    for combo in product(*(zip(g.values, g.weights) for g in generators)):
        attrs = {g.name: value for g, (value, _) in zip(generators, combo)}
        weight = 1.0
        for _, w in combo:
            weight *= w
        assignments.append((attrs, weight))
    return assignments


def check_terminating(model: ProcessModel) -> None:
    """Verify END is reachable from every reachable activity.

    Enumerates categorical attribute assignments; numeric guards are treated
    as potentially passing. For a finite chain this is exactly the condition
    for termination with probability 1.

    Raises:
        NonTerminatingModel: some reachable activity cannot reach END.
    """
    for attrs, _ in _categorical_assignments(model):

        def successors(activity: str) -> set[str | None]:
            targets: set[str | None] = set()
            merged = False
            for transition in model.transitions:
                if transition.source != activity:
                    continue
                if transition.guard is not None:
                    guarded = transition.guard
                    if guarded.attribute in attrs:
                        if not guarded.evaluate(attrs):
                            continue
                    # numeric-attribute guard: may or may not pass; include
                for outcome in transition.outcomes:
                    if outcome.probability > 0:
                        targets.add(outcome.target)
                        merged = True
            if not merged:
                targets.add(None)
            return targets

        reachable: set[str] = set()
        frontier = [model.start]
        while frontier:
            activity = frontier.pop()
            if activity in reachable:
                continue
            reachable.add(activity)
            for target in successors(activity):
                if target is not None and target not in reachable:
                    frontier.append(target)

        # backward pass: which activities can reach END
        can_end: set[str] = set()
        changed = True
        while changed:
            changed = False
            for activity in reachable:
                if activity in can_end:
                    continue
                for target in successors(activity):
                    if target is None or target in can_end:
                        can_end.add(activity)
                        changed = True
                        break
        stuck = reachable - can_end
        if stuck:
            raise NonTerminatingModel(
                f"activities {sorted(stuck)} cannot reach END under "
                f"assignment {attrs}"
            )


def simulate(model: ProcessModel, config: SimConfig | None = None) -> EventLog:
    """Generate an event log by walking the model.

    Case ``i`` uses its own random stream seeded by (seed, i). Case starts
    are staggered one minute apart and events within a case are one minute
    apart, so timestamps are strictly increasing along every trace.

    Raises:
        NonTerminatingModel, InvalidProbability, UnknownAttribute.
    """
    if config is None:
        config = SimConfig()
    validate_model(model)
    check_terminating(model)
    traces = []
    for index in range(config.num_cases):
        rng = np.random.default_rng([config.seed, index])
        attributes: dict[str, AttrValue] = {}
        for gen in model.attributes:
            if gen.kind == "categorical":
                pick = rng.choice(len(gen.values), p=np.asarray(gen.weights))
                attributes[gen.name] = gen.values[int(pick)]
            else:
                attributes[gen.name] = float(rng.uniform(gen.lo, gen.hi))
        start_time = SIM_BASE_TIME + timedelta(minutes=index)
        events = []
        activity: str | None = model.start
        step = 0
        while activity is not None:
            events.append(
                Event(
                    activity=activity,
                    timestamp=start_time + timedelta(minutes=step),
                )
            )
            outcomes = model.outcomes_for(activity, attributes)
            probabilities = np.asarray([o.probability for o in outcomes])
            probabilities = probabilities / probabilities.sum()
            pick = int(rng.choice(len(outcomes), p=probabilities))
            activity = outcomes[pick].target
            step += 1
            if step > _MAX_TRACE_STEPS:
                raise NonTerminatingModel(
                    f"case {index} exceeded {_MAX_TRACE_STEPS} steps"
                )
        traces.append(
            Trace(
                case_id=f"{config.case_prefix}_{index}",
                events=tuple(events),
                case_attributes=attributes,
            )
        )
    return EventLog.from_traces(traces)


# -- built-in model -----------------------------------------------------------

REGISTER = "register"
REFUSE = "refuse screening"
ACCEPT_PHONE = "accept via phone"
ACCEPT_ONLINE = "accept online"
PROSTATE = "prostate screening"
MAMMARY = "mammary screening"
DELIVER = "deliver results"


def builtin_cancer_screening(
    female_refusal: float = 0.5, male_refusal: float = 0.0
) -> ProcessModel:
    """The gender-biased cancer screening process.

    Every case registers, then either refuses screening (negative bias: the
    refusal probability depends on gender) or accepts the invitation via one
    of two equally likely channels. Accepted cases get the screening that
    matches their gender (positive, legitimate routing), results are
    delivered, and the case ends. Refusal ends the case immediately.

    Raises:
        InvalidProbability: a refusal probability is outside [0, 1].
    """
    for name, p in (("female_refusal", female_refusal), ("male_refusal", male_refusal)):
        if not 0.0 <= p <= 1.0:
            raise InvalidProbability(f"{name} must be in [0, 1], got {p!r}")

    def register_row(gender: str, refusal: float) -> Transition:
        accept = (1.0 - refusal) / 2.0
        return Transition(
            source=REGISTER,
            guard=Guard("gender", "==", gender),
            outcomes=(
                Outcome(REFUSE, refusal),
                Outcome(ACCEPT_PHONE, accept),
                Outcome(ACCEPT_ONLINE, accept),
            ),
        )

    def routing_row(source: str, gender: str, screening: str) -> Transition:
        return Transition(
            source=source,
            guard=Guard("gender", "==", gender),
            outcomes=(Outcome(screening, 1.0),),
        )

    return ProcessModel(
        activities=(
            REGISTER,
            REFUSE,
            ACCEPT_PHONE,
            ACCEPT_ONLINE,
            PROSTATE,
            MAMMARY,
            DELIVER,
        ),
        start=REGISTER,
        transitions=(
            register_row("female", female_refusal),
            register_row("male", male_refusal),
            routing_row(ACCEPT_PHONE, "female", MAMMARY),
            routing_row(ACCEPT_PHONE, "male", PROSTATE),
            routing_row(ACCEPT_ONLINE, "female", MAMMARY),
            routing_row(ACCEPT_ONLINE, "male", PROSTATE),
            Transition(source=MAMMARY, outcomes=(Outcome(DELIVER, 1.0),)),
            Transition(source=PROSTATE, outcomes=(Outcome(DELIVER, 1.0),)),
            Transition(source=DELIVER, outcomes=(Outcome(None, 1.0),)),
            Transition(source=REFUSE, outcomes=(Outcome(None, 1.0),)),
        ),
        attributes=(
            AttributeGenerator(
                name="gender",
                kind="categorical",
                values=("female", "male"),
                weights=(0.5, 0.5),
            ),
        ),
    )


# -- exact ground truth --------------------------------------------------------


def _enumerate_paths(
    model: ProcessModel, attributes: dict[str, AttrValue]
) -> list[tuple[tuple[str, ...], float]]:
    """All activity paths with probabilities for one assignment.

    Requires an acyclic reachable transition graph (raises otherwise) so the
    enumeration is finite and exact.
    """
    paths: list[tuple[tuple[str, ...], float]] = []

    def walk(activity: str, trail: tuple[str, ...], probability: float) -> None:
        if activity in trail:
            raise NonTerminatingModel(
                "exact rates need an acyclic model; cycle at " + activity
            )
        trail = trail + (activity,)
        for outcome in model.outcomes_for(activity, attributes):
            if outcome.probability <= 0.0:
                continue
            if outcome.target is None:
                paths.append((trail, probability * outcome.probability))
            else:
                walk(outcome.target, trail, probability * outcome.probability)

    walk(model.start, (), 1.0)
    return paths


def visit_probability(
    model: ProcessModel,
    activity: str,
    given: Mapping[str, AttrValue] | None = None,
    not_visiting: str | None = None,
) -> float:
    """Exact P(case visits activity | given attrs [, never visits other]).

    Closed form via path enumeration over the categorical attribute
    assignments that match ``given``. Numeric-guarded models are rejected
    because their assignments cannot be enumerated.
    """
    for transition in model.transitions:
        if transition.guard is not None:
            gen = {g.name: g for g in model.attributes}.get(
                transition.guard.attribute
            )
            if gen is not None and gen.kind != "categorical":
                raise NonTerminatingModel(
                    "exact rates support categorical guards only"
                )
    given = dict(given or {})
    numerator = 0.0
    denominator = 0.0
    for attrs, weight in _categorical_assignments(model):
        if any(attrs.get(k) != v for k, v in given.items()):
            continue
        for path, probability in _enumerate_paths(model, attrs):
            mass = weight * probability
            if not_visiting is not None and not_visiting in path:
                continue
            denominator += mass
            if activity in path:
                numerator += mass
    if denominator == 0.0:
        return 0.0
    return numerator / denominator


def ground_truth_rates(model: ProcessModel) -> dict[str, float]:
    """Closed-form visit probabilities for every activity.

    Keys: ``P(<activity>)`` (marginal) and ``P(<activity>|<attr>=<value>)``
    for every categorical attribute value. Derived from exact path
    enumeration, no sampling involved.
    """
    rates: dict[str, float] = {}
    for activity in model.activities:
        rates[f"P({activity})"] = visit_probability(model, activity)
    for gen in model.attributes:
        if gen.kind != "categorical":
            continue
        for value in gen.values:
            for activity in model.activities:
                rates[f"P({activity}|{gen.name}={value})"] = visit_probability(
                    model, activity, given={gen.name: value}
                )
    return rates


# -- model JSON ---------------------------------------------------------------


def model_to_json(model: ProcessModel) -> dict:
    return {
        "activities": list(model.activities),
        "start": model.start,
        "attributes": [
            {
                "name": g.name,
                "kind": g.kind,
                **(
                    {"values": list(g.values), "weights": list(g.weights)}
                    if g.kind == "categorical"
                    else {"lo": g.lo, "hi": g.hi}
                ),
            }
            for g in model.attributes
        ],
        "transitions": [
            {
                "from": t.source,
                **(
                    {
                        "guard": {
                            "attribute": t.guard.attribute,
                            "op": t.guard.op,
                            "value": t.guard.value,
                        }
                    }
                    if t.guard is not None
                    else {}
                ),
                "outcomes": [
                    {"to": o.target, "p": o.probability} for o in t.outcomes
                ],
            }
            for t in model.transitions
        ],
    }


def model_from_json(doc: dict) -> ProcessModel:
    attributes = []
    for entry in doc.get("attributes", []):
        if entry["kind"] == "categorical":
            attributes.append(
                AttributeGenerator(
                    name=entry["name"],
                    kind="categorical",
                    values=tuple(entry["values"]),
                    weights=tuple(float(w) for w in entry["weights"]),
                )
            )
        else:
            attributes.append(
                AttributeGenerator(
                    name=entry["name"],
                    kind=entry["kind"],
                    lo=float(entry["lo"]),
                    hi=float(entry["hi"]),
                )
            )
    transitions = []
    for entry in doc["transitions"]:
        guard = None
        if "guard" in entry:
            guard = Guard(
                attribute=entry["guard"]["attribute"],
                op=entry["guard"]["op"],
                value=entry["guard"]["value"],
            )
        transitions.append(
            Transition(
                source=entry["from"],
                guard=guard,
                outcomes=tuple(
                    Outcome(target=o["to"], probability=float(o["p"]))
                    for o in entry["outcomes"]
                ),
            )
        )
    model = ProcessModel(
        activities=tuple(doc["activities"]),
        start=doc["start"],
        transitions=tuple(transitions),
        attributes=tuple(attributes),
    )
    validate_model(model)
    return model


def load_model(path: str) -> ProcessModel:
    with open(path, "r", encoding="utf-8") as handle:
        return model_from_json(json.load(handle))


def dump_model(model: ProcessModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_json(model), handle, indent=2)
