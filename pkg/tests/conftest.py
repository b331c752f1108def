"""Shared fixtures: small simulated logs and a bootstrapped session."""

from datetime import datetime, timezone

import pytest

from fairsteer import (
    Event,
    EventLog,
    ParityProbe,
    SimConfig,
    Trace,
    TrainConfig,
    TreeParams,
    bootstrap,
    builtin_cancer_screening,
    simulate,
)


def stamp(minute: int) -> datetime:
    return datetime(2024, 1, 1, 0, minute, tzinfo=timezone.utc)


def make_trace(case_id: str, activities: list[str], **case_attributes) -> Trace:
    events = tuple(
        Event(activity=a, timestamp=stamp(i)) for i, a in enumerate(activities)
    )
    return Trace(case_id=case_id, events=events, case_attributes=case_attributes)


def make_log(rows: list[tuple[str, list[str], dict]]) -> EventLog:
    return EventLog.from_traces(
        make_trace(case_id, activities, **attrs) for case_id, activities, attrs in rows
    )


@pytest.fixture(scope="session")
def cancer_model():
    return builtin_cancer_screening()


@pytest.fixture(scope="session")
def cancer_log(cancer_model):
    return simulate(cancer_model, SimConfig(num_cases=300, seed=11))


@pytest.fixture(scope="session")
def refusal_probe():
    return ParityProbe(
        attribute="gender",
        groups=("female", "male"),
        target_class="refuse screening",
    )


@pytest.fixture(scope="session")
def small_state(cancer_log, refusal_probe):
    """A cheap bootstrapped pipeline shared by read-only tests."""
    return bootstrap(
        cancer_log,
        attributes=("gender",),
        hidden_layers=(32, 32),
        train_config=TrainConfig(epochs=12, seed=3),
        tree_params=TreeParams(max_depth=8, min_samples_leaf=5),
        probes=(
            ParityProbe(
                attribute="gender",
                groups=("female", "male"),
                target_class="refuse screening",
            ),
        ),
    )
