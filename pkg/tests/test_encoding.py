"""Prefix extraction and feature encoding.

Counting oracles first: expected dimensions and sample counts are computed
from first principles (by hand or by direct combinatorics over the log),
then the encoder is checked against them.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairsteer import (
    EmptyLog,
    EventLog,
    PrefixOutOfRange,
    UnknownAttribute,
    build_dataset,
    build_encoding_spec,
    dump_dataset,
    encode_prefix,
    extract_prefixes,
    load_dataset,
)
from fairsteer.encoding import END, PAD, dataset_from_json, dataset_to_json
from fairsteer.errors import EventLevelAttributeUnsupported

from conftest import make_log, make_trace

TWO_ACT_LOG = make_log(
    [
        ("c1", ["a", "b", "a"], {"team": "red", "age": 30}),
        ("c2", ["b"], {"team": "blue", "age": 50}),
    ]
)


# -- counting oracles ----------------------------------------------------------


def test_dimension_formula_by_hand():
    # 2 activities + PAD = 3 per slot; window 2 -> 6; team one-hot 2; age 1
    spec = build_encoding_spec(TWO_ACT_LOG, window=2, attributes=("team", "age"))
    assert spec.slot_width == 3
    assert spec.dimension == 2 * 3 + 2 + 1
    assert spec.num_classes == 3  # a, b, END


def test_dimension_minimal_window():
    log = make_log([("c", ["only"], {})])
    spec = build_encoding_spec(log, window=1)
    assert spec.dimension == 2  # "only" + PAD
    assert spec.class_names == ("only", END)


def test_prefix_count_equals_total_events():
    triples = extract_prefixes(TWO_ACT_LOG)
    assert len(triples) == sum(len(t.events) for t in TWO_ACT_LOG.traces)
    assert [(t.case_id, k, nxt) for t, k, nxt in triples] == [
        ("c1", 1, "b"),
        ("c1", 2, "a"),
        ("c1", 3, None),
        ("c2", 1, None),
    ]


def test_feature_names_cover_every_column():
    spec = build_encoding_spec(TWO_ACT_LOG, window=2, attributes=("team", "age"))
    assert len(spec.feature_names) == spec.dimension
    assert spec.feature_names[0] == "slot0 = a"
    assert "team = red" in spec.feature_names
    assert "age" in spec.feature_names


# -- encoding ------------------------------------------------------------------


def test_encode_recent_activity_in_slot_zero():
    spec = build_encoding_spec(TWO_ACT_LOG, window=2)
    vec = encode_prefix(spec, TWO_ACT_LOG.traces[0], 2)  # prefix a, b
    names = spec.feature_names
    on = {names[i] for i in np.flatnonzero(vec)}
    assert on == {"slot0 = b", "slot1 = a"}


def test_encode_pads_short_prefixes():
    spec = build_encoding_spec(TWO_ACT_LOG, window=3)
    vec = encode_prefix(spec, TWO_ACT_LOG.traces[0], 1)
    on = {spec.feature_names[i] for i in np.flatnonzero(vec)}
    assert on == {"slot0 = a", f"slot1 = {PAD}", f"slot2 = {PAD}"}


def test_encode_categorical_one_hot():
    spec = build_encoding_spec(TWO_ACT_LOG, window=1, attributes=("team",))
    red = encode_prefix(spec, TWO_ACT_LOG.traces[0], 1)
    blue = encode_prefix(spec, TWO_ACT_LOG.traces[1], 1)
    red_col = spec.feature_names.index("team = red")
    blue_col = spec.feature_names.index("team = blue")
    assert (red[red_col], red[blue_col]) == (1.0, 0.0)
    assert (blue[red_col], blue[blue_col]) == (0.0, 1.0)


def test_encode_numeric_min_max_scaled():
    log = make_log(
        [
            ("lo", ["x"], {"age": 30}),
            ("mid", ["x"], {"age": 50}),
            ("hi", ["x"], {"age": 70}),
        ]
    )
    spec = build_encoding_spec(log, window=1, attributes=("age",))
    col = spec.feature_names.index("age")
    values = [encode_prefix(spec, t, 1)[col] for t in log.traces]
    assert values == [0.0, 0.5, 1.0]


def test_encode_numeric_single_point_range_is_zero():
    log = make_log([("a", ["x"], {"age": 42}), ("b", ["x"], {"age": 42})])
    spec = build_encoding_spec(log, window=1, attributes=("age",))
    col = spec.feature_names.index("age")
    assert encode_prefix(spec, log.traces[0], 1)[col] == 0.0


def test_encode_numeric_clips_out_of_range():
    spec = build_encoding_spec(TWO_ACT_LOG, window=1, attributes=("age",))
    stranger = make_trace("c3", ["a"], age=90)  # observed range is [30, 50]
    col = spec.feature_names.index("age")
    assert encode_prefix(spec, stranger, 1)[col] == 1.0


def test_prefix_out_of_range():
    spec = build_encoding_spec(TWO_ACT_LOG, window=1)
    with pytest.raises(PrefixOutOfRange):
        encode_prefix(spec, TWO_ACT_LOG.traces[1], 2)
    with pytest.raises(PrefixOutOfRange):
        encode_prefix(spec, TWO_ACT_LOG.traces[1], 0)


def test_unknown_attribute_rejected():
    with pytest.raises(UnknownAttribute):
        build_encoding_spec(TWO_ACT_LOG, attributes=("height",))


def test_event_level_attribute_rejected():
    from fairsteer import Event, Trace

    from conftest import stamp

    log = EventLog.from_traces(
        [
            Trace(
                case_id="c",
                events=(Event("x", stamp(0), {"station": "north"}),),
                case_attributes={},
            )
        ]
    )
    with pytest.raises(EventLevelAttributeUnsupported):
        build_encoding_spec(log, attributes=("station",))


def test_empty_log_rejected():
    with pytest.raises(EmptyLog):
        extract_prefixes(EventLog.from_traces([]))


# -- datasets ------------------------------------------------------------------


def test_build_dataset_shapes_and_labels():
    dataset = build_dataset(TWO_ACT_LOG, window=2, attributes=("team",))
    assert dataset.features.shape == (4, dataset.spec.dimension)
    assert dataset.labels.dtype == np.int64
    end_index = dataset.spec.label_index(None)
    assert list(dataset.labels) == [
        dataset.spec.label_index("b"),
        dataset.spec.label_index("a"),
        end_index,
        end_index,
    ]
    assert np.array_equal(dataset.labels, dataset.original_labels)
    assert dataset.labels is not dataset.original_labels
    assert dataset.provenance == (("c1", 1), ("c1", 2), ("c1", 3), ("c2", 1))


def test_dataset_round_trip_json(tmp_path):
    dataset = build_dataset(TWO_ACT_LOG, window=3, attributes=("team", "age"))
    path = tmp_path / "dataset.json"
    dump_dataset(dataset, str(path))
    loaded = load_dataset(str(path))
    assert np.array_equal(loaded.features, dataset.features)
    assert np.array_equal(loaded.labels, dataset.labels)
    assert np.array_equal(loaded.original_labels, dataset.original_labels)
    assert loaded.provenance == dataset.provenance
    assert loaded.spec == dataset.spec


def test_dataset_round_trip_preserves_float_bits():
    doc = dataset_to_json(build_dataset(TWO_ACT_LOG, attributes=("age",)))
    again = dataset_to_json(dataset_from_json(doc))
    assert doc == again


def test_simulator_dataset(cancer_log):
    dataset = build_dataset(cancer_log, window=3, attributes=("gender",))
    assert dataset.num_samples == sum(len(t.events) for t in cancer_log.traces)
    # every sample's slots are one-hot: exactly one symbol per slot
    slot_width = dataset.spec.slot_width
    for slot in range(3):
        block = dataset.features[:, slot * slot_width : (slot + 1) * slot_width]
        assert np.all(block.sum(axis=1) == 1.0)


# -- properties ----------------------------------------------------------------

activity_names = st.sampled_from(["a", "b", "c", "d"])


@st.composite
def random_logs(draw):
    n = draw(st.integers(min_value=1, max_value=5))
    rows = []
    for i in range(n):
        activities = draw(st.lists(activity_names, min_size=1, max_size=6))
        team = draw(st.sampled_from(["red", "blue", "green"]))
        age = draw(st.integers(min_value=0, max_value=99))
        rows.append((f"c{i}", activities, {"team": team, "age": age}))
    return make_log(rows)


@settings(max_examples=50, deadline=None)
@given(random_logs(), st.integers(min_value=1, max_value=4))
def test_property_one_hot_slots_and_range(log, window):
    dataset = build_dataset(log, window=window, attributes=("team", "age"))
    spec = dataset.spec
    assert np.all(dataset.features >= 0.0)
    assert np.all(dataset.features <= 1.0)
    for slot in range(window):
        block = dataset.features[
            :, slot * spec.slot_width : (slot + 1) * spec.slot_width
        ]
        assert np.all(block.sum(axis=1) == 1.0)
    team_cols = spec.columns_for_attribute("team")
    assert np.all(dataset.features[:, team_cols].sum(axis=1) == 1.0)


@settings(max_examples=50, deadline=None)
@given(random_logs())
def test_property_prefixes_of_distinct_histories_are_distinct(log):
    """Within one trace, encodings of different prefix lengths differ
    whenever the window can see the difference (window >= trace length)."""
    window = max(len(t.events) for t in log.traces)
    spec = build_encoding_spec(log, window=window)
    for trace in log.traces:
        seen = set()
        for k in range(1, len(trace.events) + 1):
            seen.add(encode_prefix(spec, trace, k).tobytes())
        assert len(seen) == len(trace.events)


@settings(max_examples=50, deadline=None)
@given(random_logs(), st.integers(min_value=1, max_value=4))
def test_property_labels_in_range(log, window):
    dataset = build_dataset(log, window=window)
    assert dataset.labels.min() >= 0
    assert dataset.labels.max() < dataset.spec.num_classes
    # END labels appear exactly once per trace
    end = dataset.spec.label_index(None)
    assert (dataset.labels == end).sum() == len(log.traces)
