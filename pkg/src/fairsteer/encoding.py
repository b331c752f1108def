"""Prefix extraction and fixed-width feature encoding.

Every prefix of every trace becomes one training sample: the features are a
positional one-hot encoding of the last ``window`` activities (most recent
first) plus encoded case-level attributes, the label is the next activity
or the reserved END class.

Feature layout, in order:

* ``window`` slots, each one-hot over ``alphabet + [PAD]`` (PAD marks slots
  beyond the start of the trace),
* per selected case attribute: one-hot over its domain (categorical) or a
  single min-max scaled column (numeric).

All features are in [0, 1]. The same trace state and attribute values always
produce the same vector, and differing states produce differing vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyLog,
    EventLevelAttributeUnsupported,
    PrefixOutOfRange,
    UnknownAttribute,
)
from .eventlog import AttrValue, EventLog, Trace

#: Reserved symbol for empty activity slots.
PAD = "<PAD>"
#: Reserved class for "the case ends here".
END = "<END>"


@dataclass(frozen=True)
class CaseFeature:
    """Encoding of one case attribute.

    kind "onehot": one column per domain value, in domain order.
    kind "scaled": a single column, (value - lo) / (hi - lo), clipped to
    [0, 1]; 0.0 when the observed range is a single point.
    """

    attribute: str
    kind: str
    values: tuple[AttrValue, ...] = ()
    lo: float = 0.0
    hi: float = 1.0

    @property
    def width(self) -> int:
        return len(self.values) if self.kind == "onehot" else 1


@dataclass(frozen=True)
class EncodingSpec:
    """Frozen description of the feature space for one log."""

    window: int
    activity_alphabet: tuple[str, ...]
    case_features: tuple[CaseFeature, ...]

    @property
    def slot_symbols(self) -> tuple[str, ...]:
        return self.activity_alphabet + (PAD,)

    @property
    def slot_width(self) -> int:
        return len(self.activity_alphabet) + 1

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.activity_alphabet + (END,)

    @property
    def num_classes(self) -> int:
        return len(self.activity_alphabet) + 1

    @property
    def dimension(self) -> int:
        return self.window * self.slot_width + sum(
            f.width for f in self.case_features
        )

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = [
            f"slot{slot} = {symbol}"
            for slot in range(self.window)
            for symbol in self.slot_symbols
        ]
        for feat in self.case_features:
            if feat.kind == "onehot":
                names.extend(f"{feat.attribute} = {v}" for v in feat.values)
            else:
                names.append(feat.attribute)
        return tuple(names)

    def columns_for_attribute(self, attribute: str) -> list[int]:
        """Feature column indexes belonging to one case attribute."""
        offset = self.window * self.slot_width
        for feat in self.case_features:
            if feat.attribute == attribute:
                return list(range(offset, offset + feat.width))
            offset += feat.width
        raise UnknownAttribute(f"attribute {attribute!r} is not encoded")

    def onehot_columns(self) -> set[int]:
        """Columns that hold one-hot indicators (slots + categorical attrs)."""
        cols = set(range(self.window * self.slot_width))
        offset = self.window * self.slot_width
        for feat in self.case_features:
            if feat.kind == "onehot":
                cols.update(range(offset, offset + feat.width))
            offset += feat.width
        return cols

    def label_index(self, activity: str | None) -> int:
        """Class index of a next activity; None means END."""
        if activity is None:
            return len(self.activity_alphabet)
        try:
            return self.activity_alphabet.index(activity)
        except ValueError:
            raise UnknownAttribute(f"activity {activity!r} not in alphabet") from None


@dataclass(frozen=True)
class PrefixSample:
    """One encoded prefix: features, label, and where it came from."""

    features: np.ndarray
    label: int
    case_id: str
    prefix_length: int


@dataclass
class PrefixDataset:
    """Encoded prefixes of a whole log, in deterministic order.

    Samples are ordered by trace position in the log, then by prefix length.
    ``labels`` are the current training targets; ``original_labels`` keep the
    ground truth from the log and are never rewritten by relabeling.
    """

    spec: EncodingSpec
    features: np.ndarray  # (n, dimension) float64
    labels: np.ndarray  # (n,) int64
    original_labels: np.ndarray  # (n,) int64
    provenance: tuple[tuple[str, int], ...]  # (case_id, prefix_length)

    @property
    def num_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.spec.class_names

    def sample(self, index: int) -> PrefixSample:
        case_id, prefix_length = self.provenance[index]
        return PrefixSample(
            features=self.features[index],
            label=int(self.labels[index]),
            case_id=case_id,
            prefix_length=prefix_length,
        )

    def with_labels(self, labels: np.ndarray) -> "PrefixDataset":
        """Copy of the dataset with new training labels (ground truth kept)."""
        if labels.shape != self.labels.shape:
            raise DimensionMismatch(
                f"expected {self.labels.shape[0]} labels, got {labels.shape[0]}"
            )
        return PrefixDataset(
            spec=self.spec,
            features=self.features,
            labels=np.asarray(labels, dtype=np.int64).copy(),
            original_labels=self.original_labels,
            provenance=self.provenance,
        )


def build_encoding_spec(
    log: EventLog, window: int = 3, attributes: Sequence[str] = ()
) -> EncodingSpec:
    """Derive the feature space of a log.

    Args:
        log: source log; alphabet order and attribute domains come from it.
        window: how many trailing activities to encode (k).
        attributes: case-level attribute names to include as features.

    Raises:
        UnknownAttribute: a requested attribute is not in the log's schema.
        EventLevelAttributeUnsupported: a requested attribute exists only at
            event level.
    """
    if window < 1:
        raise PrefixOutOfRange(f"window must be >= 1, got {window}")
    features: list[CaseFeature] = []
    for name in attributes:
        spec = log.attribute_schema.get(name)
        if spec is None:
            raise UnknownAttribute(f"attribute {name!r} does not occur in the log")
        if spec.level != "case":
            raise EventLevelAttributeUnsupported(
                f"attribute {name!r} is event-level; only case attributes "
                "can be encoded"
            )
        if spec.kind == "numeric":
            features.append(
                CaseFeature(attribute=name, kind="scaled", lo=spec.lo, hi=spec.hi)
            )
        else:
            features.append(
                CaseFeature(attribute=name, kind="onehot", values=spec.values)
            )
    return EncodingSpec(
        window=window,
        activity_alphabet=log.activity_alphabet,
        case_features=tuple(features),
    )


def extract_prefixes(log: EventLog) -> list[tuple[Trace, int, str | None]]:
    """List all (trace, prefix_length, next_activity) triples of a log.

    next_activity is None when the prefix is the whole trace (END). Order is
    deterministic: traces in log order, prefix lengths ascending.

    Raises:
        EmptyLog: the log has no traces.
    """
    if not log.traces:
        raise EmptyLog("cannot extract prefixes from an empty log")
    out: list[tuple[Trace, int, str | None]] = []
    for trace in log.traces:
        for length in range(1, len(trace.events) + 1):
            next_activity = (
                trace.events[length].activity if length < len(trace.events) else None
            )
            out.append((trace, length, next_activity))
    return out


def encode_prefix(spec: EncodingSpec, trace: Trace, prefix_length: int) -> np.ndarray:
    """Encode the first ``prefix_length`` events of a trace.

    Slot 0 holds the most recent activity of the prefix, slot 1 the one
    before it, and so on; slots beyond the start of the trace are PAD.

    Raises:
        PrefixOutOfRange: prefix_length < 1 or longer than the trace.
        UnknownAttribute: the trace misses an encoded attribute, or an
            activity/value is outside the spec's domain.
    """
    if prefix_length < 1 or prefix_length > len(trace.events):
        raise PrefixOutOfRange(
            f"prefix length {prefix_length} out of range for trace "
            f"{trace.case_id!r} with {len(trace.events)} events"
        )
    vec = np.zeros(spec.dimension, dtype=np.float64)
    symbols = spec.slot_symbols
    for slot in range(spec.window):
        position = prefix_length - 1 - slot
        symbol = trace.events[position].activity if position >= 0 else PAD
        try:
            index = symbols.index(symbol)
        except ValueError:
            raise UnknownAttribute(
                f"activity {symbol!r} not in the encoding alphabet"
            ) from None
        vec[slot * spec.slot_width + index] = 1.0

    offset = spec.window * spec.slot_width
    for feat in spec.case_features:
        if feat.attribute not in trace.case_attributes:
            raise UnknownAttribute(
                f"trace {trace.case_id!r} has no attribute {feat.attribute!r}"
            )
        value = trace.case_attributes[feat.attribute]
        if feat.kind == "onehot":
            try:
                index = feat.values.index(value)
            except ValueError:
                raise UnknownAttribute(
                    f"value {value!r} of {feat.attribute!r} not in domain"
                ) from None
            vec[offset + index] = 1.0
        else:
            span = feat.hi - feat.lo
            if span > 0:
                scaled = (float(value) - feat.lo) / span
                vec[offset] = min(1.0, max(0.0, scaled))
            # single-point range encodes as 0.0
        offset += feat.width
    return vec


def build_dataset(
    log: EventLog, window: int = 3, attributes: Sequence[str] = ()
) -> PrefixDataset:
    """Extract and encode every prefix of a log into one dataset."""
    spec = build_encoding_spec(log, window=window, attributes=attributes)
    triples = extract_prefixes(log)
    n = len(triples)
    features = np.zeros((n, spec.dimension), dtype=np.float64)
    labels = np.zeros(n, dtype=np.int64)
    provenance: list[tuple[str, int]] = []
    for i, (trace, length, next_activity) in enumerate(triples):
        features[i] = encode_prefix(spec, trace, length)
        labels[i] = spec.label_index(next_activity)
        provenance.append((trace.case_id, length))
    return PrefixDataset(
        spec=spec,
        features=features,
        labels=labels,
        original_labels=labels.copy(),
        provenance=tuple(provenance),
    )


# -- columnar JSON ------------------------------------------------------------


def spec_to_json(spec: EncodingSpec) -> dict:
    return {
        "window": spec.window,
        "activity_alphabet": list(spec.activity_alphabet),
        "case_features": [
            {
                "attribute": f.attribute,
                "kind": f.kind,
                "values": list(f.values),
                "lo": f.lo,
                "hi": f.hi,
            }
            for f in spec.case_features
        ],
    }


def spec_from_json(doc: dict) -> EncodingSpec:
    return EncodingSpec(
        window=int(doc["window"]),
        activity_alphabet=tuple(doc["activity_alphabet"]),
        case_features=tuple(
            CaseFeature(
                attribute=f["attribute"],
                kind=f["kind"],
                values=tuple(f["values"]),
                lo=float(f["lo"]),
                hi=float(f["hi"]),
            )
            for f in doc["case_features"]
        ),
    )


def dataset_to_json(dataset: PrefixDataset) -> dict:
    """Columnar JSON document for a dataset (exact float round-trip)."""
    return {
        "spec": spec_to_json(dataset.spec),
        "feature_names": list(dataset.spec.feature_names),
        "class_names": list(dataset.class_names),
        "features": [list(map(float, row)) for row in dataset.features],
        "labels": [int(x) for x in dataset.labels],
        "original_labels": [int(x) for x in dataset.original_labels],
        "provenance": [[case_id, length] for case_id, length in dataset.provenance],
    }


def dataset_from_json(doc: dict) -> PrefixDataset:
    spec = spec_from_json(doc["spec"])
    features = np.asarray(doc["features"], dtype=np.float64)
    if features.size == 0:
        features = features.reshape(0, spec.dimension)
    return PrefixDataset(
        spec=spec,
        features=features,
        labels=np.asarray(doc["labels"], dtype=np.int64),
        original_labels=np.asarray(doc["original_labels"], dtype=np.int64),
        provenance=tuple((str(c), int(l)) for c, l in doc["provenance"]),
    )


def dump_dataset(dataset: PrefixDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(dataset_to_json(dataset), handle)


def load_dataset(path: str) -> PrefixDataset:
    with open(path, "r", encoding="utf-8") as handle:
        return dataset_from_json(json.load(handle))
