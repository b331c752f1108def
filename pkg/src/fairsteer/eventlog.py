"""Event log model and XES (subset) parsing / serialization.

The in-memory model is deliberately small: a log is a list of traces, a trace
is a case id plus case-level attributes plus an ordered list of events, an
event is an activity name, a timestamp and optional event-level attributes.

The XES subset understood here covers ``<log>``, ``<trace>`` and ``<event>``
elements with ``string`` / ``date`` / ``int`` / ``float`` / ``boolean``
attribute children. ``concept:name`` carries case ids and activity names,
``time:timestamp`` carries event timestamps. Extension, global, and
classifier declarations are parsed and ignored.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Union

from .errors import MalformedXml, MissingConceptName, MixedLevelAttribute

AttrValue = Union[str, int, float, bool]

#: Timestamp assigned to the first event of a trace when the document has no
#: time:timestamp values; subsequent events get one second each.
EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

_XES_NS = "http://www.xes-standard.org/"


@dataclass(frozen=True)
class Event:
    """A single executed activity.

    Attributes:
        activity: activity label (``concept:name``).
        timestamp: timezone-aware completion time.
        attributes: event-level attributes, excluding concept:name and
            time:timestamp.
    """

    activity: str
    timestamp: datetime
    attributes: dict[str, AttrValue] = field(default_factory=dict)


@dataclass(frozen=True)
class Trace:
    """One case: an ordered sequence of events plus case-level attributes."""

    case_id: str
    events: tuple[Event, ...]
    case_attributes: dict[str, AttrValue] = field(default_factory=dict)


@dataclass(frozen=True)
class AttributeSpec:
    """Inferred description of one attribute.

    kind is "numeric" when every observed value parses as a number, else
    "categorical". level is "case" when the name only appears on traces,
    else "event". For categorical attributes ``values`` holds the domain in
    first-occurrence order; for numeric attributes ``lo``/``hi`` hold the
    observed range.
    """

    name: str
    kind: str
    level: str
    values: tuple[AttrValue, ...] | None = None
    lo: float | None = None
    hi: float | None = None


@dataclass(frozen=True)
class EventLog:
    """A parsed event log.

    activity_alphabet lists distinct activities in first-occurrence order;
    attribute_schema maps attribute name to its inferred spec. Both are
    derived from the traces, use :meth:`from_traces` to build them.
    """

    traces: tuple[Trace, ...]
    activity_alphabet: tuple[str, ...]
    attribute_schema: dict[str, AttributeSpec]

    @classmethod
    def from_traces(cls, traces: Iterable[Trace]) -> "EventLog":
        traces = tuple(traces)
        alphabet: list[str] = []
        seen = set()
        for trace in traces:
            for event in trace.events:
                if event.activity not in seen:
                    seen.add(event.activity)
                    alphabet.append(event.activity)
        return cls(
            traces=traces,
            activity_alphabet=tuple(alphabet),
            attribute_schema=_infer_schema(traces),
        )


@dataclass
class ParseReport:
    """Structured warnings produced while parsing an XES document."""

    num_traces: int = 0
    num_events: int = 0
    warnings: list[str] = field(default_factory=list)


def _parse_number(value: AttrValue) -> float | None:
    """Return the numeric interpretation of a value, or None."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    try:
        return float(str(value).strip())
    except ValueError:
        return None


def _infer_schema(traces: Iterable[Trace]) -> dict[str, AttributeSpec]:
    # one pass collecting, per attribute name, the values seen at each level
    case_values: dict[str, list[AttrValue]] = {}
    event_values: dict[str, list[AttrValue]] = {}
    for trace in traces:
        for name, value in trace.case_attributes.items():
            case_values.setdefault(name, []).append(value)
        for event in trace.events:
            for name, value in event.attributes.items():
                event_values.setdefault(name, []).append(value)

    def kind_of(values: list[AttrValue]) -> str:
        if all(_parse_number(v) is not None for v in values):
            return "numeric"
        return "categorical"

    schema: dict[str, AttributeSpec] = {}
    for name in list(case_values) + [n for n in event_values if n not in case_values]:
        at_case = name in case_values
        at_event = name in event_values
        if at_case and at_event:
            if kind_of(case_values[name]) != kind_of(event_values[name]):
                raise MixedLevelAttribute(
                    f"attribute {name!r} is {kind_of(case_values[name])} at case "
                    f"level but {kind_of(event_values[name])} at event level"
                )
        values = case_values.get(name, []) + event_values.get(name, [])
        level = "case" if at_case and not at_event else "event"
        kind = kind_of(values)
        if kind == "numeric":
            numbers = [_parse_number(v) for v in values]
            schema[name] = AttributeSpec(
                name=name, kind=kind, level=level,
                lo=min(numbers), hi=max(numbers),
            )
        else:
            domain: list[AttrValue] = []
            seen: set = set()
            for v in values:
                if v not in seen:
                    seen.add(v)
                    domain.append(v)
            schema[name] = AttributeSpec(
                name=name, kind=kind, level=level, values=tuple(domain)
            )
    return schema


def infer_schema(log: EventLog) -> dict[str, AttributeSpec]:
    """Infer attribute kinds, levels, and domains from a log's traces."""
    return _infer_schema(log.traces)


# -- parsing ----------------------------------------------------------------


def _localname(tag: str) -> str:
    return tag.rpartition("}")[2]


def _parse_timestamp(raw: str) -> datetime:
    text = raw.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError as exc:
        raise MalformedXml(f"unparseable timestamp {raw!r}") from exc
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    return stamp.astimezone(timezone.utc)


def _parse_attribute(element: ET.Element) -> tuple[str, AttrValue] | None:
    """Decode one typed attribute element; returns None for ignored kinds."""
    tag = _localname(element.tag)
    key = element.get("key")
    value = element.get("value", "")
    if key is None:
        return None
    if tag == "string":
        return key, value
    if tag == "int":
        try:
            return key, int(value)
        except ValueError as exc:
            raise MalformedXml(f"bad int value {value!r} for key {key!r}") from exc
    if tag == "float":
        try:
            return key, float(value)
        except ValueError as exc:
            raise MalformedXml(f"bad float value {value!r} for key {key!r}") from exc
    if tag == "boolean":
        return key, value.strip().lower() == "true"
    if tag == "date":
        # non-timestamp date attributes are kept as their ISO string
        return key, value
    return None  # id / list / container / anything newer than the subset


def parse_xes(data: bytes) -> EventLog:
    """Parse XES bytes into an EventLog. See parse_xes_with_report."""
    log, _ = parse_xes_with_report(data)
    return log


def parse_xes_with_report(data: bytes) -> tuple[EventLog, ParseReport]:
    """Parse XES bytes, returning the log plus a structured warning report.

    Determinism: identical bytes yield an identical EventLog, including
    activity-alphabet order (first occurrence) and attribute domains.

    Raises:
        MalformedXml: not XML, or no <log> root, or a malformed typed value.
        MissingConceptName: an event lacks concept:name (names the trace
            and event index).
        MixedLevelAttribute: same attribute name at case and event level
            with different inferred kinds.
    """
    report = ParseReport()
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise MalformedXml(f"not well-formed XML: {exc}") from exc
    if _localname(root.tag) != "log":
        raise MalformedXml(f"root element is <{_localname(root.tag)}>, expected <log>")

    traces: list[Trace] = []
    used_case_ids: set[str] = set()
    for trace_index, trace_el in enumerate(
        el for el in root if _localname(el.tag) == "trace"
    ):
        case_id: str | None = None
        case_attributes: dict[str, AttrValue] = {}
        events: list[Event] = []
        missing_stamps = 0
        for child in trace_el:
            tag = _localname(child.tag)
            if tag == "event":
                event_index = len(events)
                activity: str | None = None
                timestamp: datetime | None = None
                attributes: dict[str, AttrValue] = {}
                for attr_el in child:
                    decoded = _parse_attribute(attr_el)
                    if decoded is None:
                        continue
                    key, value = decoded
                    if key == "concept:name":
                        activity = str(value)
                    elif key == "time:timestamp":
                        timestamp = _parse_timestamp(attr_el.get("value", ""))
                    else:
                        attributes[key] = value
                if activity is None:
                    raise MissingConceptName(trace_index, event_index)
                if timestamp is None:
                    timestamp = datetime.fromtimestamp(event_index, tz=timezone.utc)
                    missing_stamps += 1
                events.append(Event(activity, timestamp, attributes))
            else:
                decoded = _parse_attribute(child)
                if decoded is None:
                    continue
                key, value = decoded
                if key == "concept:name":
                    case_id = str(value)
                else:
                    case_attributes[key] = value
        if case_id is None:
            case_id = f"case_{trace_index}"
            report.warnings.append(
                f"trace {trace_index} has no concept:name, assigned {case_id!r}"
            )
        if case_id in used_case_ids:
            original = case_id
            suffix = 2
            while f"{original}#{suffix}" in used_case_ids:
                suffix += 1
            case_id = f"{original}#{suffix}"
            report.warnings.append(
                f"duplicate case id {original!r} in trace {trace_index}, "
                f"renamed to {case_id!r}"
            )
        used_case_ids.add(case_id)
        if missing_stamps:
            report.warnings.append(
                f"trace {trace_index} ({case_id!r}): {missing_stamps} event(s) "
                "without time:timestamp, synthesized from event order"
            )
        ordered = sorted(events, key=lambda e: e.timestamp)  # stable: ties keep doc order
        if [e.timestamp for e in ordered] != [e.timestamp for e in events]:
            report.warnings.append(
                f"trace {trace_index} ({case_id!r}): events reordered by timestamp"
            )
        traces.append(Trace(case_id, tuple(ordered), case_attributes))
        report.num_events += len(events)

    report.num_traces = len(traces)
    return EventLog.from_traces(traces), report


# -- serialization ----------------------------------------------------------


def _attribute_element(parent: ET.Element, key: str, value: AttrValue) -> None:
    if isinstance(value, bool):
        ET.SubElement(parent, "boolean", key=key, value="true" if value else "false")
    elif isinstance(value, int):
        ET.SubElement(parent, "int", key=key, value=str(value))
    elif isinstance(value, float):
        ET.SubElement(parent, "float", key=key, value=repr(value))
    else:
        ET.SubElement(parent, "string", key=key, value=str(value))


def serialize_xes(log: EventLog) -> bytes:
    """Serialize a log to XES bytes.

    parse_xes(serialize_xes(log)) reproduces the log exactly: same trace
    order, case ids, attributes (values and types), activities, timestamps,
    and therefore the same alphabet and schema.
    """
    root = ET.Element("log", {"xes.version": "1.0", "xmlns": _XES_NS})
    for trace in log.traces:
        trace_el = ET.SubElement(root, "trace")
        ET.SubElement(trace_el, "string", key="concept:name", value=trace.case_id)
        for key, value in trace.case_attributes.items():
            _attribute_element(trace_el, key, value)
        for event in trace.events:
            event_el = ET.SubElement(trace_el, "event")
            ET.SubElement(event_el, "string", key="concept:name", value=event.activity)
            ET.SubElement(
                event_el,
                "date",
                key="time:timestamp",
                value=event.timestamp.astimezone(timezone.utc).isoformat(),
            )
            for key, value in event.attributes.items():
                _attribute_element(event_el, key, value)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)
