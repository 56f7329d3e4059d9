"""Trace serialization: the plain event-line format and XES event logs.

Both directions are pure per-document functions; documents may be processed
concurrently with no shared state.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import datetime, timezone

from .core import EventType, ModelingEvent, Trace, TraceOrigin, TraceSet
from .errors import (
    EmptyTraceError,
    MalformedLineError,
    MissingAttributeError,
    XmlError,
)

XES_NAMESPACE = "http://www.xes-standard.org/"


@dataclass(frozen=True)
class ParseReport:
    """What a parse accepted and what it rejected (lenient mode)."""

    accepted_events: int
    rejected_lines: tuple[tuple[int, str], ...] = ()
    source: str = "<input>"

    def __post_init__(self):
        object.__setattr__(self, "rejected_lines", tuple(self.rejected_lines))
        numbers = [n for n, _ in self.rejected_lines]
        if any(a >= b for a, b in zip(numbers, numbers[1:])):
            raise ValueError("rejected line numbers must be strictly increasing")

    @property
    def rejected_count(self) -> int:
        return len(self.rejected_lines)


@dataclass(frozen=True)
class XesKeyMap:
    """Attribute keys used in XES payloads.

    The defaults mirror the event grammar slot names; remap them for recorder
    exports that chose different keys.
    """

    class_key: str = "class"
    feature_key: str = "featureName"
    type_key: str = "eventType"
    timestamp_key: str = "time:timestamp"
    trace_name_key: str = "concept:name"
    model_key: str = "model:id"
    origin_key: str = "origin"
    generator_key: str = "generator:id"


DEFAULT_KEYMAP = XesKeyMap()


# ---------------------------------------------------------------------------
# event-line format


def line_matches_grammar(line: str) -> bool:
    """True iff the line is `event <class> <featureName> <eventType>`.

    The keyword is literal lower-case `event`; the type token is accepted in
    any case (it parses case-insensitively).
    """
    tokens = line.split()
    return len(tokens) == 4 and tokens[0] == "event" and EventType.is_known(tokens[3])


def parse_event_line(line: str) -> ModelingEvent:
    tokens = line.split()
    if not (len(tokens) == 4 and tokens[0] == "event" and EventType.is_known(tokens[3])):
        raise MalformedLineError(0, line)
    return ModelingEvent(tokens[1], tokens[2], EventType.parse(tokens[3]), raw=line)


def parse_event_lines(
    text: str,
    lenient: bool = True,
    *,
    trace_id: str = "trace-1",
    model_id: str | None = None,
    origin: TraceOrigin | None = None,
    source: str = "<lines>",
) -> tuple[Trace, ParseReport]:
    """Parse event-line text into a trace.

    Blank lines are skipped. In strict mode any other non-matching line raises
    :class:`MalformedLineError`; in lenient mode it is recorded in the report
    and skipped. Raises :class:`EmptyTraceError` when no event parses.
    """
    events: list[ModelingEvent] = []
    rejected: list[tuple[int, str]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line_matches_grammar(line):
            tokens = line.split()
            events.append(ModelingEvent(tokens[1], tokens[2], EventType.parse(tokens[3]), raw=line))
        elif lenient:
            rejected.append((line_no, f"does not match event grammar: {line.strip()!r}"))
        else:
            raise MalformedLineError(line_no, line)
    if not events:
        raise EmptyTraceError(f"no events parsed from {source}")
    trace = Trace(
        id=trace_id,
        model_id=model_id if model_id is not None else trace_id,
        events=tuple(events),
        origin=origin if origin is not None else TraceOrigin.human(),
    )
    return trace, ParseReport(len(events), tuple(rejected), source)


def render_event_lines(trace: Trace) -> str:
    """Canonical newline-terminated line per event; inverse of parse."""
    return trace.rendered()


# ---------------------------------------------------------------------------
# XES


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _parse_timestamp(value: str) -> datetime:
    # datetime.fromisoformat on 3.10 rejects a trailing Z
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def _string_attrs(element: ET.Element) -> dict[str, str]:
    attrs = {}
    for child in element:
        if _localname(child.tag) in ("string", "date", "int", "float", "boolean"):
            key = child.get("key")
            value = child.get("value")
            if key is not None and value is not None:
                attrs[key] = value
    return attrs


def parse_xes(
    data: bytes | str,
    lenient: bool = True,
    *,
    keymap: XesKeyMap = DEFAULT_KEYMAP,
    origin: TraceOrigin | None = None,
    source: str = "<xes>",
) -> tuple[TraceSet, ParseReport]:
    """Read an XES log into a trace set.

    Trace ids come from the trace's `concept:name`, else `trace-<ordinal>` is
    synthesized. Events are read from string attributes keyed per ``keymap``
    and keep document order. ``origin`` overrides any recorded provenance;
    without it, traces default to human origin unless the log carries origin
    attributes written by :func:`write_xes`.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        raise XmlError(f"malformed XML in {source}: {exc}") from exc

    log_attrs = _string_attrs(root)
    metamodel_id = log_attrs.get("metamodel:id", "unknown")

    traces: list[Trace] = []
    rejected: list[tuple[int, str]] = []
    accepted = 0
    event_ordinal = 0
    for trace_no, trace_el in enumerate(
        (el for el in root if _localname(el.tag) == "trace"), start=1
    ):
        trace_attrs = _string_attrs(trace_el)
        trace_id = trace_attrs.get(keymap.trace_name_key, f"trace-{trace_no}")
        model_id = trace_attrs.get(keymap.model_key, trace_id)
        if origin is not None:
            trace_origin = origin
        elif trace_attrs.get(keymap.origin_key) == "synthetic":
            trace_origin = TraceOrigin.synthetic(trace_attrs.get(keymap.generator_key, "unknown"))
        elif trace_attrs.get(keymap.origin_key) == "mixed":
            trace_origin = TraceOrigin.mixed()
        else:
            trace_origin = TraceOrigin.human()

        events: list[ModelingEvent] = []
        for event_el in (el for el in trace_el if _localname(el.tag) == "event"):
            event_ordinal += 1
            attrs = _string_attrs(event_el)
            missing = [
                key
                for key in (keymap.class_key, keymap.feature_key, keymap.type_key)
                if key not in attrs
            ]
            if missing:
                if lenient:
                    rejected.append((event_ordinal, f"missing attribute {missing[0]!r}"))
                    continue
                raise MissingAttributeError(missing[0], event_ordinal)
            type_token = attrs[keymap.type_key]
            if not EventType.is_known(type_token):
                if lenient:
                    rejected.append((event_ordinal, f"unknown event type {type_token!r}"))
                    continue
                raise MissingAttributeError(keymap.type_key, event_ordinal)
            timestamp = None
            if keymap.timestamp_key in attrs:
                try:
                    timestamp = _parse_timestamp(attrs[keymap.timestamp_key])
                except ValueError:
                    if not lenient:
                        raise MissingAttributeError(keymap.timestamp_key, event_ordinal)
                    rejected.append((event_ordinal, "unreadable timestamp"))
                    continue
            events.append(
                ModelingEvent(
                    attrs[keymap.class_key],
                    attrs[keymap.feature_key],
                    EventType.parse(type_token),
                    timestamp=timestamp,
                )
            )
        if events:
            accepted += len(events)
            traces.append(Trace(trace_id, model_id, tuple(events), trace_origin))
        else:
            # consume a fresh ordinal so report entries stay strictly increasing
            event_ordinal += 1
            rejected.append((event_ordinal, f"trace {trace_id!r} had no readable events"))
    return TraceSet(metamodel_id, tuple(traces)), ParseReport(accepted, tuple(rejected), source)


def _string_el(parent: ET.Element, key: str, value: str) -> None:
    ET.SubElement(parent, "string", {"key": key, "value": value})


def write_xes(
    trace_set: TraceSet,
    *,
    keymap: XesKeyMap = DEFAULT_KEYMAP,
) -> bytes:
    """Serialize a trace set as an XES log.

    Round-trips through :func:`parse_xes`: trace ids, event order, millisecond
    timestamps, and origins are preserved (byte layout is not guaranteed).
    """
    log = ET.Element("log", {"xes.version": "1.0", "xmlns": XES_NAMESPACE})
    _string_el(log, "metamodel:id", trace_set.metamodel_id)
    for trace in trace_set:
        trace_el = ET.SubElement(log, "trace")
        _string_el(trace_el, keymap.trace_name_key, trace.id)
        _string_el(trace_el, keymap.model_key, trace.model_id)
        _string_el(trace_el, keymap.origin_key, trace.origin.kind)
        if trace.origin.generator_id is not None:
            _string_el(trace_el, keymap.generator_key, trace.origin.generator_id)
        for event in trace.events:
            event_el = ET.SubElement(trace_el, "event")
            _string_el(event_el, keymap.class_key, event.class_name)
            _string_el(event_el, keymap.feature_key, event.feature_name)
            _string_el(event_el, keymap.type_key, event.event_type.value)
            if event.timestamp is not None:
                ET.SubElement(
                    event_el,
                    "date",
                    {
                        "key": keymap.timestamp_key,
                        "value": event.timestamp.astimezone(timezone.utc).isoformat(
                            timespec="milliseconds"
                        ),
                    },
                )
    ET.indent(log)
    return ET.tostring(log, encoding="utf-8", xml_declaration=True)
