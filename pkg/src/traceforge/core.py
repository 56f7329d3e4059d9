"""Domain types for modeling-operation traces.

Everything here is immutable after construction and safe to share across
concurrent workers. Serialization lives elsewhere (`traceforge.xes` for the
wire formats, `traceforge.serialize` for JSON).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import (
    InvalidDatasetError,
    InvalidEventError,
    InvalidSchemaError,
    InvalidTraceError,
)


class EventType(enum.Enum):
    """The kinds of notification a graphical model editor emits.

    The vocabulary follows the EMF notification kinds; new values must also
    be reflected in the line-format parser tests.
    """

    ADD = "ADD"
    REMOVE = "REMOVE"
    SET = "SET"
    UNSET = "UNSET"
    ADD_MANY = "ADD_MANY"
    REMOVE_MANY = "REMOVE_MANY"
    MOVE = "MOVE"

    @classmethod
    def parse(cls, token: str) -> "EventType":
        try:
            return cls[token.strip().upper()]
        except KeyError:
            raise InvalidEventError(f"unknown event type {token!r}") from None

    @classmethod
    def is_known(cls, token: str) -> bool:
        return token.strip().upper() in cls.__members__

    @property
    def is_additive(self) -> bool:
        """True for operations that introduce content (ADD, ADD_MANY, SET)."""
        return self in (EventType.ADD, EventType.ADD_MANY, EventType.SET)

    def __str__(self) -> str:
        return self.value


def _check_identifier(value: str, what: str) -> None:
    if not value or any(c.isspace() for c in value):
        raise InvalidEventError(f"{what} must be a non-empty token without whitespace: {value!r}")


def _quantize_to_millis(ts: datetime) -> datetime:
    """Normalize to UTC with millisecond precision."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    ts = ts.astimezone(timezone.utc)
    return ts.replace(microsecond=(ts.microsecond // 1000) * 1000)


@dataclass(frozen=True)
class ModelingEvent:
    """One modeling operation: class, feature, and operation kind.

    The timestamp is carried as metadata only; it never enters the canonical
    line rendering or any metric token stream. ``raw`` preserves the source
    line verbatim and does not take part in equality.
    """

    class_name: str
    feature_name: str
    event_type: EventType
    timestamp: datetime | None = None
    raw: str | None = field(default=None, compare=False)

    def __post_init__(self):
        _check_identifier(self.class_name, "class_name")
        _check_identifier(self.feature_name, "feature_name")
        if self.timestamp is not None:
            object.__setattr__(self, "timestamp", _quantize_to_millis(self.timestamp))

    def canonical(self) -> str:
        return f"event {self.class_name} {self.feature_name} {self.event_type.value}"

    def token(self) -> str:
        """Composite token used by the set/profile metrics and the recommender."""
        return f"{self.class_name}.{self.feature_name}.{self.event_type.value}"

    def triple(self) -> tuple[str, str, str]:
        return (self.class_name, self.feature_name, self.event_type.value)


@dataclass(frozen=True)
class TraceOrigin:
    """Provenance of a trace: recorded from a human, LLM-generated, or mixed."""

    kind: str  # "human" | "synthetic" | "mixed"
    generator_id: str | None = None

    _KINDS = ("human", "synthetic", "mixed")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InvalidTraceError(f"unknown origin kind {self.kind!r}")
        if self.kind == "synthetic" and not self.generator_id:
            raise InvalidTraceError("synthetic origin requires a generator_id")
        if self.kind != "synthetic" and self.generator_id is not None:
            raise InvalidTraceError(f"{self.kind} origin carries no generator_id")

    @classmethod
    def human(cls) -> "TraceOrigin":
        return cls("human")

    @classmethod
    def synthetic(cls, generator_id: str) -> "TraceOrigin":
        return cls("synthetic", generator_id)

    @classmethod
    def mixed(cls) -> "TraceOrigin":
        return cls("mixed")


@dataclass(frozen=True)
class Trace:
    """An ordered, non-empty sequence of modeling events for one model."""

    id: str
    model_id: str
    events: tuple[ModelingEvent, ...]
    origin: TraceOrigin = field(default_factory=TraceOrigin.human)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise InvalidTraceError(f"trace {self.id!r} has no events")
        stamps = [e.timestamp for e in self.events]
        if all(s is not None for s in stamps):
            if any(a > b for a, b in zip(stamps, stamps[1:])):
                raise InvalidTraceError(f"trace {self.id!r} has decreasing timestamps")

    def __len__(self) -> int:
        return len(self.events)

    def rendered(self) -> str:
        """Canonical newline-terminated event-line text."""
        return "".join(e.canonical() + "\n" for e in self.events)

    def tokens(self) -> list[str]:
        return [e.token() for e in self.events]


@dataclass(frozen=True)
class TraceSet:
    """Traces gathered for one metamodel; trace ids are unique within the set."""

    metamodel_id: str
    traces: tuple[Trace, ...]

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(self.traces))
        seen = set()
        for t in self.traces:
            if t.id in seen:
                raise InvalidTraceError(f"duplicate trace id {t.id!r} in set")
            seen.add(t.id)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def by_id(self, trace_id: str) -> Trace:
        for t in self.traces:
            if t.id == trace_id:
                return t
        raise KeyError(trace_id)

    def event_count(self) -> int:
        return sum(len(t) for t in self.traces)


class FeatureKind(enum.Enum):
    ATTRIBUTE = "attribute"
    REFERENCE = "reference"


@dataclass(frozen=True)
class ClassDef:
    name: str
    features: dict[str, FeatureKind]

    def __post_init__(self):
        _check_identifier(self.name, "class name")
        for fname in self.features:
            _check_identifier(fname, "feature name")


@dataclass(frozen=True)
class MetamodelSchema:
    """Classes and their features; the oracle for schema validity checks."""

    id: str
    classes: dict[str, ClassDef]

    def __post_init__(self):
        if not self.classes or not any(c.features for c in self.classes.values()):
            raise InvalidSchemaError("schema needs at least one class with one feature")
        for name, cdef in self.classes.items():
            if name != cdef.name:
                raise InvalidSchemaError(f"class key {name!r} != class name {cdef.name!r}")

    def feature_kind(self, class_name: str, feature_name: str) -> FeatureKind | None:
        cdef = self.classes.get(class_name)
        if cdef is None:
            return None
        return cdef.features.get(feature_name)


@dataclass(frozen=True)
class Dataset:
    """A named trace collection with its synthetic share and mixing seed."""

    name: str
    trace_set: TraceSet
    synthetic_ratio: float
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.synthetic_ratio <= 1.0:
            raise InvalidDatasetError(f"synthetic_ratio {self.synthetic_ratio} outside [0,1]")
        total = len(self.trace_set)
        if total:
            actual = self.actual_synthetic_ratio()
            if not math.isclose(actual, self.synthetic_ratio, abs_tol=1.0 / total + 1e-12):
                raise InvalidDatasetError(
                    f"synthetic_ratio {self.synthetic_ratio:.3f} disagrees with "
                    f"trace origins ({actual:.3f}) by more than 1/{total}"
                )

    def actual_synthetic_ratio(self) -> float:
        total = len(self.trace_set)
        if not total:
            return 0.0
        return sum(1 for t in self.trace_set if t.origin.kind == "synthetic") / total


# ---------------------------------------------------------------------------
# schema-based event checks


class Validity(enum.Enum):
    VALID = "valid"
    UNKNOWN_CLASS = "unknown_class"
    UNKNOWN_FEATURE = "unknown_feature"


@dataclass(frozen=True)
class SchemaCheck:
    """Outcome of validating one event against a schema."""

    status: Validity
    feature_kind: FeatureKind | None = None

    @property
    def is_valid(self) -> bool:
        return self.status is Validity.VALID


def validate_event_against_schema(event: ModelingEvent, schema: MetamodelSchema) -> SchemaCheck:
    """Check that the event names an existing class and feature.

    Total over its three outcomes; the feature kind is reported on success.
    """
    cdef = schema.classes.get(event.class_name)
    if cdef is None:
        return SchemaCheck(Validity.UNKNOWN_CLASS)
    kind = cdef.features.get(event.feature_name)
    if kind is None:
        return SchemaCheck(Validity.UNKNOWN_FEATURE)
    return SchemaCheck(Validity.VALID, kind)


class OperationKind(enum.Enum):
    CLASS_OP = "class"
    ATTRIBUTE_OP = "attribute"
    UNKNOWN = "unknown"

    @classmethod
    def parse(cls, token: str) -> "OperationKind":
        for member in cls:
            if member.value == token.strip().lower():
                return member
        raise ValueError(f"unknown operation kind {token!r}")


def classify_operation(event: ModelingEvent, schema: MetamodelSchema) -> OperationKind:
    """Attribute features classify as attribute operations, references as class
    operations; events failing the schema lookup are unknown."""
    kind = schema.feature_kind(event.class_name, event.feature_name)
    if kind is FeatureKind.ATTRIBUTE:
        return OperationKind.ATTRIBUTE_OP
    if kind is FeatureKind.REFERENCE:
        return OperationKind.CLASS_OP
    return OperationKind.UNKNOWN
