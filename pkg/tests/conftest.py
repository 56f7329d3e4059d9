from __future__ import annotations

import random

import pytest

from traceforge.core import (
    ClassDef,
    EventType,
    FeatureKind,
    MetamodelSchema,
    ModelingEvent,
    Trace,
    TraceOrigin,
)

EVENT_TYPES = list(EventType)


def ev(class_name: str, feature: str, etype: str | EventType, timestamp=None) -> ModelingEvent:
    if isinstance(etype, str):
        etype = EventType.parse(etype)
    return ModelingEvent(class_name, feature, etype, timestamp=timestamp)


def trace(trace_id: str, events, origin: TraceOrigin | None = None, model_id=None) -> Trace:
    return Trace(
        id=trace_id,
        model_id=model_id or trace_id,
        events=tuple(events),
        origin=origin or TraceOrigin.human(),
    )


@pytest.fixture
def tiny_schema() -> MetamodelSchema:
    return MetamodelSchema(
        id="tiny",
        classes={
            "Process": ClassDef("Process", {"name": FeatureKind.ATTRIBUTE}),
        },
    )


@pytest.fixture
def two_class_schema() -> MetamodelSchema:
    return MetamodelSchema(
        id="pair",
        classes={
            "A": ClassDef("A", {"x": FeatureKind.ATTRIBUTE, "r": FeatureKind.REFERENCE}),
            "B": ClassDef("B", {"y": FeatureKind.ATTRIBUTE, "s": FeatureKind.REFERENCE}),
            "C": ClassDef("C", {"t": FeatureKind.REFERENCE}),
        },
    )


def random_identifier(rng: random.Random, length: int = 6) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, length)))


def random_events(rng: random.Random, n: int, vocab: int = 4) -> list[ModelingEvent]:
    classes = [random_identifier(rng) for _ in range(vocab)]
    features = [random_identifier(rng) for _ in range(vocab)]
    return [
        ModelingEvent(rng.choice(classes), rng.choice(features), rng.choice(EVENT_TYPES))
        for _ in range(n)
    ]
