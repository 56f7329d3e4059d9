"""Bundled demo data: a mini metamodel for process-network models plus a
deterministic generator for human-style traces, model summaries, and prompt
demonstrations. Everything every CLI subcommand needs to run offline.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from .core import (
    ClassDef,
    Dataset,
    EventType,
    FeatureKind,
    MetamodelSchema,
    ModelingEvent,
    Trace,
    TraceOrigin,
    TraceSet,
)
from .synth import Demonstration, ModelSummary

DEMO_METAMODEL_ID = "procnet"

_ATTRIBUTE_EVENTS = (EventType.SET, EventType.UNSET)
_REFERENCE_EVENTS = (EventType.ADD, EventType.ADD_MANY, EventType.REMOVE, EventType.MOVE)


def demo_schema() -> MetamodelSchema:
    """Process-network metamodel: systems of processes wired by channels."""

    def cls(class_name: str, /, **features: str) -> ClassDef:
        return ClassDef(class_name, {f: FeatureKind(kind) for f, kind in features.items()})

    return MetamodelSchema(
        id=DEMO_METAMODEL_ID,
        classes={
            "System": cls("System", name="attribute", processes="reference", channels="reference"),
            "Process": cls("Process", name="attribute", priority="attribute", ports="reference"),
            "Channel": cls(
                "Channel", name="attribute", width="attribute", source="reference", target="reference"
            ),
            "Port": cls("Port", name="attribute", direction="attribute", signal="reference"),
            "Signal": cls("Signal", name="attribute", bitWidth="attribute"),
        },
    )


def _random_trace(rng: random.Random, schema: MetamodelSchema, trace_no: int, base: datetime) -> Trace:
    # every model starts the same way, then grows organically: the shared
    # prefix gives the recommender motifs to learn
    events = [
        ModelingEvent("System", "name", EventType.SET),
        ModelingEvent("System", "processes", EventType.ADD),
        ModelingEvent("Process", "name", EventType.SET),
    ]
    classes = list(schema.classes.values())
    for _ in range(rng.randint(5, 13)):
        cdef = rng.choice(classes)
        feature, kind = rng.choice(sorted(cdef.features.items()))
        pool = _ATTRIBUTE_EVENTS if kind is FeatureKind.ATTRIBUTE else _REFERENCE_EVENTS
        # bias toward additive operations, like real editing sessions
        event_type = pool[0] if rng.random() < 0.7 else rng.choice(pool)
        events.append(ModelingEvent(cdef.name, feature, event_type))
    events.append(ModelingEvent("System", "channels", EventType.ADD))
    stamped = [
        ModelingEvent(
            e.class_name, e.feature_name, e.event_type, timestamp=base + timedelta(seconds=3 * i)
        )
        for i, e in enumerate(events)
    ]
    return Trace(
        id=f"trace-{trace_no:02d}",
        model_id=f"model-{trace_no:02d}",
        events=tuple(stamped),
        origin=TraceOrigin.human(),
    )


def demo_trace_set(n_traces: int = 20, seed: int = 7) -> TraceSet:
    """Deterministic human-origin traces over the demo metamodel."""
    rng = random.Random(seed)
    schema = demo_schema()
    base = datetime(2024, 3, 1, 9, 0, tzinfo=timezone.utc)
    traces = tuple(
        _random_trace(rng, schema, i + 1, base + timedelta(hours=i)) for i in range(n_traces)
    )
    return TraceSet(DEMO_METAMODEL_ID, traces)


def _describe(trace: Trace) -> str:
    classes_touched = sorted({e.class_name for e in trace.events})
    return (
        f"A process-network model with {len(trace.events)} editing steps "
        f"touching {', '.join(classes_touched)}."
    )


def demo_models(trace_set: TraceSet | None = None) -> list[ModelSummary]:
    """One model summary per trace, usable as generation targets."""
    trace_set = trace_set if trace_set is not None else demo_trace_set()
    return [
        ModelSummary(model_id=t.model_id, metamodel_id=trace_set.metamodel_id, description=_describe(t))
        for t in trace_set
    ]


def demo_demonstrations(trace_set: TraceSet | None = None, k: int = 2) -> list[Demonstration]:
    """The first k traces rendered as few-shot demonstrations."""
    trace_set = trace_set if trace_set is not None else demo_trace_set()
    return [
        Demonstration(
            model=ModelSummary(t.model_id, trace_set.metamodel_id, _describe(t)),
            trace_text=t.rendered(),
        )
        for t in list(trace_set)[:k]
    ]


def demo_dataset(n_traces: int = 20, seed: int = 7) -> Dataset:
    return Dataset(
        name="demo", trace_set=demo_trace_set(n_traces, seed), synthetic_ratio=0.0, seed=seed
    )


def demo_pairing(trace_set: TraceSet | None = None) -> dict[str, str]:
    """Pair each would-be synthetic trace id to its human reference."""
    trace_set = trace_set if trace_set is not None else demo_trace_set()
    return {f"syn-{t.model_id}": t.id for t in trace_set}
