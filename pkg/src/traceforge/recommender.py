"""Similarity-based next-operation recommender.

Traces are encoded as label histograms: one base label per event (the
composite `class.feature.TYPE` token) plus one refined label per event that
folds in the sorted labels of its sequence neighbors (the previous and next
event). The kernel is the cosine similarity of the combined count vectors, a
deterministic one-round neighborhood-relabeling histogram kernel. Candidate
operations from the top-k most similar traces are scored by
similarity-weighted frequency.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Sequence

from .core import (
    EventType,
    MetamodelSchema,
    ModelingEvent,
    OperationKind,
    Trace,
    TraceSet,
    classify_operation,
)
from .errors import EmptyContextError, EmptyIndexError, EmptyTrainingSetError

logger = logging.getLogger(__name__)

# histogram keys are level-prefixed so refined labels can never collide with
# base labels, whatever characters identifiers contain
_BASE = "0|"
_REFINED = "1|"


@dataclass(frozen=True)
class TraceEncoding:
    trace_id: str
    label_histogram: dict[str, int]

    def base_total(self) -> int:
        return sum(c for label, c in self.label_histogram.items() if label.startswith(_BASE))


def encode_events(trace_id: str, events: Sequence[ModelingEvent]) -> TraceEncoding:
    tokens = [e.token() for e in events]
    histogram: Counter = Counter(_BASE + token for token in tokens)
    for i, token in enumerate(tokens):
        neighbors = sorted(tokens[j] for j in (i - 1, i + 1) if 0 <= j < len(tokens))
        histogram[f"{_REFINED}{token}>{','.join(neighbors)}"] += 1
    return TraceEncoding(trace_id, dict(histogram))


def encode_trace(trace: Trace) -> TraceEncoding:
    return encode_events(trace.id, trace.events)


def kernel(a: TraceEncoding, b: TraceEncoding) -> float:
    """Cosine similarity of the combined base+refined count vectors."""
    ha, hb = a.label_histogram, b.label_histogram
    if not ha or not hb:
        return 1.0 if not ha and not hb else 0.0
    if ha == hb:
        return 1.0
    if len(hb) < len(ha):
        ha, hb = hb, ha
    dot = sum(count * hb.get(label, 0) for label, count in ha.items())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(c * c for c in ha.values())) * math.sqrt(
        sum(c * c for c in hb.values())
    )
    return min(1.0, dot / norm)


@dataclass(frozen=True)
class BuildInfo:
    trained_at: str
    trace_count: int
    seed: int | None = None


@dataclass(frozen=True)
class RecommenderIndex:
    """Immutable trained index: encodings plus the raw events they came from."""

    metamodel_id: str
    encodings: tuple[TraceEncoding, ...]
    event_store: dict[str, tuple[ModelingEvent, ...]]
    schema: MetamodelSchema
    build_info: BuildInfo

    def __post_init__(self):
        encoded_ids = {e.trace_id for e in self.encodings}
        if encoded_ids != set(self.event_store):
            raise ValueError("encodings and event store cover different trace ids")


def train(traces: TraceSet, schema: MetamodelSchema, seed: int | None = None) -> RecommenderIndex:
    """Encode every trace into an index; logs the build duration."""
    if not len(traces):
        raise EmptyTrainingSetError("cannot train on an empty trace set")
    started = time.perf_counter()
    encodings = tuple(encode_trace(t) for t in traces)
    index = RecommenderIndex(
        metamodel_id=traces.metamodel_id,
        encodings=encodings,
        event_store={t.id: t.events for t in traces},
        schema=schema,
        build_info=BuildInfo(
            trained_at=datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
            trace_count=len(traces),
            seed=seed,
        ),
    )
    logger.info("trained index on %d traces in %.4fs", len(traces), time.perf_counter() - started)
    return index


@dataclass(frozen=True)
class RecConfig:
    """Context ratio, recommendation cutoff, and neighbor count."""

    cr: float
    co: int
    k: int = 5

    def __post_init__(self):
        if not 0.0 < self.cr < 1.0:
            raise ValueError(f"context ratio {self.cr} outside (0, 1)")
        if self.co < 1:
            raise ValueError(f"cutoff {self.co} must be >= 1")
        if self.k < 1:
            raise ValueError(f"neighbor count {self.k} must be >= 1")


@dataclass(frozen=True)
class RecItem:
    class_name: str
    feature_name: str
    event_type: EventType
    score: float

    def triple(self) -> tuple[str, str, str]:
        return (self.class_name, self.feature_name, self.event_type.value)


@dataclass(frozen=True)
class Recommendation:
    items: tuple[RecItem, ...]
    kind: OperationKind


def recommend(
    context: Sequence[ModelingEvent],
    index: RecommenderIndex,
    config: RecConfig,
    kind: OperationKind,
) -> Recommendation:
    """Rank the next modeling operations of the requested kind.

    The context is encoded like a trace; its kernel similarity selects the
    top-k training traces (ties broken by trace id). Their events, classified
    and filtered to ``kind`` and not already present in the context, are
    scored by the sum over neighbors of similarity times in-neighbor
    frequency, ordered by score then lexicographically, and cut at ``co``.
    """
    if not context:
        raise EmptyContextError("recommendation needs a non-empty context")
    if not index.encodings:
        raise EmptyIndexError("recommendation needs a trained, non-empty index")
    if kind not in (OperationKind.CLASS_OP, OperationKind.ATTRIBUTE_OP):
        raise ValueError(f"recommendations are for class or attribute ops, not {kind}")

    context_encoding = encode_events("<context>", context)
    similarities = sorted(
        ((kernel(context_encoding, enc), enc.trace_id) for enc in index.encodings),
        key=lambda pair: (-pair[0], pair[1]),
    )
    neighbors = similarities[: config.k]

    context_triples = {e.triple() for e in context}
    scores: dict[tuple[str, str, str], float] = {}
    for similarity, trace_id in neighbors:
        counts: Counter = Counter(
            e.triple()
            for e in index.event_store[trace_id]
            if classify_operation(e, index.schema) is kind and e.triple() not in context_triples
        )
        for triple, count in counts.items():
            scores[triple] = scores.get(triple, 0.0) + similarity * count

    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[: config.co]
    items = tuple(
        RecItem(cls, feat, EventType.parse(etype), score) for (cls, feat, etype), score in ranked
    )
    return Recommendation(items, kind)
