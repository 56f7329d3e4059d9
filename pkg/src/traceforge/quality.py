"""Synthetic-trace quality metrics: correctness, diversity, hallucination.

All similarity functions are pure, symmetric, and bounded to [0, 1]. The
empty-input conventions (1 when both sides are empty, 0 when exactly one is)
are chosen so self-similarity holds degenerately.

Tokenization split: the edit-style metrics (LCS, Jaro) run over the character
sequence of the canonical rendered trace text, which captures ordering; the
set/profile metrics (cosine, jaccard, dice, q-gram) run over one composite
`class.feature.TYPE` token per event, which captures operation vocabulary.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

from . import stats
from .core import MetamodelSchema, Trace, TraceSet, validate_event_against_schema
from .errors import (
    DegenerateReferenceError,
    InvalidQError,
    UnpairedTraceError,
)
from .xes import line_matches_grammar

Tokens = Sequence[Hashable]


def correctness(raw_trace_text: str) -> float:
    """Share of non-blank lines that match the event grammar.

    By convention an input with zero non-blank lines scores 1.
    """
    lines = [line for line in raw_trace_text.splitlines() if line.strip()]
    if not lines:
        return 1.0
    valid = sum(1 for line in lines if line_matches_grammar(line))
    return valid / len(lines)


# ---------------------------------------------------------------------------
# similarity primitives


def lcs_similarity(a: Tokens, b: Tokens) -> float:
    """Longest common subsequence length over max(|a|, |b|); 1 if both empty."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    # single-row DP
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1] / max(len(a), len(b))


def jaro_similarity(a: Tokens, b: Tokens) -> float:
    """Standard Jaro: matches within a window of floor(max/2) - 1, transposition term."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    if tuple(a) == tuple(b):
        return 1.0
    window = max(len(a), len(b)) // 2 - 1
    window = max(window, 0)
    matched_a = [False] * len(a)
    matched_b = [False] * len(b)
    matches = 0
    for i, x in enumerate(a):
        lo = max(0, i - window)
        hi = min(len(b), i + window + 1)
        for j in range(lo, hi):
            if not matched_b[j] and b[j] == x:
                matched_a[i] = matched_b[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    j = 0
    for i, x in enumerate(a):
        if matched_a[i]:
            while not matched_b[j]:
                j += 1
            if x != b[j]:
                transpositions += 1
            j += 1
    t = transpositions / 2
    m = matches
    return (m / len(a) + m / len(b) + (m - t) / m) / 3.0


def cosine_similarity(a: Tokens, b: Tokens) -> float:
    """Cosine over token-count vectors; 1 if both empty, 0 if exactly one is."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    ca, cb = Counter(a), Counter(b)
    if ca == cb:
        return 1.0
    dot = sum(count * cb[token] for token, count in ca.items())
    norm = math.sqrt(sum(c * c for c in ca.values())) * math.sqrt(
        sum(c * c for c in cb.values())
    )
    return min(1.0, dot / norm)


def jaccard_similarity(a: Tokens, b: Tokens) -> float:
    """|A and B| / |A or B| over token sets."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def dice_similarity(a: Tokens, b: Tokens) -> float:
    """2 |A and B| / (|A| + |B|) over token sets."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    if not sa or not sb:
        return 0.0
    return 2 * len(sa & sb) / (len(sa) + len(sb))


def qgram_profile(tokens: Tokens, q: int) -> Counter:
    """Count profile of the q-grams of a token sequence; empty below length q."""
    if q < 1:
        raise InvalidQError(f"q must be >= 1, got {q}")
    seq = tuple(tokens)
    return Counter(seq[i : i + q] for i in range(len(seq) - q + 1))


def qgram_similarity(a: Tokens, b: Tokens, q: int = 2) -> float:
    """1 - (profile L1 distance / total profile mass); 1 when both profiles empty."""
    pa, pb = qgram_profile(a, q), qgram_profile(b, q)
    total = sum(pa.values()) + sum(pb.values())
    if total == 0:
        return 1.0
    distance = sum(abs(pa[g] - pb[g]) for g in pa.keys() | pb.keys())
    return 1.0 - distance / total


# ---------------------------------------------------------------------------
# trace-level metrics


@dataclass(frozen=True)
class DiversityVector:
    """The six similarity scores between a synthetic trace and its reference."""

    lcs: float
    jaro: float
    cosine: float
    jaccard: float
    dice: float
    qgram: float

    _FIELDS = ("lcs", "jaro", "cosine", "jaccard", "dice", "qgram")

    def __post_init__(self):
        for name in self._FIELDS:
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self._FIELDS}


def diversity(synthetic: Trace, reference: Trace, q: int = 2) -> DiversityVector:
    """All six similarities for one synthetic/reference pair."""
    syn_chars = synthetic.rendered()
    ref_chars = reference.rendered()
    syn_tokens = synthetic.tokens()
    ref_tokens = reference.tokens()
    return DiversityVector(
        lcs=lcs_similarity(syn_chars, ref_chars),
        jaro=jaro_similarity(syn_chars, ref_chars),
        cosine=cosine_similarity(syn_tokens, ref_tokens),
        jaccard=jaccard_similarity(syn_tokens, ref_tokens),
        dice=dice_similarity(syn_tokens, ref_tokens),
        qgram=qgram_similarity(syn_tokens, ref_tokens, q),
    )


def hallucination(synthetic: Trace, reference: Trace, schema: MetamodelSchema) -> float:
    """Schema-valid additive events generated, relative to the reference.

    1.0 is ideal; above 1 means over-generation of plausible events, below 1
    means under-generation or schema-invalid (fictional) events. Only additive
    operations count; removals are deliberately ignored.
    """
    ref_additive = sum(1 for e in reference.events if e.event_type.is_additive)
    if ref_additive == 0:
        raise DegenerateReferenceError(
            f"reference trace {reference.id!r} has no additive events"
        )
    syn_valid = sum(
        1
        for e in synthetic.events
        if e.event_type.is_additive and validate_event_against_schema(e, schema).is_valid
    )
    return syn_valid / ref_additive


@dataclass(frozen=True)
class TraceQualityRow:
    trace_id: str
    reference_id: str
    correctness: float
    diversity: DiversityVector
    hallucination: float


@dataclass(frozen=True)
class QualityReport:
    """Per-trace quality rows plus per-metric summary statistics."""

    per_trace: tuple[TraceQualityRow, ...]
    summary: dict[str, stats.DescriptiveStats]

    METRIC_COLUMNS = ("correctness", "lcs", "jaro", "cosine", "jaccard", "dice", "qgram", "hallucination")


def _row_value(row: TraceQualityRow, column: str) -> float:
    if column in ("correctness", "hallucination"):
        return getattr(row, column)
    return getattr(row.diversity, column)


def assess_dataset(
    synthetic: TraceSet,
    reference: TraceSet,
    schema: MetamodelSchema,
    pairing: Mapping[str, str],
    *,
    q: int = 2,
    raw_texts: Mapping[str, str] | None = None,
) -> QualityReport:
    """Score every paired synthetic trace and summarize each metric column.

    ``pairing`` maps synthetic trace id to reference trace id and must cover
    every synthetic trace. ``raw_texts`` optionally supplies the uncleaned
    generation output per synthetic id; correctness falls back to the rendered
    trace text (which is 1 by construction) when absent.
    """
    rows: list[TraceQualityRow] = []
    for syn in synthetic:
        if syn.id not in pairing:
            raise UnpairedTraceError(syn.id)
        ref_id = pairing[syn.id]
        try:
            ref = reference.by_id(ref_id)
        except KeyError:
            raise UnpairedTraceError(ref_id) from None
        raw = raw_texts.get(syn.id) if raw_texts else None
        rows.append(
            TraceQualityRow(
                trace_id=syn.id,
                reference_id=ref_id,
                correctness=correctness(raw if raw is not None else syn.rendered()),
                diversity=diversity(syn, ref, q),
                hallucination=hallucination(syn, ref, schema),
            )
        )
    if not rows:
        raise UnpairedTraceError("<empty synthetic set>")
    summary = {
        column: stats.describe([_row_value(row, column) for row in rows])
        for column in QualityReport.METRIC_COLUMNS
    }
    return QualityReport(tuple(rows), summary)
