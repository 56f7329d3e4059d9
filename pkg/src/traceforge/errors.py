"""Exception hierarchy shared by all traceforge modules."""

from __future__ import annotations


class TraceForgeError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# domain types


class InvalidEventError(TraceForgeError):
    """Event fields violate the identifier rules."""


class InvalidTraceError(TraceForgeError):
    """Trace violates a structural invariant (empty, timestamp order, ...)."""


class InvalidSchemaError(TraceForgeError):
    """Metamodel schema is empty or contains duplicate names."""


class InvalidDatasetError(TraceForgeError):
    """Dataset bookkeeping does not match its traces."""


# ---------------------------------------------------------------------------
# parsing / serialization


class MalformedLineError(TraceForgeError):
    """A line does not match the event grammar (strict mode only)."""

    def __init__(self, line_no: int, line: str = ""):
        self.line_no = line_no
        self.line = line
        super().__init__(f"malformed event line {line_no}: {line!r}")


class EmptyTraceError(TraceForgeError):
    """Zero events could be parsed from the input."""


class XmlError(TraceForgeError):
    """Input is not well-formed XML."""


class MissingAttributeError(TraceForgeError):
    """An XES event lacks a required attribute (strict mode only)."""

    def __init__(self, key: str, event_ordinal: int):
        self.key = key
        self.event_ordinal = event_ordinal
        super().__init__(f"event #{event_ordinal} missing attribute {key!r}")


# ---------------------------------------------------------------------------
# quality metrics


class InvalidQError(TraceForgeError):
    """q-gram size must be a positive integer."""


class DegenerateReferenceError(TraceForgeError):
    """Reference trace has no additive events, hallucination is undefined."""


class UnpairedTraceError(TraceForgeError):
    """A synthetic trace has no reference partner in the pairing map."""

    def __init__(self, trace_id: str):
        self.trace_id = trace_id
        super().__init__(f"no pairing for trace {trace_id!r}")


# ---------------------------------------------------------------------------
# statistics


class EmptySampleError(TraceForgeError):
    """Statistic requested on an empty (or too small) sample."""


class DegenerateSampleError(TraceForgeError):
    """Sample has zero variance where positive variance is required."""


class TooFewGroupsError(TraceForgeError):
    """ANOVA requires at least two groups."""


# ---------------------------------------------------------------------------
# synthetic generation


class TransportError(TraceForgeError):
    """LLM endpoint unreachable after the configured retries."""


class AuthError(TraceForgeError):
    """LLM endpoint rejected the credentials."""


class GenerationTimeoutError(TraceForgeError):
    """LLM request exceeded its time budget."""


class IncompatibleMetamodelsError(TraceForgeError):
    """Trace sets to be mixed belong to different metamodels."""


class InsufficientTracesError(TraceForgeError):
    """Not enough traces on one side to realize the requested mix ratio."""


# ---------------------------------------------------------------------------
# recommender


class EmptyTrainingSetError(TraceForgeError):
    """Recommender training requires at least one trace."""


class EmptyContextError(TraceForgeError):
    """Recommendation requires a non-empty event context."""


class EmptyIndexError(TraceForgeError):
    """Recommendation requires a trained, non-empty index."""


# ---------------------------------------------------------------------------
# evaluation harness


class TooFewTracesError(TraceForgeError):
    """Dataset has fewer traces than requested folds."""


class NoScorableTracesError(TraceForgeError):
    """No test trace provided both a context and ground truth to score."""
