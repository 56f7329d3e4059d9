"""traceforge: record, synthesize, score, and recommend modeling-operation traces."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    Dataset,
    EventType,
    FeatureKind,
    MetamodelSchema,
    ModelingEvent,
    OperationKind,
    Trace,
    TraceOrigin,
    TraceSet,
    classify_operation,
    validate_event_against_schema,
)
from .errors import TraceForgeError  # noqa: F401
