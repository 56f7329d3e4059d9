"""Pydantic request/response models for the HTTP service.

Field names mirror the dict shapes in `traceforge.serialize`; conversion to
core types goes through that module so there is exactly one wire format.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class ApiModel(BaseModel):
    model_config = ConfigDict(protected_namespaces=(), populate_by_name=True)


class EventModel(ApiModel):
    model_config = ConfigDict(protected_namespaces=(), populate_by_name=True)

    class_name: str = Field(alias="class")
    feature: str
    type: str
    timestamp: Optional[str] = None


class OriginModel(ApiModel):
    kind: Literal["human", "synthetic", "mixed"] = "human"
    generator_id: Optional[str] = None


class TraceModel(ApiModel):
    id: str
    model_id: str
    origin: OriginModel = OriginModel()
    events: list[EventModel]


class TraceSetModel(ApiModel):
    metamodel_id: str
    traces: list[TraceModel]


class DatasetModel(ApiModel):
    name: str
    synthetic_ratio: float
    seed: Optional[int] = None
    trace_set: TraceSetModel


class ClassFeaturesModel(ApiModel):
    features: dict[str, Literal["attribute", "reference"]]


class SchemaModel(ApiModel):
    id: str
    classes: dict[str, ClassFeaturesModel]


class RejectedLineModel(ApiModel):
    line: int
    reason: str


class ParseReportModel(ApiModel):
    accepted_events: int
    rejected_lines: list[RejectedLineModel]
    source: str


# ---------------------------------------------------------------------------
# /parse and /validate


class ParseRequest(ApiModel):
    content: str
    format: Literal["lines", "xes"] = "lines"
    strict: bool = False
    trace_id: str = "trace-1"
    origin: Optional[OriginModel] = None
    source: str = "<request>"
    xes_keys: Optional[dict[str, str]] = None  # remaps XES attribute keys


class ParseResponse(ApiModel):
    trace_set: TraceSetModel
    report: ParseReportModel


class ValidateRequest(ApiModel):
    content: Optional[str] = None  # raw event-line text ...
    trace_set: Optional[TraceSetModel] = None  # ... or an already-parsed set
    schema_def: SchemaModel = Field(alias="schema")


class EventValidityModel(ApiModel):
    event: str
    status: Literal["valid", "unknown_class", "unknown_feature"]
    feature_kind: Optional[Literal["attribute", "reference"]] = None


class TraceValidityModel(ApiModel):
    trace_id: str
    correctness: float
    events: list[EventValidityModel]


class ValidateResponse(ApiModel):
    correctness: float
    traces: list[TraceValidityModel]


# ---------------------------------------------------------------------------
# /metrics


class MetricsRequest(ApiModel):
    synthetic: TraceSetModel
    reference: TraceSetModel
    schema_def: SchemaModel = Field(alias="schema")
    pairing: dict[str, str]
    q: int = 2


class DescriptiveStatsModel(ApiModel):
    n: int
    mean: float
    se: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    median: float
    sd: float
    variance: float
    iqr: float


class DiversityModel(ApiModel):
    lcs: float
    jaro: float
    cosine: float
    jaccard: float
    dice: float
    qgram: float


class TraceQualityModel(ApiModel):
    trace_id: str
    reference_id: str
    correctness: float
    diversity: DiversityModel
    hallucination: float


class QualityReportModel(ApiModel):
    per_trace: list[TraceQualityModel]
    summary: dict[str, DescriptiveStatsModel]


# ---------------------------------------------------------------------------
# /generate


class LLMSettingsModel(ApiModel):
    endpoint: str
    model_name: str
    temperature: float = 0.2
    max_tokens: int = 2048
    json_response_path: str = "choices.0.message.content"
    timeout: float = 60.0
    retries: int = 2


class ModelSummaryModel(ApiModel):
    model_id: str
    metamodel_id: str
    description: str


class DemonstrationModel(ApiModel):
    model: ModelSummaryModel
    trace_text: str


class GenerateRequest(ApiModel):
    models: list[ModelSummaryModel]
    demos: list[DemonstrationModel]
    mock: bool = False
    seed: Optional[int] = None
    llm: Optional[LLMSettingsModel] = None
    instructions: Optional[str] = None
    format_note: Optional[str] = None
    prompt_template: Optional[str] = None
    shots: int = 2
    gate_threshold: float = 0.99
    retries: int = 0
    jobs: int = 1


class GenerationRecordModel(ApiModel):
    model_id: str
    prompt: str
    raw_response: str
    cleaned_trace: Optional[TraceModel] = None
    correctness: float
    accepted: bool
    generator_id: str
    elapsed: float
    attempt: int
    error: Optional[str] = None


class GenerateResponse(ApiModel):
    trace_set: TraceSetModel
    records: list[GenerationRecordModel]


# ---------------------------------------------------------------------------
# /mix, /train, /recommend


class MixRequest(ApiModel):
    human: TraceSetModel
    synthetic: TraceSetModel
    ratio: float
    seed: int
    name: Optional[str] = None


class TrainRequest(ApiModel):
    traces: TraceSetModel
    schema_def: SchemaModel = Field(alias="schema")
    seed: Optional[int] = None


class IndexBuildInfoModel(ApiModel):
    trained_at: str
    trace_count: int
    seed: Optional[int] = None


class IndexTraceModel(ApiModel):
    id: str
    events: list[EventModel]


class IndexModel(ApiModel):
    format: str
    version: int
    metamodel_id: str
    schema_def: SchemaModel = Field(alias="schema")
    build_info: IndexBuildInfoModel
    traces: list[IndexTraceModel]

    model_config = ConfigDict(protected_namespaces=(), populate_by_name=True)


class RecommendRequest(ApiModel):
    index: IndexModel
    context: str  # event-line text
    cr: float
    co: int
    k: int = 5
    kind: Literal["class", "attribute"]


class RecItemModel(ApiModel):
    class_name: str
    feature_name: str
    event_type: str
    score: float


class RecommendResponse(ApiModel):
    kind: Literal["class", "attribute"]
    items: list[RecItemModel]


# ---------------------------------------------------------------------------
# /evaluate and /xval


class GridModel(ApiModel):
    cr_levels: list[float] = [0.2, 0.4, 0.6]
    co_levels: list[int] = [1, 3, 5]


class EvaluateRequest(ApiModel):
    dataset: DatasetModel
    schema_def: SchemaModel = Field(alias="schema")
    grid: GridModel = GridModel()
    k: int = 5
    seed: int
    k_neighbors: int = 5


class EvalRowModel(ApiModel):
    dataset: str
    kind: str
    config: str
    fold: str
    precision: float
    recall: float
    f1: float


class EvalReportModel(ApiModel):
    dataset: str
    rows: list[EvalRowModel]
    timing: dict[str, float]
    build_info: dict


class XvalRequest(ApiModel):
    train: DatasetModel
    validation: DatasetModel
    schema_def: SchemaModel = Field(alias="schema")
    config: str = "C3.3"
    grid: GridModel = GridModel()
    k_neighbors: int = 5
    index: Optional[IndexModel] = None


class ErrorModel(ApiModel):
    error: str
    detail: str
