"""HTTP service wrapping the core pipeline.

Every endpoint is a pure function over its request payload; there is no
shared mutable state, so the app can serve concurrent clients. Domain errors
map to 400 with a machine-readable body; 422 is pydantic's validation layer.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, quality, serialize, synth
from ..core import OperationKind, TraceOrigin, TraceSet, validate_event_against_schema
from ..errors import TraceForgeError
from ..evaluation import ConfigGrid, cross_dataset_eval, run_grid
from ..recommender import RecConfig, recommend, train
from ..xes import DEFAULT_KEYMAP, XesKeyMap, parse_event_lines, parse_xes
from . import schemas

app = FastAPI(title="traceforge", version=__version__)


@app.exception_handler(TraceForgeError)
async def domain_error_handler(request: Request, exc: TraceForgeError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.exception_handler(ValueError)
async def value_error_handler(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


def _origin(model: schemas.OriginModel | None) -> TraceOrigin | None:
    if model is None:
        return None
    return TraceOrigin(model.kind, model.generator_id)


@app.post("/parse", response_model=schemas.ParseResponse)
def parse_endpoint(request: schemas.ParseRequest):
    if request.format == "xes":
        try:
            keymap = XesKeyMap(**request.xes_keys) if request.xes_keys else DEFAULT_KEYMAP
        except TypeError as exc:
            return JSONResponse(
                status_code=400, content={"error": "UnknownXesKey", "detail": str(exc)}
            )
        trace_set, report = parse_xes(
            request.content,
            lenient=not request.strict,
            keymap=keymap,
            origin=_origin(request.origin),
            source=request.source,
        )
    else:
        trace, report = parse_event_lines(
            request.content,
            lenient=not request.strict,
            trace_id=request.trace_id,
            origin=_origin(request.origin),
            source=request.source,
        )
        trace_set = TraceSet(metamodel_id="unknown", traces=(trace,))
    return {
        "trace_set": serialize.trace_set_to_dict(trace_set),
        "report": serialize.parse_report_to_dict(report),
    }


@app.post("/validate", response_model=schemas.ValidateResponse)
def validate_endpoint(request: schemas.ValidateRequest):
    schema = serialize.schema_from_dict(request.schema_def.model_dump())
    if request.trace_set is not None:
        trace_set = serialize.trace_set_from_dict(request.trace_set.model_dump(by_alias=True))
        traces = list(trace_set.traces)
    elif request.content is not None:
        trace, _ = parse_event_lines(request.content, lenient=True)
        traces = [trace]
    else:
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": "provide content or trace_set"},
        )
    per_trace = []
    for trace in traces:
        checks = []
        for event in trace.events:
            result = validate_event_against_schema(event, schema)
            checks.append(
                {
                    "event": event.canonical(),
                    "status": result.status.value,
                    "feature_kind": result.feature_kind.value if result.feature_kind else None,
                }
            )
        source = trace.rendered() if request.trace_set is not None else request.content
        per_trace.append(
            {
                "trace_id": trace.id,
                "correctness": quality.correctness(source),
                "events": checks,
            }
        )
    overall = sum(row["correctness"] for row in per_trace) / len(per_trace) if per_trace else 1.0
    return {"correctness": overall, "traces": per_trace}


@app.post("/metrics", response_model=schemas.QualityReportModel)
def metrics_endpoint(request: schemas.MetricsRequest):
    report = quality.assess_dataset(
        synthetic=serialize.trace_set_from_dict(request.synthetic.model_dump(by_alias=True)),
        reference=serialize.trace_set_from_dict(request.reference.model_dump(by_alias=True)),
        schema=serialize.schema_from_dict(request.schema_def.model_dump()),
        pairing=request.pairing,
        q=request.q,
    )
    return serialize.quality_report_to_dict(report)


@app.post("/generate", response_model=schemas.GenerateResponse)
def generate_endpoint(request: schemas.GenerateRequest):
    models = [serialize.model_summary_from_dict(m.model_dump()) for m in request.models]
    demos = [serialize.demonstration_from_dict(d.model_dump()) for d in request.demos]
    if request.mock:
        client: synth.LLMClient = synth.MockLLMClient(seed=request.seed or 0)
    elif request.llm is not None:
        client = synth.HttpLLMClient(
            endpoint=request.llm.endpoint,
            model_name=request.llm.model_name,
            temperature=request.llm.temperature,
            max_tokens=request.llm.max_tokens,
            response_path=request.llm.json_response_path,
            timeout=request.llm.timeout,
            retries=request.llm.retries,
        )
    else:
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": "provide llm settings or set mock"},
        )
    settings = synth.GenerationSettings(
        instructions=request.instructions or synth.DEFAULT_INSTRUCTIONS,
        format_note=request.format_note or synth.DEFAULT_FORMAT_NOTE,
        prompt_template=request.prompt_template or synth.DEFAULT_PROMPT_TEMPLATE,
        shots=request.shots,
        gate_threshold=request.gate_threshold,
        retries=request.retries,
        jobs=request.jobs,
    )
    trace_set, records = synth.synthesize_dataset(models, demos, client, settings)
    return {
        "trace_set": serialize.trace_set_to_dict(trace_set),
        "records": [serialize.generation_record_to_dict(r) for r in records],
    }


@app.post("/mix", response_model=schemas.DatasetModel)
def mix_endpoint(request: schemas.MixRequest):
    dataset = synth.mix_datasets(
        human=serialize.trace_set_from_dict(request.human.model_dump(by_alias=True)),
        synthetic=serialize.trace_set_from_dict(request.synthetic.model_dump(by_alias=True)),
        synthetic_ratio=request.ratio,
        seed=request.seed,
        name=request.name,
    )
    return serialize.dataset_to_dict(dataset)


@app.post("/train", response_model=schemas.IndexModel)
def train_endpoint(request: schemas.TrainRequest):
    index = train(
        serialize.trace_set_from_dict(request.traces.model_dump(by_alias=True)),
        serialize.schema_from_dict(request.schema_def.model_dump()),
        seed=request.seed,
    )
    return serialize.index_to_dict(index)


@app.post("/recommend", response_model=schemas.RecommendResponse)
def recommend_endpoint(request: schemas.RecommendRequest):
    index = serialize.index_from_dict(request.index.model_dump(by_alias=True))
    context_trace, _ = parse_event_lines(request.context, lenient=True, trace_id="<context>")
    result = recommend(
        context_trace.events,
        index,
        RecConfig(cr=request.cr, co=request.co, k=request.k),
        OperationKind.parse(request.kind),
    )
    return {
        "kind": result.kind.value,
        "items": [
            {
                "class_name": item.class_name,
                "feature_name": item.feature_name,
                "event_type": item.event_type.value,
                "score": item.score,
            }
            for item in result.items
        ],
    }


@app.post("/evaluate", response_model=schemas.EvalReportModel)
def evaluate_endpoint(request: schemas.EvaluateRequest):
    report = run_grid(
        dataset=serialize.dataset_from_dict(request.dataset.model_dump(by_alias=True)),
        schema=serialize.schema_from_dict(request.schema_def.model_dump()),
        grid=ConfigGrid(tuple(request.grid.cr_levels), tuple(request.grid.co_levels)),
        k=request.k,
        seed=request.seed,
        k_neighbors=request.k_neighbors,
    )
    return serialize.eval_report_to_dict(report)


@app.post("/xval", response_model=schemas.EvalReportModel)
def xval_endpoint(request: schemas.XvalRequest):
    grid = ConfigGrid(tuple(request.grid.cr_levels), tuple(request.grid.co_levels))
    try:
        config = grid.lookup(request.config, request.k_neighbors)
    except KeyError as exc:
        return JSONResponse(
            status_code=400, content={"error": "UnknownConfig", "detail": str(exc)}
        )
    index = (
        serialize.index_from_dict(request.index.model_dump(by_alias=True))
        if request.index is not None
        else None
    )
    report = cross_dataset_eval(
        train_dataset=serialize.dataset_from_dict(request.train.model_dump(by_alias=True)),
        validation=serialize.dataset_from_dict(request.validation.model_dump(by_alias=True)),
        schema=serialize.schema_from_dict(request.schema_def.model_dump()),
        config=config,
        config_name=request.config,
        index=index,
    )
    return serialize.eval_report_to_dict(report)
