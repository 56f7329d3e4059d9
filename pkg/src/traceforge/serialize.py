"""JSON wire format for the domain types, CSV report rendering, and atomic
file writes. The dict shapes here are mirrored by the service's pydantic
models; field names must stay in sync with `traceforge.service.schemas`.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping

from . import stats
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
from .evaluation import EvalReport, EvalRow
from .quality import DiversityVector, QualityReport, TraceQualityRow
from .recommender import BuildInfo, RecommenderIndex, encode_events
from .synth import Demonstration, GenerationRecord, ModelSummary
from .xes import ParseReport

INDEX_FORMAT = "traceforge-index"
INDEX_VERSION = 1


def _parse_timestamp(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


# ---------------------------------------------------------------------------
# events / traces / datasets


def event_to_dict(event: ModelingEvent) -> dict:
    payload: dict[str, Any] = {
        "class": event.class_name,
        "feature": event.feature_name,
        "type": event.event_type.value,
    }
    if event.timestamp is not None:
        payload["timestamp"] = event.timestamp.isoformat(timespec="milliseconds")
    return payload


def event_from_dict(payload: Mapping) -> ModelingEvent:
    timestamp = payload.get("timestamp")
    return ModelingEvent(
        class_name=payload["class"],
        feature_name=payload["feature"],
        event_type=EventType.parse(payload["type"]),
        timestamp=_parse_timestamp(timestamp) if timestamp else None,
    )


def origin_to_dict(origin: TraceOrigin) -> dict:
    payload: dict[str, Any] = {"kind": origin.kind}
    if origin.generator_id is not None:
        payload["generator_id"] = origin.generator_id
    return payload


def origin_from_dict(payload: Mapping) -> TraceOrigin:
    return TraceOrigin(payload["kind"], payload.get("generator_id"))


def trace_to_dict(trace: Trace) -> dict:
    return {
        "id": trace.id,
        "model_id": trace.model_id,
        "origin": origin_to_dict(trace.origin),
        "events": [event_to_dict(e) for e in trace.events],
    }


def trace_from_dict(payload: Mapping) -> Trace:
    return Trace(
        id=payload["id"],
        model_id=payload["model_id"],
        events=tuple(event_from_dict(e) for e in payload["events"]),
        origin=origin_from_dict(payload.get("origin", {"kind": "human"})),
    )


def trace_set_to_dict(trace_set: TraceSet) -> dict:
    return {
        "metamodel_id": trace_set.metamodel_id,
        "traces": [trace_to_dict(t) for t in trace_set.traces],
    }


def trace_set_from_dict(payload: Mapping) -> TraceSet:
    return TraceSet(
        metamodel_id=payload["metamodel_id"],
        traces=tuple(trace_from_dict(t) for t in payload["traces"]),
    )


def dataset_to_dict(dataset: Dataset) -> dict:
    return {
        "name": dataset.name,
        "synthetic_ratio": dataset.synthetic_ratio,
        "seed": dataset.seed,
        "trace_set": trace_set_to_dict(dataset.trace_set),
    }


def dataset_from_dict(payload: Mapping) -> Dataset:
    return Dataset(
        name=payload["name"],
        trace_set=trace_set_from_dict(payload["trace_set"]),
        synthetic_ratio=payload["synthetic_ratio"],
        seed=payload.get("seed"),
    )


def schema_to_dict(schema: MetamodelSchema) -> dict:
    return {
        "id": schema.id,
        "classes": {
            name: {"features": {f: kind.value for f, kind in cdef.features.items()}}
            for name, cdef in schema.classes.items()
        },
    }


def schema_from_dict(payload: Mapping) -> MetamodelSchema:
    classes = {
        name: ClassDef(
            name=name,
            features={
                fname: FeatureKind(kind) for fname, kind in body.get("features", {}).items()
            },
        )
        for name, body in payload["classes"].items()
    }
    return MetamodelSchema(id=payload["id"], classes=classes)


def parse_report_to_dict(report: ParseReport) -> dict:
    return {
        "accepted_events": report.accepted_events,
        "rejected_lines": [{"line": n, "reason": reason} for n, reason in report.rejected_lines],
        "source": report.source,
    }


# ---------------------------------------------------------------------------
# prompting inputs


def model_summary_to_dict(model: ModelSummary) -> dict:
    return {
        "model_id": model.model_id,
        "metamodel_id": model.metamodel_id,
        "description": model.description,
    }


def model_summary_from_dict(payload: Mapping) -> ModelSummary:
    return ModelSummary(payload["model_id"], payload["metamodel_id"], payload["description"])


def demonstration_to_dict(demo: Demonstration) -> dict:
    return {"model": model_summary_to_dict(demo.model), "trace_text": demo.trace_text}


def demonstration_from_dict(payload: Mapping) -> Demonstration:
    return Demonstration(model_summary_from_dict(payload["model"]), payload["trace_text"])


def generation_record_to_dict(record: GenerationRecord) -> dict:
    return {
        "model_id": record.model_id,
        "prompt": record.prompt,
        "raw_response": record.raw_response,
        "cleaned_trace": trace_to_dict(record.cleaned_trace) if record.cleaned_trace else None,
        "correctness": record.correctness,
        "accepted": record.accepted,
        "generator_id": record.generator_id,
        "elapsed": record.elapsed,
        "attempt": record.attempt,
        "error": record.error,
    }


# ---------------------------------------------------------------------------
# statistics / quality reports


def descriptive_stats_to_dict(d: stats.DescriptiveStats) -> dict:
    return {
        "n": d.n,
        "mean": d.mean,
        "se": d.se,
        "ci_low": d.ci_low,
        "ci_high": d.ci_high,
        "median": d.median,
        "sd": d.sd,
        "variance": d.variance,
        "iqr": d.iqr,
    }


def test_result_to_dict(result: stats.TestResult, test: str) -> dict:
    row = {
        "test": test,
        "statistic": result.statistic,
        "df": result.df,
        "p": result.p_value,
        "alternative": result.alternative,
    }
    if result.df2 is not None:
        row["df2"] = result.df2
    return row


def quality_report_to_dict(report: QualityReport) -> dict:
    return {
        "per_trace": [
            {
                "trace_id": row.trace_id,
                "reference_id": row.reference_id,
                "correctness": row.correctness,
                "diversity": row.diversity.as_dict(),
                "hallucination": row.hallucination,
            }
            for row in report.per_trace
        ],
        "summary": {
            metric: descriptive_stats_to_dict(d) for metric, d in report.summary.items()
        },
    }


def quality_report_from_dict(payload: Mapping) -> QualityReport:
    rows = tuple(
        TraceQualityRow(
            trace_id=row["trace_id"],
            reference_id=row["reference_id"],
            correctness=row["correctness"],
            diversity=DiversityVector(**row["diversity"]),
            hallucination=row["hallucination"],
        )
        for row in payload["per_trace"]
    )
    summary = {
        metric: stats.DescriptiveStats(**body) for metric, body in payload["summary"].items()
    }
    return QualityReport(rows, summary)


def quality_report_to_csv(report: QualityReport) -> str:
    """One row per trace, then one summary block row per metric."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["trace_id", "reference_id", "correctness", "lcs", "jaro", "cosine", "jaccard", "dice", "qgram", "hallucination"]
    )
    for row in report.per_trace:
        d = row.diversity
        writer.writerow(
            [row.trace_id, row.reference_id, row.correctness, d.lcs, d.jaro, d.cosine, d.jaccard, d.dice, d.qgram, row.hallucination]
        )
    writer.writerow([])
    writer.writerow(["metric", "n", "mean", "se", "ci_low", "ci_high", "median", "sd", "variance", "iqr"])
    for metric, d in report.summary.items():
        writer.writerow([metric, d.n, d.mean, d.se, d.ci_low, d.ci_high, d.median, d.sd, d.variance, d.iqr])
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# evaluation reports


def eval_report_to_dict(report: EvalReport) -> dict:
    return {
        "dataset": report.dataset,
        "rows": [
            {
                "dataset": row.dataset,
                "kind": row.kind,
                "config": row.config,
                "fold": row.fold,
                "precision": row.precision,
                "recall": row.recall,
                "f1": row.f1,
            }
            for row in report.rows
        ],
        "timing": report.timing,
        "build_info": report.build_info,
    }


def eval_report_from_dict(payload: Mapping) -> EvalReport:
    return EvalReport(
        dataset=payload["dataset"],
        rows=tuple(
            EvalRow(
                dataset=row["dataset"],
                kind=row["kind"],
                config=row["config"],
                fold=row["fold"],
                precision=row["precision"],
                recall=row["recall"],
                f1=row["f1"],
            )
            for row in payload["rows"]
        ),
        timing=dict(payload.get("timing", {})),
        build_info=dict(payload.get("build_info", {})),
    )


def eval_report_to_csv(report: EvalReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["dataset", "kind", "config", "fold", "precision", "recall", "f1"])
    for row in report.rows:
        writer.writerow(
            [row.dataset, row.kind, row.config, row.fold,
             f"{row.precision:.6f}", f"{row.recall:.6f}", f"{row.f1:.6f}"]
        )
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# recommender index


def index_to_dict(index: RecommenderIndex) -> dict:
    return {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "metamodel_id": index.metamodel_id,
        "schema": schema_to_dict(index.schema),
        "build_info": {
            "trained_at": index.build_info.trained_at,
            "trace_count": index.build_info.trace_count,
            "seed": index.build_info.seed,
        },
        "traces": [
            {"id": trace_id, "events": [event_to_dict(e) for e in events]}
            for trace_id, events in index.event_store.items()
        ],
    }


def index_from_dict(payload: Mapping) -> RecommenderIndex:
    if payload.get("format") != INDEX_FORMAT:
        raise ValueError("not a traceforge index file")
    if payload.get("version") != INDEX_VERSION:
        raise ValueError(f"unsupported index version {payload.get('version')!r}")
    event_store = {
        entry["id"]: tuple(event_from_dict(e) for e in entry["events"])
        for entry in payload["traces"]
    }
    encodings = tuple(
        encode_events(trace_id, events) for trace_id, events in event_store.items()
    )
    info = payload["build_info"]
    return RecommenderIndex(
        metamodel_id=payload["metamodel_id"],
        encodings=encodings,
        event_store=event_store,
        schema=schema_from_dict(payload["schema"]),
        build_info=BuildInfo(info["trained_at"], info["trace_count"], info.get("seed")),
    )


# ---------------------------------------------------------------------------
# file helpers


def dumps(payload: object) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_text_atomic(path: str | Path, text: str) -> None:
    """Write via a temp file in the same directory plus rename, so a failed
    run never leaves a truncated file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_bytes_atomic(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path: str | Path, payload: object) -> None:
    write_text_atomic(path, dumps(payload))


def read_json(path: str | Path) -> Any:
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)
