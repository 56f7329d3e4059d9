"""Command-line client for the traceforge service.

The CLI is a thin client: it reads local files, calls the HTTP API, and
writes responses back to disk atomically. By default it talks to the service
in-process (no network, no running server); pass ``--server URL`` or set
``TRACEFORGE_SERVER`` to target a live instance.

Exit codes: 0 ok, 1 runtime error, 2 input/validation error. Errors are
printed to stderr as one JSON object.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import fixtures, serialize
from .config import LLMSettings, PipelineConfig, load_pipeline_config, resolve_config_path

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


class CliFailure(Exception):
    def __init__(self, code: int, error: str, detail: str):
        self.code = code
        self.error = error
        self.detail = detail
        super().__init__(detail)


def _fail(code: int, error: str, detail: str) -> "CliFailure":
    return CliFailure(code, error, detail)


class ServiceClient:
    """HTTP client bound either to a remote server or the in-process app."""

    def __init__(self, server: str | None):
        self._server = server
        self._client: httpx.Client | None = None

    def _ensure(self) -> httpx.Client:
        if self._client is None:
            if self._server:
                self._client = httpx.Client(base_url=self._server, timeout=300.0)
            else:
                import warnings

                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", DeprecationWarning)
                    from fastapi.testclient import TestClient

                from .service.app import app

                self._client = TestClient(app, raise_server_exceptions=False)
        return self._client

    def post(self, path: str, payload: dict) -> dict:
        try:
            response = self._ensure().post(path, json=payload)
        except httpx.HTTPError as exc:
            raise _fail(EXIT_RUNTIME, "TransportError", f"service unreachable: {exc}") from exc
        if response.status_code >= 500:
            raise _fail(EXIT_RUNTIME, "ServiceError", response.text)
        if response.status_code >= 400:
            try:
                body = response.json()
            except json.JSONDecodeError:
                body = {"error": "HTTPError", "detail": response.text}
            raise _fail(
                EXIT_INPUT,
                str(body.get("error", "HTTPError")),
                json.dumps(body.get("detail", body)),
            )
        return response.json()

    def close(self) -> None:
        if self._client is not None:
            self._client.close()


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(EXIT_INPUT, "FileError", f"cannot read {path}: {exc}") from exc


def _read_json(path: str) -> dict:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _fail(EXIT_INPUT, "JsonError", f"{path} is not valid JSON: {exc}") from exc


def _write_json(path: str | None, payload: object) -> None:
    if path is None:
        click.echo(serialize.dumps(payload), nl=False)
    else:
        serialize.write_json_atomic(path, payload)


@click.group()
@click.option("--server", envvar="TRACEFORGE_SERVER", default=None, metavar="URL",
              help="Service base URL; default runs the service in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Trace toolkit: parse, synthesize, score, and recommend modeling operations."""
    ctx.obj = ServiceClient(server)
    ctx.call_on_close(ctx.obj.close)


def _run(ctx: click.Context) -> ServiceClient:
    return ctx.obj


def _invoke(func):
    """Shared error rendering: failures become JSON on stderr + exit code."""

    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except CliFailure as exc:
            click.echo(json.dumps({"error": exc.error, "detail": exc.detail}), err=True)
            sys.exit(exc.code)

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


@main.command()
@click.argument("source", type=click.Path(exists=True))
@click.option("--xes", "fmt", flag_value="xes", help="Input is an XES log.")
@click.option("--lines", "fmt", flag_value="lines", help="Input is event-line text.")
@click.option("--strict", is_flag=True, help="Fail on the first malformed line.")
@click.option("--origin", type=click.Choice(["human", "synthetic", "mixed"]), default=None)
@click.option("--generator-id", default=None, help="Generator id for synthetic origin.")
@click.option("--trace-id", default="trace-1", show_default=True)
@click.option("--keys", "keys_path", type=click.Path(exists=True), default=None,
              help="JSON file remapping XES attribute keys (e.g. class_key).")
@click.option("-o", "--output", type=click.Path(), default=None, help="Trace-set JSON output.")
@click.option("--report", "report_path", type=click.Path(), default=None, help="ParseReport JSON output.")
@click.pass_context
@_invoke
def parse(ctx, source, fmt, strict, origin, generator_id, trace_id, keys_path, output, report_path):
    """Parse SOURCE into a normalized trace-set file plus a parse report."""
    content = _read_text(source)
    if fmt is None:
        fmt = "xes" if content.lstrip().startswith("<") else "lines"
    payload = {
        "content": content,
        "format": fmt,
        "strict": strict,
        "trace_id": trace_id,
        "source": source,
    }
    if keys_path:
        payload["xes_keys"] = _read_json(keys_path)
    if origin:
        payload["origin"] = {"kind": origin, "generator_id": generator_id}
    body = _run(ctx).post("/parse", payload)
    _write_json(output, body["trace_set"])
    if report_path:
        serialize.write_json_atomic(report_path, body["report"])
    rejected = body["report"]["rejected_lines"]
    click.echo(
        f"parsed {body['report']['accepted_events']} events, {len(rejected)} rejected",
        err=True,
    )


@main.command()
@click.argument("traces", type=click.Path(exists=True))
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
@_invoke
def validate(ctx, traces, schema_path, output):
    """Report grammar correctness and per-event schema validity for TRACES."""
    content = _read_text(traces)
    payload: dict = {"schema": _read_json(schema_path)}
    stripped = content.lstrip()
    if stripped.startswith("{"):
        payload["trace_set"] = json.loads(content)
    else:
        payload["content"] = content
    body = _run(ctx).post("/validate", payload)
    _write_json(output, body)
    click.echo(f"correctness {body['correctness']:.4f}", err=True)


@main.command()
@click.argument("synthetic", type=click.Path(exists=True))
@click.argument("reference", type=click.Path(exists=True))
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--pairs", "pairs_path", type=click.Path(exists=True), default=None,
              help="JSON map synthetic id -> reference id; defaults to pairing by model_id.")
@click.option("-q", "qgram_size", type=int, default=2, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None, help="QualityReport JSON.")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="QualityReport CSV.")
@click.pass_context
@_invoke
def metrics(ctx, synthetic, reference, schema_path, pairs_path, qgram_size, output, csv_path):
    """Score SYNTHETIC against REFERENCE: diversity, hallucination, statistics."""
    syn = _read_json(synthetic)
    ref = _read_json(reference)
    if pairs_path:
        pairing = _read_json(pairs_path)
    else:
        ref_by_model = {}
        for trace in ref["traces"]:
            if trace["model_id"] in ref_by_model:
                raise _fail(EXIT_INPUT, "AmbiguousPairing",
                            f"model {trace['model_id']} has several reference traces; use --pairs")
            ref_by_model[trace["model_id"]] = trace["id"]
        try:
            pairing = {t["id"]: ref_by_model[t["model_id"]] for t in syn["traces"]}
        except KeyError as exc:
            raise _fail(EXIT_INPUT, "UnpairedTrace",
                        f"no reference trace for model {exc}; use --pairs") from exc
    body = _run(ctx).post(
        "/metrics",
        {"synthetic": syn, "reference": ref, "schema": _read_json(schema_path),
         "pairing": pairing, "q": qgram_size},
    )
    _write_json(output, body)
    if csv_path:
        report = serialize.quality_report_from_dict(body)
        serialize.write_text_atomic(csv_path, serialize.quality_report_to_csv(report))
    means = {m: round(s["mean"], 4) for m, s in body["summary"].items()}
    click.echo(f"summary means: {json.dumps(means, sort_keys=True)}", err=True)


@main.command()
@click.argument("models", type=click.Path(exists=True))
@click.option("--demos", "demos_path", type=click.Path(exists=True), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--mock", is_flag=True, help="Use the offline deterministic mock client.")
@click.option("--seed", type=int, default=None, help="Seed; required with --mock.")
@click.option("--gate", "gate_threshold", type=float, default=None)
@click.option("--shots", type=int, default=2, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None, help="Synthetic trace-set JSON.")
@click.option("--records", "records_path", type=click.Path(), default=None,
              help="GenerationRecord audit JSON.")
@click.pass_context
@_invoke
def generate(ctx, models, demos_path, config_path, mock, seed, gate_threshold, shots, jobs,
             output, records_path):
    """Generate one synthetic trace per model in MODELS via few-shot prompting."""
    config = load_pipeline_config(config_path) if config_path else PipelineConfig()
    if seed is None:
        seed = config.seed
    if mock and seed is None:
        raise _fail(EXIT_INPUT, "MissingSeed", "--mock generation needs --seed (or config seed)")
    payload: dict = {
        "models": _read_json(models),
        "demos": _read_json(demos_path),
        "mock": mock,
        "seed": seed,
        "shots": shots,
        "jobs": jobs,
        "gate_threshold": gate_threshold if gate_threshold is not None else config.gate_threshold,
    }
    if config.prompt_template_path and config_path:
        template_file = resolve_config_path(Path(config_path), config.prompt_template_path)
        payload["prompt_template"] = template_file.read_text(encoding="utf-8")
    if not mock:
        llm: LLMSettings | None = config.llm
        if llm is None:
            raise _fail(EXIT_INPUT, "MissingLLM", "no llm settings in config; or pass --mock")
        payload["llm"] = {
            "endpoint": llm.endpoint,
            "model_name": llm.model_name,
            "temperature": llm.temperature,
            "max_tokens": llm.max_tokens,
            "json_response_path": llm.json_response_path,
            "timeout": llm.timeout,
            "retries": llm.retries,
        }
    body = _run(ctx).post("/generate", payload)
    _write_json(output, body["trace_set"])
    if records_path:
        serialize.write_json_atomic(records_path, body["records"])
    accepted = sum(1 for r in body["records"] if r["accepted"])
    click.echo(f"accepted {accepted}/{len(body['records'])} generations", err=True)


@main.command()
@click.argument("human", type=click.Path(exists=True))
@click.argument("synthetic", type=click.Path(exists=True))
@click.option("--ratio", type=float, required=True, help="Synthetic share of the result.")
@click.option("--seed", type=int, required=True)
@click.option("--name", default=None)
@click.option("-o", "--output", type=click.Path(), default=None, help="Dataset JSON.")
@click.pass_context
@_invoke
def mix(ctx, human, synthetic, ratio, seed, name, output):
    """Blend HUMAN and SYNTHETIC trace sets into a dataset at --ratio."""
    body = _run(ctx).post(
        "/mix",
        {"human": _read_json(human), "synthetic": _read_json(synthetic),
         "ratio": ratio, "seed": seed, "name": name},
    )
    _write_json(output, body)
    click.echo(f"mixed dataset {body['name']!r}: {len(body['trace_set']['traces'])} traces "
               f"(synthetic ratio {body['synthetic_ratio']:.2f})", err=True)


@main.command()
@click.argument("traces", type=click.Path(exists=True))
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--seed", type=int, default=None)
@click.option("-o", "--output", type=click.Path(), required=True, help="Index JSON file.")
@click.pass_context
@_invoke
def train(ctx, traces, schema_path, seed, output):
    """Train the recommender on TRACES and store the index."""
    body = _run(ctx).post(
        "/train",
        {"traces": _read_json(traces), "schema": _read_json(schema_path), "seed": seed},
    )
    _write_json(output, body)
    click.echo(f"trained on {body['build_info']['trace_count']} traces", err=True)


@main.command()
@click.argument("index", type=click.Path(exists=True))
@click.option("--context", "context_path", type=click.Path(exists=True), required=True,
              help="Event-line text file with the partial trace.")
@click.option("--cr", type=float, required=True, help="Context ratio (recorded with the result).")
@click.option("--co", type=int, required=True, help="Recommendation cutoff.")
@click.option("--k", type=int, default=5, show_default=True, help="Neighbor count.")
@click.option("--kind", type=click.Choice(["class", "attribute"]), required=True)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.pass_context
@_invoke
def recommend(ctx, index, context_path, cr, co, k, kind, output):
    """Recommend next operations for the context, using a trained INDEX."""
    body = _run(ctx).post(
        "/recommend",
        {"index": _read_json(index), "context": _read_text(context_path),
         "cr": cr, "co": co, "k": k, "kind": kind},
    )
    _write_json(output, body)


@main.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--grid", "grid_path", type=click.Path(exists=True), default=None,
              help="JSON file with cr_levels and co_levels.")
@click.option("--k", type=int, default=5, show_default=True, help="Folds.")
@click.option("--seed", type=int, required=True)
@click.option("--neighbors", type=int, default=5, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None, help="EvalReport JSON.")
@click.option("--csv", "csv_path", type=click.Path(), default=None, help="EvalReport CSV.")
@click.pass_context
@_invoke
def evaluate(ctx, dataset, schema_path, grid_path, k, seed, neighbors, output, csv_path):
    """Run the full k-fold, 9-configuration, class+attribute evaluation."""
    payload = {
        "dataset": _read_json(dataset),
        "schema": _read_json(schema_path),
        "k": k,
        "seed": seed,
        "k_neighbors": neighbors,
    }
    if grid_path:
        payload["grid"] = _read_json(grid_path)
    body = _run(ctx).post("/evaluate", payload)
    _write_json(output, body)
    if csv_path:
        report = serialize.eval_report_from_dict(body)
        serialize.write_text_atomic(csv_path, serialize.eval_report_to_csv(report))
    avg_rows = [r for r in body["rows"] if r["fold"] == "avg"]
    best = max(avg_rows, key=lambda r: r["f1"])
    click.echo(
        f"{len(body['rows'])} rows; best avg f1 {best['f1']:.3f} "
        f"({best['kind']} {best['config']})",
        err=True,
    )


@main.command()
@click.option("--train", "train_path", type=click.Path(exists=True), required=True)
@click.option("--validate", "validate_path", type=click.Path(exists=True), required=True)
@click.option("--schema", "schema_path", type=click.Path(exists=True), required=True)
@click.option("--config", "config_name", default="C3.3", show_default=True,
              help="Grid cell to use, e.g. C3.3.")
@click.option("--grid", "grid_path", type=click.Path(exists=True), default=None)
@click.option("--index", "index_path", type=click.Path(exists=True), default=None,
              help="Pre-trained index JSON to reuse instead of training.")
@click.option("--neighbors", type=int, default=5, show_default=True)
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--csv", "csv_path", type=click.Path(), default=None)
@click.pass_context
@_invoke
def xval(ctx, train_path, validate_path, schema_path, config_name, grid_path, index_path,
         neighbors, output, csv_path):
    """Train on one dataset and validate on another (cross-dataset protocol)."""
    payload = {
        "train": _read_json(train_path),
        "validation": _read_json(validate_path),
        "schema": _read_json(schema_path),
        "config": config_name,
        "k_neighbors": neighbors,
    }
    if grid_path:
        payload["grid"] = _read_json(grid_path)
    if index_path:
        payload["index"] = _read_json(index_path)
    body = _run(ctx).post("/xval", payload)
    _write_json(output, body)
    if csv_path:
        report = serialize.eval_report_from_dict(body)
        serialize.write_text_atomic(csv_path, serialize.eval_report_to_csv(report))


@main.command("fixtures")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--traces", "n_traces", type=int, default=20, show_default=True)
@_invoke
def fixtures_cmd(out_dir, seed, n_traces):
    """Write the bundled demo dataset (schema, traces, models, demos, pairs)."""
    out = Path(out_dir)
    trace_set = fixtures.demo_trace_set(n_traces, seed)
    serialize.write_json_atomic(out / "schema.json", serialize.schema_to_dict(fixtures.demo_schema()))
    serialize.write_json_atomic(out / "human_traces.json", serialize.trace_set_to_dict(trace_set))
    serialize.write_json_atomic(
        out / "dataset.json",
        serialize.dataset_to_dict(fixtures.demo_dataset(n_traces, seed)),
    )
    serialize.write_json_atomic(
        out / "models.json",
        [serialize.model_summary_to_dict(m) for m in fixtures.demo_models(trace_set)],
    )
    serialize.write_json_atomic(
        out / "demos.json",
        [serialize.demonstration_to_dict(d) for d in fixtures.demo_demonstrations(trace_set)],
    )
    serialize.write_json_atomic(out / "pairs.json", fixtures.demo_pairing(trace_set))
    click.echo(f"wrote demo fixtures to {out}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_invoke
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("traceforge.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
