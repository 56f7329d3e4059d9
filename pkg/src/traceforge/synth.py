"""Few-shot prompt construction, LLM clients, output cleaning, and the
quality gate that admits synthetic traces into datasets.

The prompt wording is a template with named placeholders, not a code
constant: it is an experimental variable. A deterministic mock client ships
in-repo so the whole pipeline runs offline.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import httpx

from . import quality
from .core import Dataset, Trace, TraceOrigin, TraceSet
from .errors import (
    AuthError,
    EmptyTraceError,
    GenerationTimeoutError,
    IncompatibleMetamodelsError,
    InsufficientTracesError,
    TransportError,
)
from .xes import line_matches_grammar, parse_event_lines

API_KEY_ENV = "TRACEFORGE_LLM_API_KEY"

DEFAULT_INSTRUCTIONS = (
    "You are emulating a designer working in a graphical model editor. "
    "Given a system description, produce the ordered sequence of modeling "
    "operations the designer would perform to build that model."
)
DEFAULT_FORMAT_NOTE = (
    "Answer with one operation per line, each line exactly of the form: "
    "event <class> <featureName> <eventType>"
)
DEFAULT_PROMPT_TEMPLATE = "{instructions}\n\n{demonstrations}MODEL: {target}\nTRACE:\n{format_note}\n"


@dataclass(frozen=True)
class ModelSummary:
    """Natural-language description of one model, used as the prompt target."""

    model_id: str
    metamodel_id: str
    description: str

    def __post_init__(self):
        if not self.description.strip():
            raise ValueError(f"model {self.model_id!r} has an empty description")


@dataclass(frozen=True)
class Demonstration:
    """An input/output example pair: a model and the trace that built it."""

    model: ModelSummary
    trace_text: str

    def __post_init__(self):
        if quality.correctness(self.trace_text) < 1.0:
            raise ValueError(
                f"demonstration for {self.model.model_id!r} has invalid event lines"
            )
        if not any(line.strip() for line in self.trace_text.splitlines()):
            raise ValueError(f"demonstration for {self.model.model_id!r} is empty")


@dataclass(frozen=True)
class PromptSpec:
    """Everything that goes into one few-shot prompt (never zero-shot)."""

    task_instructions: str
    demonstrations: tuple[Demonstration, ...]
    target: ModelSummary
    output_format_note: str

    def __post_init__(self):
        object.__setattr__(self, "demonstrations", tuple(self.demonstrations))
        if not self.demonstrations:
            raise ValueError("few-shot prompting needs at least one demonstration")


def build_prompt(spec: PromptSpec, template: str = DEFAULT_PROMPT_TEMPLATE) -> str:
    """Render the prompt text; byte-identical for identical specs."""
    demo_blocks = "".join(
        f"MODEL: {demo.model.description}\nTRACE:\n{demo.trace_text}"
        + ("" if demo.trace_text.endswith("\n") else "\n")
        + "\n"
        for demo in spec.demonstrations
    )
    return template.format(
        instructions=spec.task_instructions,
        demonstrations=demo_blocks,
        target=spec.target.description,
        format_note=spec.output_format_note,
    )


# ---------------------------------------------------------------------------
# LLM clients


class LLMClient(Protocol):
    generator_id: str

    def complete(self, prompt: str) -> str: ...


def _extract_json_path(payload: object, path: str) -> object:
    node = payload
    for segment in path.split("."):
        if isinstance(node, list):
            node = node[int(segment)]
        elif isinstance(node, dict):
            node = node[segment]
        else:
            raise KeyError(segment)
    return node


@dataclass
class HttpLLMClient:
    """POSTs a JSON completion request to a configurable endpoint.

    The bearer token comes from ``TRACEFORGE_LLM_API_KEY`` unless supplied;
    the completion text is pulled out of the response by a dot-separated JSON
    path. Transport failures are retried with backoff; auth failures and
    timeouts are not.
    """

    endpoint: str
    model_name: str
    temperature: float = 0.2
    max_tokens: int = 2048
    response_path: str = "choices.0.message.content"
    use_messages: bool = True
    timeout: float = 60.0
    retries: int = 2
    backoff: float = 0.5
    api_key: str | None = None
    transport: httpx.BaseTransport | None = None  # injectable for tests

    @property
    def generator_id(self) -> str:
        return self.model_name

    def _body(self, prompt: str) -> dict:
        body = {
            "model": self.model_name,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        if self.use_messages:
            body["messages"] = [{"role": "user", "content": prompt}]
        else:
            body["prompt"] = prompt
        return body

    def complete(self, prompt: str) -> str:
        key = self.api_key if self.api_key is not None else os.environ.get(API_KEY_ENV, "")
        headers = {"Authorization": f"Bearer {key}"} if key else {}
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                with httpx.Client(transport=self.transport, timeout=self.timeout) as client:
                    response = client.post(self.endpoint, json=self._body(prompt), headers=headers)
            except httpx.TimeoutException as exc:
                raise GenerationTimeoutError(f"request to {self.endpoint} timed out") from exc
            except httpx.HTTPError as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * (2**attempt))
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({response.status_code})")
            if response.status_code >= 500:
                last_error = TransportError(f"server error {response.status_code}")
                if attempt < self.retries:
                    time.sleep(self.backoff * (2**attempt))
                continue
            if response.status_code >= 400:
                raise TransportError(f"request failed with status {response.status_code}")
            try:
                text = _extract_json_path(response.json(), self.response_path)
            except (KeyError, IndexError, ValueError, json.JSONDecodeError) as exc:
                raise TransportError(
                    f"response has no text at path {self.response_path!r}"
                ) from exc
            if not isinstance(text, str):
                raise TransportError(f"value at {self.response_path!r} is not text")
            return text
        raise TransportError(
            f"endpoint {self.endpoint} unreachable after {self.retries + 1} attempts"
        ) from last_error


@dataclass
class MockLLMClient:
    """Offline stand-in: re-emits the demonstrations' event vocabulary.

    The reply is derived from the event lines found in the prompt itself with
    seeded perturbations (drops, duplicates, reordering of a suffix), wrapped
    in the kind of chatty text a real model produces so the cleaning stage has
    work to do. Deterministic per (seed, prompt).
    """

    seed: int = 0
    generator_id: str = "mock"

    def _rng_for(self, prompt: str) -> random.Random:
        digest = hashlib.sha256(f"{self.seed}:{prompt}".encode("utf-8")).hexdigest()
        return random.Random(int(digest[:16], 16))

    def complete(self, prompt: str) -> str:
        vocabulary = [line.strip() for line in prompt.splitlines() if line_matches_grammar(line)]
        rng = self._rng_for(prompt)
        if not vocabulary:
            return "I could not find any example operations to imitate."
        # aim for the average demonstration length, not the whole vocabulary
        demo_count = max(1, prompt.count("TRACE:") - 1)
        target_len = max(1, round(len(vocabulary) / demo_count * rng.uniform(0.8, 1.2)))
        lines = [rng.choice(vocabulary) for _ in range(target_len)]
        body = "\n".join(lines)
        return f"Here is the trace you asked for:\n```\n{body}\n```\nHope this helps!"


@dataclass
class ReplayClient:
    """Replays canned responses in order; the recorded-fixture client for tests."""

    responses: Sequence[str]
    generator_id: str = "replay"
    _cursor: int = field(default=0, init=False)

    def complete(self, prompt: str) -> str:
        if self._cursor >= len(self.responses):
            raise TransportError("replay client exhausted its canned responses")
        text = self.responses[self._cursor]
        self._cursor += 1
        return text


def generate(prompt: str, client: LLMClient) -> tuple[str, float]:
    """One completion call; returns the raw text and the elapsed seconds."""
    started = time.perf_counter()
    text = client.complete(prompt)
    return text, time.perf_counter() - started


# ---------------------------------------------------------------------------
# cleaning and gating


def clean(raw: str) -> str:
    """Normalize raw LLM output into event-line text.

    Keeps only lines whose first token (lower-cased) is `event`, drops code
    fences and prose, collapses whitespace runs, and upper-cases the event
    type token of well-formed lines. Idempotent; may yield empty text.
    """
    kept: list[str] = []
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("```"):
            continue
        tokens = stripped.split()
        if tokens[0].lower() != "event":
            continue
        if len(tokens) == 4:
            kept.append(f"event {tokens[1]} {tokens[2]} {tokens[3].upper()}")
        else:
            kept.append(" ".join(["event"] + tokens[1:]))
    if not kept:
        return ""
    return "\n".join(kept) + "\n"


@dataclass(frozen=True)
class GateResult:
    """Outcome of the correctness gate for one cleaned output."""

    accepted: bool
    correctness: float
    trace: Trace | None = None


def quality_gate(
    cleaned: str,
    threshold: float = 0.99,
    *,
    trace_id: str = "synthetic-1",
    model_id: str | None = None,
    generator_id: str = "llm",
) -> GateResult:
    """Admit the cleaned text iff its correctness meets the threshold and at
    least one event parses; admitted traces carry synthetic origin."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold {threshold} outside (0, 1]")
    score = quality.correctness(cleaned)
    if score < threshold:
        return GateResult(False, score)
    try:
        trace, _ = parse_event_lines(
            cleaned,
            lenient=True,
            trace_id=trace_id,
            model_id=model_id,
            origin=TraceOrigin.synthetic(generator_id),
        )
    except EmptyTraceError:
        return GateResult(False, score)
    return GateResult(True, score, trace)


# ---------------------------------------------------------------------------
# batch synthesis


@dataclass(frozen=True)
class GenerationSettings:
    instructions: str = DEFAULT_INSTRUCTIONS
    format_note: str = DEFAULT_FORMAT_NOTE
    prompt_template: str = DEFAULT_PROMPT_TEMPLATE
    shots: int = 2
    gate_threshold: float = 0.99
    retries: int = 0  # extra attempts for gate-rejected outputs
    jobs: int = 1

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("few-shot prompting needs shots >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True)
class GenerationRecord:
    """Audit row for one generation attempt."""

    model_id: str
    prompt: str
    raw_response: str
    cleaned_trace: Trace | None
    correctness: float
    accepted: bool
    generator_id: str
    elapsed: float
    attempt: int = 1
    error: str | None = None


def _generate_for_model(
    model: ModelSummary,
    demos: Sequence[Demonstration],
    client: LLMClient,
    settings: GenerationSettings,
) -> list[GenerationRecord]:
    spec = PromptSpec(
        task_instructions=settings.instructions,
        demonstrations=tuple(demos[: settings.shots]),
        target=model,
        output_format_note=settings.format_note,
    )
    prompt = build_prompt(spec, settings.prompt_template)
    generator_id = getattr(client, "generator_id", "llm")
    records: list[GenerationRecord] = []
    for attempt in range(1, settings.retries + 2):
        try:
            raw, elapsed = generate(prompt, client)
        except (TransportError, AuthError, GenerationTimeoutError) as exc:
            records.append(
                GenerationRecord(
                    model_id=model.model_id,
                    prompt=prompt,
                    raw_response="",
                    cleaned_trace=None,
                    correctness=0.0,
                    accepted=False,
                    generator_id=generator_id,
                    elapsed=0.0,
                    attempt=attempt,
                    error=f"{type(exc).__name__}: {exc}",
                )
            )
            break
        cleaned = clean(raw)
        gate = quality_gate(
            cleaned,
            settings.gate_threshold,
            trace_id=f"syn-{model.model_id}",
            model_id=model.model_id,
            generator_id=generator_id,
        )
        records.append(
            GenerationRecord(
                model_id=model.model_id,
                prompt=prompt,
                raw_response=raw,
                cleaned_trace=gate.trace,
                correctness=gate.correctness,
                accepted=gate.accepted,
                generator_id=generator_id,
                elapsed=elapsed,
                attempt=attempt,
            )
        )
        if gate.accepted:
            break
    return records


def synthesize_dataset(
    models: Sequence[ModelSummary],
    demos: Sequence[Demonstration],
    client: LLMClient,
    settings: GenerationSettings = GenerationSettings(),
) -> tuple[TraceSet, list[GenerationRecord]]:
    """Generate one synthetic trace per model through the clean/gate pipeline.

    Client errors for one model never abort the batch; they are recorded and
    the model is reported as failed. Records keep model list order. With
    ``settings.jobs > 1`` generation runs on a bounded thread pool; output is
    identical to the sequential run.
    """
    if not demos:
        raise ValueError("synthesize_dataset needs at least one demonstration")
    if not models:
        raise ValueError("synthesize_dataset needs at least one model")
    metamodel_ids = {m.metamodel_id for m in models}
    if len(metamodel_ids) > 1:
        raise IncompatibleMetamodelsError(f"models span metamodels {sorted(metamodel_ids)}")

    if settings.jobs == 1:
        per_model = [_generate_for_model(m, demos, client, settings) for m in models]
    else:
        with ThreadPoolExecutor(max_workers=settings.jobs) as pool:
            per_model = list(
                pool.map(lambda m: _generate_for_model(m, demos, client, settings), models)
            )

    records = [record for group in per_model for record in group]
    accepted = [r.cleaned_trace for r in records if r.accepted and r.cleaned_trace is not None]
    return TraceSet(metamodel_ids.pop(), tuple(accepted)), records


# ---------------------------------------------------------------------------
# dataset mixing


def mix_datasets(
    human: TraceSet,
    synthetic: TraceSet,
    synthetic_ratio: float,
    seed: int,
    *,
    name: str | None = None,
) -> Dataset:
    """Blend human and synthetic traces at the requested synthetic share.

    The human set is the reference population: the result has as many traces
    as the human set, of which round(ratio * n) are drawn from the synthetic
    side. Selection and final order are a seeded shuffle, deterministic per
    seed.
    """
    if human.metamodel_id != synthetic.metamodel_id:
        raise IncompatibleMetamodelsError(
            f"{human.metamodel_id!r} vs {synthetic.metamodel_id!r}"
        )
    if not 0.0 <= synthetic_ratio <= 1.0:
        raise ValueError(f"synthetic_ratio {synthetic_ratio} outside [0, 1]")
    total = len(human)
    if total == 0:
        raise InsufficientTracesError("human side is empty")
    n_synthetic = int(synthetic_ratio * total + 0.5)
    n_human = total - n_synthetic
    if n_synthetic > len(synthetic):
        raise InsufficientTracesError(
            f"need {n_synthetic} synthetic traces, only {len(synthetic)} available"
        )
    rng = random.Random(seed)
    chosen_human = rng.sample(list(human.traces), n_human)
    chosen_synthetic = rng.sample(list(synthetic.traces), n_synthetic)
    combined = chosen_human + chosen_synthetic
    rng.shuffle(combined)
    return Dataset(
        name=name or f"mix-{synthetic_ratio:g}",
        trace_set=TraceSet(human.metamodel_id, tuple(combined)),
        synthetic_ratio=n_synthetic / total,
        seed=seed,
    )
