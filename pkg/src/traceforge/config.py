"""Pipeline configuration file: a single JSON document, overridable by CLI
flags. Paths referenced by the config must exist when it is loaded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class LLMSettings:
    endpoint: str
    model_name: str
    temperature: float = 0.2
    max_tokens: int = 2048
    json_response_path: str = "choices.0.message.content"
    timeout: float = 60.0
    retries: int = 2


@dataclass(frozen=True)
class PipelineConfig:
    schema_path: str | None = None
    dataset_paths: dict[str, str] = field(default_factory=dict)
    llm: LLMSettings | None = None
    prompt_template_path: str | None = None
    gate_threshold: float = 0.99
    cr_levels: tuple[float, ...] = (0.2, 0.4, 0.6)
    co_levels: tuple[int, ...] = (1, 3, 5)
    k_folds: int = 5
    seed: int | None = None
    output_dir: str = "."


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    """Read and validate a config file; missing referenced paths are an error."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)

    llm = None
    if raw.get("llm"):
        llm = LLMSettings(**raw["llm"])
    grid = raw.get("grid", {})
    config = PipelineConfig(
        schema_path=raw.get("schema_path"),
        dataset_paths=dict(raw.get("dataset_paths", {})),
        llm=llm,
        prompt_template_path=raw.get("prompt_template_path"),
        gate_threshold=raw.get("gate_threshold", 0.99),
        cr_levels=tuple(grid.get("cr_levels", (0.2, 0.4, 0.6))),
        co_levels=tuple(grid.get("co_levels", (1, 3, 5))),
        k_folds=raw.get("k_folds", 5),
        seed=raw.get("seed"),
        output_dir=raw.get("output_dir", "."),
    )

    base = path.parent
    referenced = [config.schema_path, config.prompt_template_path, *config.dataset_paths.values()]
    for ref in referenced:
        if ref is None:
            continue
        resolved = Path(ref)
        if not resolved.is_absolute():
            resolved = base / resolved
        if not resolved.exists():
            raise FileNotFoundError(f"config references missing path: {ref}")
    return config


def resolve_config_path(config_path: Path, ref: str) -> Path:
    resolved = Path(ref)
    return resolved if resolved.is_absolute() else config_path.parent / resolved
