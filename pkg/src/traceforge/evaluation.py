"""Evaluation protocol: k-fold cross-validation over a CR/CO configuration
grid, class/attribute precision-recall-F1 rows, and cross-dataset validation.

Per-trace metrics are macro-averaged. For each test trace the first
ceil(CR * N) events (clamped to [1, N-1]) form the context; the remaining
events' triples of the requested kind are the ground truth. Traces with an
empty ground-truth set for a kind are skipped for recall and excluded from
that fold mean; every reported f1 is the harmonic mean of the precision and
recall of the same row.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

from .core import Dataset, MetamodelSchema, OperationKind, TraceSet, classify_operation
from .errors import NoScorableTracesError, TooFewTracesError
from .recommender import RecConfig, RecommenderIndex, recommend, train

KINDS = (OperationKind.CLASS_OP, OperationKind.ATTRIBUTE_OP)


@dataclass(frozen=True)
class ConfigGrid:
    """The nine named CR/CO cells: C<i>.<j> with i over cr_levels, j over co_levels."""

    cr_levels: tuple[float, float, float] = (0.2, 0.4, 0.6)
    co_levels: tuple[int, int, int] = (1, 3, 5)

    def __post_init__(self):
        object.__setattr__(self, "cr_levels", tuple(self.cr_levels))
        object.__setattr__(self, "co_levels", tuple(self.co_levels))
        if len(self.cr_levels) != 3 or len(self.co_levels) != 3:
            raise ValueError("grid needs exactly 3 CR levels and 3 CO levels")
        if any(a >= b for a, b in zip(self.cr_levels, self.cr_levels[1:])):
            raise ValueError("CR levels must be strictly increasing")
        if any(a >= b for a, b in zip(self.co_levels, self.co_levels[1:])):
            raise ValueError("CO levels must be strictly increasing")

    def cells(self, k: int = 5) -> list[tuple[str, RecConfig]]:
        return [
            (f"C{i}.{j}", RecConfig(cr=cr, co=co, k=k))
            for i, cr in enumerate(self.cr_levels, start=1)
            for j, co in enumerate(self.co_levels, start=1)
        ]

    def lookup(self, name: str, k: int = 5) -> RecConfig:
        for cell_name, config in self.cells(k):
            if cell_name == name:
                return config
        raise KeyError(f"no grid cell named {name!r}")


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def kfold_split(
    dataset: Dataset, k: int = 5, seed: int = 0
) -> list[tuple[TraceSet, TraceSet]]:
    """Seeded shuffle into k near-equal folds; each trace tests exactly once."""
    if k < 2:
        raise ValueError("k-fold validation needs k >= 2")
    traces = list(dataset.trace_set.traces)
    if len(traces) < k:
        raise TooFewTracesError(f"{len(traces)} traces cannot fill {k} folds")
    rng = random.Random(seed)
    shuffled = traces[:]
    rng.shuffle(shuffled)
    base, extra = divmod(len(shuffled), k)
    sizes = [base + 1 if i < extra else base for i in range(k)]
    folds: list[tuple[TraceSet, TraceSet]] = []
    start = 0
    metamodel_id = dataset.trace_set.metamodel_id
    for size in sizes:
        test = shuffled[start : start + size]
        training = shuffled[:start] + shuffled[start + size :]
        folds.append(
            (TraceSet(metamodel_id, tuple(training)), TraceSet(metamodel_id, tuple(test)))
        )
        start += size
    return folds


@dataclass(frozen=True)
class FoldMetrics:
    precision: float
    recall: float
    f1: float
    precision_traces: int
    recall_traces: int


def evaluate_fold(
    train_set: TraceSet,
    test_set: TraceSet,
    schema: MetamodelSchema,
    config: RecConfig,
    kind: OperationKind,
    *,
    index: RecommenderIndex | None = None,
) -> FoldMetrics:
    """Score one train/test split for one operation kind.

    Per-trace precision is hits over recommended items (1 when the
    recommender stays silent and nothing was expected, 0 when it stays silent
    wrongly); recall is hits over ground truth and is only averaged over
    traces whose ground truth is non-empty.
    """
    if index is None:
        index = train(train_set, schema)
    precisions: list[float] = []
    recalls: list[float] = []
    for trace in test_set:
        n = len(trace)
        if n < 2:
            continue
        context_len = min(max(1, math.ceil(config.cr * n)), n - 1)
        context = trace.events[:context_len]
        ground_truth = {
            e.triple()
            for e in trace.events[context_len:]
            if classify_operation(e, schema) is kind
        }
        recommended = [
            item.triple() for item in recommend(context, index, config, kind).items
        ]
        hits = set(recommended) & ground_truth
        if recommended:
            precisions.append(len(hits) / len(recommended))
        else:
            precisions.append(1.0 if not ground_truth else 0.0)
        if ground_truth:
            recalls.append(len(hits) / len(ground_truth))
    if not precisions or not recalls:
        raise NoScorableTracesError(
            f"no test trace yielded both a context and {kind.value} ground truth"
        )
    precision = fmean(precisions)
    recall = fmean(recalls)
    return FoldMetrics(precision, recall, f1_score(precision, recall), len(precisions), len(recalls))


@dataclass(frozen=True)
class EvalRow:
    dataset: str
    kind: str
    config: str
    fold: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    """Fold rows plus an `avg` pseudo-fold per (kind, config), in canonical order.

    The avg row's precision and recall are arithmetic means of the fold rows;
    its f1 is the harmonic mean of those averages. Timing and build metadata
    are carried separately so the row block stays byte-deterministic.
    """

    dataset: str
    rows: tuple[EvalRow, ...]
    timing: dict[str, float] = field(default_factory=dict)
    build_info: dict = field(default_factory=dict)


def _average_row(dataset: str, kind: str, config: str, fold_rows: Sequence[EvalRow]) -> EvalRow:
    precision = fmean(row.precision for row in fold_rows)
    recall = fmean(row.recall for row in fold_rows)
    return EvalRow(dataset, kind, config, "avg", precision, recall, f1_score(precision, recall))


def run_grid(
    dataset: Dataset,
    schema: MetamodelSchema,
    grid: ConfigGrid = ConfigGrid(),
    k: int = 5,
    seed: int = 0,
    *,
    k_neighbors: int = 5,
) -> EvalReport:
    """The full protocol: k folds x 9 configurations x both operation kinds."""
    folds = kfold_split(dataset, k, seed)
    indices: list[RecommenderIndex] = []
    train_times: list[float] = []
    for train_set, _ in folds:
        started = time.perf_counter()
        indices.append(train(train_set, schema, seed=seed))
        train_times.append(time.perf_counter() - started)

    rows: list[EvalRow] = []
    recommend_total = 0.0
    for kind in KINDS:
        for config_name, config in grid.cells(k_neighbors):
            fold_rows: list[EvalRow] = []
            for fold_no, (train_set, test_set) in enumerate(folds, start=1):
                started = time.perf_counter()
                metrics = evaluate_fold(
                    train_set, test_set, schema, config, kind, index=indices[fold_no - 1]
                )
                recommend_total += time.perf_counter() - started
                fold_rows.append(
                    EvalRow(
                        dataset.name,
                        kind.value,
                        config_name,
                        f"R{fold_no}",
                        metrics.precision,
                        metrics.recall,
                        metrics.f1,
                    )
                )
            rows.extend(fold_rows)
            rows.append(_average_row(dataset.name, kind.value, config_name, fold_rows))

    return EvalReport(
        dataset=dataset.name,
        rows=tuple(rows),
        timing={
            "train_per_fold": fmean(train_times),
            "recommend_total": recommend_total,
        },
        build_info={
            "k_folds": k,
            "seed": seed,
            "k_neighbors": k_neighbors,
            "cr_levels": list(grid.cr_levels),
            "co_levels": list(grid.co_levels),
            "trace_count": len(dataset.trace_set),
            "notes": "traces with empty ground truth for a kind are excluded from the recall mean",
        },
    )


def cross_dataset_eval(
    train_dataset: Dataset,
    validation: Dataset,
    schema: MetamodelSchema,
    config: RecConfig,
    *,
    config_name: str = "xval",
    index: RecommenderIndex | None = None,
) -> EvalReport:
    """Train once on one dataset, score every trace of another.

    Passing a pre-built ``index`` skips training entirely (pre-trained
    reuse); the validation traces are scored exactly as in a fold.
    """
    label = f"{train_dataset.name}->{validation.name}"
    train_time = 0.0
    if index is None:
        started = time.perf_counter()
        index = train(train_dataset.trace_set, schema, seed=train_dataset.seed)
        train_time = time.perf_counter() - started

    rows: list[EvalRow] = []
    recommend_total = 0.0
    for kind in KINDS:
        started = time.perf_counter()
        metrics = evaluate_fold(
            train_dataset.trace_set, validation.trace_set, schema, config, kind, index=index
        )
        recommend_total += time.perf_counter() - started
        row = EvalRow(
            label, kind.value, config_name, "val", metrics.precision, metrics.recall, metrics.f1
        )
        rows.append(row)
        rows.append(_average_row(label, kind.value, config_name, [row]))

    return EvalReport(
        dataset=label,
        rows=tuple(rows),
        timing={"train_per_fold": train_time, "recommend_total": recommend_total},
        build_info={
            "config": config_name,
            "cr": config.cr,
            "co": config.co,
            "k_neighbors": config.k,
            "train_traces": len(train_dataset.trace_set),
            "validation_traces": len(validation.trace_set),
            "pretrained_index": train_time == 0.0,
        },
    )
