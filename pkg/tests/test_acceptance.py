"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest tests/test_acceptance.py -s` to see them).

Tolerances are pinned here and nowhere else: exact for set metrics and forced
ratios, 1e-9 for real-valued similarity oracles, 1e-6 against the reference
statistics package, 1e-9 for the ANOVA/t-squared identity, 1e-8 for CDFs
against quadrature, 1e-12 for f1-harmonic consistency.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
import random
import time
from datetime import datetime, timedelta, timezone
from statistics import fmean

import pytest

from traceforge import quality, serialize
from traceforge import recommender as rec
from traceforge import stats as tf_stats
from traceforge.core import (
    ModelingEvent,
    OperationKind,
    Trace,
    TraceOrigin,
    TraceSet,
)
from traceforge.evaluation import ConfigGrid, f1_score, kfold_split, run_grid
from traceforge.fixtures import demo_dataset, demo_schema
from traceforge.synth import quality_gate
from traceforge.xes import parse_event_lines, parse_xes, render_event_lines, write_xes

from .conftest import ev, random_events, trace
from .test_quality import jaro_reference, lcs_brute_force
from .test_recommender import _schema_events, brute_force_recommend


def criterion(number: int, label: str):
    def decorate(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                result = func(*args, **kwargs)
            except BaseException:
                print(f"[acceptance] criterion {number} FAIL - {label}", flush=True)
                raise
            print(f"[acceptance] criterion {number} PASS - {label}", flush=True)
            return result

        return wrapper

    return decorate


# --- independent naive references for criterion 1 ---


def cosine_reference(a, b):
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    ca, cb = {}, {}
    for x in a:
        ca[x] = ca.get(x, 0) + 1
    for x in b:
        cb[x] = cb.get(x, 0) + 1
    if ca == cb:
        return 1.0
    dot = sum(ca[k] * cb.get(k, 0) for k in ca)
    return min(1.0, dot / (math.sqrt(sum(v * v for v in ca.values())) * math.sqrt(sum(v * v for v in cb.values()))))


def jaccard_reference(a, b):
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def dice_reference(a, b):
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    if not sa or not sb:
        return 0.0
    return 2 * len(sa & sb) / (len(sa) + len(sb))


def qgram_reference(a, b, q=2):
    def profile(seq):
        grams = {}
        for i in range(len(seq) - q + 1):
            g = tuple(seq[i : i + q])
            grams[g] = grams.get(g, 0) + 1
        return grams

    pa, pb = profile(list(a)), profile(list(b))
    total = sum(pa.values()) + sum(pb.values())
    if total == 0:
        return 1.0
    keys = set(pa) | set(pb)
    return 1.0 - sum(abs(pa.get(k, 0) - pb.get(k, 0)) for k in keys) / total


@criterion(1, "similarity metrics match independent oracles on 1000 random pairs")
def test_criterion_1_metric_oracles():
    rng = random.Random(101)
    started = time.perf_counter()
    alphabet = "abcdefgh"
    for _ in range(1000):
        a = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
        b = [rng.choice(alphabet) for _ in range(rng.randint(0, 12))]
        assert quality.lcs_similarity(a, b) == pytest.approx(lcs_brute_force(a, b), abs=1e-9)
        assert quality.jaro_similarity(a, b) == pytest.approx(jaro_reference(a, b), abs=1e-9)
        assert quality.cosine_similarity(a, b) == pytest.approx(cosine_reference(a, b), abs=1e-9)
        assert quality.jaccard_similarity(a, b) == jaccard_reference(a, b)
        assert quality.dice_similarity(a, b) == dice_reference(a, b)
        assert quality.qgram_similarity(a, b, 2) == pytest.approx(qgram_reference(a, b, 2), abs=1e-9)
    assert time.perf_counter() - started < 60


@criterion(2, "correctness ratios are exact and the 0.99 gate filters as specified")
def test_criterion_2_correctness_gate():
    all_valid = "event A b SET\nevent A b ADD\nevent C d REMOVE\nevent C d MOVE\n"
    three_of_four = "event A b SET\nnot an event\nevent A b ADD\nevent C d REMOVE\n"
    half = "event A b SET\nbroken\n"
    assert quality.correctness(all_valid) == 1.0
    assert quality.correctness(three_of_four) == 0.75
    assert quality.correctness(half) == 0.5

    assert quality_gate(all_valid, 0.99).accepted
    rejected = quality_gate(half, 0.99)
    assert not rejected.accepted
    assert rejected.correctness == 0.5


@criterion(3, "hallucination fixtures are exact and summaries carry all report columns")
def test_criterion_3_hallucination():
    schema = demo_schema()
    identical = trace("t", [ev("Process", "name", "SET"), ev("System", "processes", "ADD")])
    assert quality.hallucination(identical, identical, schema) == 1.0

    reference = trace("r", [ev("Process", "name", "SET")] * 4)
    synthetic = trace(
        "s",
        [ev("Process", "name", "SET")] * 3
        + [ev("System", "processes", "ADD"), ev("Port", "direction", "SET")]
        + [ev("FictionalThing", "name", "SET")],
    )
    assert quality.hallucination(synthetic, reference, schema) == 1.25

    # corpus-level summary has every column of the report layout
    ref_set = TraceSet("procnet", (reference,))
    syn_set = TraceSet(
        "procnet", (Trace("s", "r", synthetic.events, TraceOrigin.synthetic("g")),)
    )
    report = quality.assess_dataset(syn_set, ref_set, schema, {"s": "r"})
    row = serialize.descriptive_stats_to_dict(report.summary["hallucination"])
    assert set(row) == {"n", "mean", "se", "ci_low", "ci_high", "median", "sd", "variance", "iqr"}


@criterion(4, "t tests, Welch ANOVA, and distribution tails match references")
def test_criterion_4_stats():
    scipy_stats = pytest.importorskip("scipy.stats")
    integrate = pytest.importorskip("scipy.integrate")
    oneway = pytest.importorskip("statsmodels.stats.oneway")

    rng = random.Random(7)
    for _ in range(25):
        xs = [rng.gauss(1, 2) for _ in range(rng.randint(3, 15))]
        mu0 = rng.uniform(-1, 2)
        ours = tf_stats.one_sample_t_test(xs, mu0)
        ref = scipy_stats.ttest_1samp(xs, mu0)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-6)
        assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-6)

        a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 12))]
        b = [rng.gauss(0.4, 1.7) for _ in range(rng.randint(2, 12))]
        ours_t = tf_stats.welch_t_test(a, b)
        ref_t = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert ours_t.statistic == pytest.approx(ref_t.statistic, abs=1e-6)
        assert ours_t.p_value == pytest.approx(ref_t.pvalue, abs=1e-6)

        groups = [
            [rng.gauss(mu, 1 + mu) for _ in range(rng.randint(3, 9))] for mu in (0.0, 0.3, 1.0)
        ]
        ours_f = tf_stats.welch_anova(groups)
        ref_f = oneway.anova_oneway(groups, use_var="unequal", welch_correction=True)
        assert ours_f.statistic == pytest.approx(float(ref_f.statistic), abs=1e-6)
        assert ours_f.p_value == pytest.approx(float(ref_f.pvalue), abs=1e-6)

        # two-group ANOVA is the squared Welch t
        anova2 = tf_stats.welch_anova([a, b])
        assert anova2.statistic == pytest.approx(ours_t.statistic**2, abs=1e-9)
        assert anova2.p_value == pytest.approx(ours_t.p_value, abs=1e-9)

    def t_pdf(x, df):
        return (
            math.gamma((df + 1) / 2)
            / (math.sqrt(df * math.pi) * math.gamma(df / 2))
            * (1 + x * x / df) ** (-(df + 1) / 2)
        )

    def f_pdf(x, d1, d2):
        if x <= 0:
            return 0.0
        num = (d1 * x) ** d1 * d2**d2 / (d1 * x + d2) ** (d1 + d2)
        beta = math.gamma(d1 / 2) * math.gamma(d2 / 2) / math.gamma((d1 + d2) / 2)
        return math.sqrt(num) / (x * beta)

    for df in (1, 3.5, 9, 24):
        for x in (-3.0, -0.8, 0.0, 1.2, 4.0):
            numeric, _ = integrate.quad(t_pdf, -math.inf, x, args=(df,), limit=500)
            assert tf_stats.t_cdf(x, df) == pytest.approx(numeric, abs=1e-8)
    for d1, d2 in ((2, 5), (4.5, 3), (1, 10)):
        for x in (0.2, 1.0, 2.5, 7.0):
            numeric, _ = integrate.quad(f_pdf, 0, x, args=(d1, d2), limit=400)
            assert tf_stats.f_cdf(x, d1, d2) == pytest.approx(numeric, abs=1e-8)


@criterion(5, "recommender equals the brute-force reference on 50 random indices")
def test_criterion_5_recommender_oracle(two_class_schema):
    for seed in range(50):
        rng = random.Random(1000 + seed)
        traces = tuple(
            trace(f"t{i}", _schema_events(rng, rng.randint(1, 20)))
            for i in range(rng.randint(1, 10))
        )
        index = rec.train(TraceSet("pair", traces), two_class_schema)
        context = _schema_events(rng, rng.randint(1, 8))
        config = rec.RecConfig(
            cr=rng.choice([0.2, 0.4, 0.6]),
            co=rng.choice([1, 3, 5, 10]),
            k=rng.choice([1, 3, 5, 10]),
        )
        kind = rng.choice([OperationKind.CLASS_OP, OperationKind.ATTRIBUTE_OP])
        ours = rec.recommend(context, index, config, kind)
        expected = brute_force_recommend(
            context, traces, two_class_schema, config.co, config.k, kind
        )
        assert [i.triple() for i in ours.items] == [t for t, _ in expected]
        for item, (_, score) in zip(ours.items, expected):
            assert item.score == pytest.approx(score, abs=1e-12)

        # determinism: three repeated runs, byte-identical
        renders = {repr(rec.recommend(context, index, config, kind)) for _ in range(3)}
        assert len(renders) == 1


@criterion(6, "harness: fold partitions, f1 consistency, CO-monotone recall, report shape")
def test_criterion_6_harness():
    dataset = demo_dataset()
    for seed in range(100):
        folds = kfold_split(dataset, k=5, seed=seed)
        seen: list[str] = []
        for training, test in folds:
            assert not {t.id for t in test} & {t.id for t in training}
            seen.extend(t.id for t in test)
        assert sorted(seen) == sorted(t.id for t in dataset.trace_set)

    started = time.perf_counter()
    report = run_grid(dataset, demo_schema(), ConfigGrid(), k=5, seed=3)
    elapsed = time.perf_counter() - started
    assert elapsed < 10

    fold_rows = [r for r in report.rows if r.fold != "avg"]
    assert len(fold_rows) == 9 * 5 * 2
    assert len(report.rows) == 9 * 6 * 2

    for row in report.rows:
        assert abs(row.f1 - f1_score(row.precision, row.recall)) <= 1e-12

    for kind in ("class", "attribute"):
        for config, rows in itertools.groupby(
            [r for r in report.rows if r.kind == kind and r.fold == "avg"],
            key=lambda r: r.config[:2],
        ):
            recalls = [r.recall for r in rows]
            assert recalls == sorted(recalls)

    for kind in ("class", "attribute"):
        for name in [n for n, _ in ConfigGrid().cells()]:
            rows = [r for r in report.rows if r.kind == kind and r.config == name and r.fold != "avg"]
            avg = next(r for r in report.rows if r.kind == kind and r.config == name and r.fold == "avg")
            assert abs(avg.precision - fmean(r.precision for r in rows)) <= 1e-12
            assert abs(avg.recall - fmean(r.recall for r in rows)) <= 1e-12


@criterion(7, "offline pipeline: generate -> metrics -> mix -> evaluate, deterministic, < 60 s")
def test_criterion_7_end_to_end(tmp_path):
    from click.testing import CliRunner

    from traceforge.cli import main

    runner = CliRunner()
    started = time.perf_counter()

    def run(args):
        result = runner.invoke(main, args)
        assert result.exit_code == 0, f"{args}: {result.stderr or result.output}"
        return result

    artifacts = {}
    for tag in ("one", "two"):
        base = tmp_path / tag
        fx = base / "fx"
        run(["fixtures", "--out", str(fx)])
        run(
            ["generate", str(fx / "models.json"), "--demos", str(fx / "demos.json"),
             "--mock", "--seed", "42", "-o", str(base / "syn.json")]
        )
        run(
            ["metrics", str(base / "syn.json"), str(fx / "human_traces.json"),
             "--schema", str(fx / "schema.json"), "-o", str(base / "quality.json")]
        )
        run(
            ["mix", str(fx / "human_traces.json"), str(base / "syn.json"),
             "--ratio", "0.5", "--seed", "11", "-o", str(base / "mixed.json")]
        )
        run(
            ["evaluate", str(base / "mixed.json"), "--schema", str(fx / "schema.json"),
             "--seed", "3", "-o", str(base / "eval.json"), "--csv", str(base / "eval.csv")]
        )
        artifacts[tag] = {
            "syn": (base / "syn.json").read_bytes(),
            "mixed": (base / "mixed.json").read_bytes(),
            "csv": (base / "eval.csv").read_bytes(),
            "rows": json.loads((base / "eval.json").read_text())["rows"],
        }

    assert artifacts["one"]["syn"] == artifacts["two"]["syn"]
    assert artifacts["one"]["mixed"] == artifacts["two"]["mixed"]
    assert artifacts["one"]["csv"] == artifacts["two"]["csv"]
    assert artifacts["one"]["rows"] == artifacts["two"]["rows"]
    assert len(artifacts["one"]["rows"]) == 108
    assert time.perf_counter() - started < 60


@criterion(8, "XES and line round-trips preserve events and timestamps on 500 trace sets")
def test_criterion_8_round_trips():
    base = datetime(2024, 1, 1, tzinfo=timezone.utc)
    for seed in range(250):
        rng = random.Random(seed)
        traces = []
        for i in range(rng.randint(1, 5)):
            events = [
                ModelingEvent(
                    e.class_name,
                    e.feature_name,
                    e.event_type,
                    timestamp=base + timedelta(seconds=j, milliseconds=rng.randint(0, 999)),
                )
                for j, e in enumerate(random_events(rng, rng.randint(1, 8)))
            ]
            origin = TraceOrigin.synthetic("g") if rng.random() < 0.4 else TraceOrigin.human()
            traces.append(Trace(f"t{i}", f"m{i}", tuple(events), origin))
        ts = TraceSet(f"mm{seed % 5}", tuple(traces))
        restored, report = parse_xes(write_xes(ts))
        assert report.rejected_count == 0
        assert restored.metamodel_id == ts.metamodel_id
        for original, back in zip(ts, restored):
            assert back.id == original.id
            assert back.origin == original.origin
            assert list(back.events) == list(original.events)

    for seed in range(250):
        rng = random.Random(10_000 + seed)
        t = trace("t", random_events(rng, rng.randint(1, 25)))
        parsed, _ = parse_event_lines(render_event_lines(t))
        assert list(parsed.events) == list(t.events)
