"""Descriptive statistics and the hypothesis tests used by the reports.

Tail probabilities for the t and F distributions are computed from the
regularized incomplete beta function, evaluated with a continued fraction
(modified Lentz) to 1e-12 relative tolerance. No external numerics are
required at runtime; the test suite checks these against quadrature and a
reference statistical package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .errors import DegenerateSampleError, EmptySampleError, TooFewGroupsError

Alternative = Literal["two_sided", "greater", "less"]

_CF_TOL = 1e-12
_CF_MAX_ITER = 500


# ---------------------------------------------------------------------------
# distribution machinery


def _beta_continued_fraction(x: float, a: float, b: float) -> float:
    """Continued-fraction factor of the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        num = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        num = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + num * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + num / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for x={x}, a={a}, b={b}")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x={x} outside [0, 1]")
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # use the representation that converges fast
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(x, a, b) / a
    return 1.0 - front * _beta_continued_fraction(1.0 - x, b, a) / b


def t_cdf(x: float, df: float) -> float:
    """CDF of Student's t with ``df`` (possibly fractional) degrees of freedom."""
    if df <= 0:
        raise ValueError("df must be positive")
    if x == 0.0:
        return 0.5
    z = df / (df + x * x)
    tail = 0.5 * regularized_incomplete_beta(z, df / 2.0, 0.5)
    return 1.0 - tail if x > 0 else tail


def t_sf(x: float, df: float) -> float:
    """Upper tail of Student's t; evaluated directly for x > 0 to keep precision."""
    if x <= 0:
        return 1.0 - t_cdf(x, df)
    return 0.5 * regularized_incomplete_beta(df / (df + x * x), df / 2.0, 0.5)


def f_cdf(x: float, df1: float, df2: float) -> float:
    """CDF of the F distribution."""
    if df1 <= 0 or df2 <= 0:
        raise ValueError("degrees of freedom must be positive")
    if x <= 0:
        return 0.0
    return regularized_incomplete_beta(df1 * x / (df1 * x + df2), df1 / 2.0, df2 / 2.0)


def f_sf(x: float, df1: float, df2: float) -> float:
    """Upper tail of the F distribution."""
    if x <= 0:
        return 1.0
    return regularized_incomplete_beta(df2 / (df2 + df1 * x), df2 / 2.0, df1 / 2.0)


def t_ppf(p: float, df: float) -> float:
    """Quantile of Student's t, by bisection on the CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} outside (0, 1)")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_ppf(1.0 - p, df)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("t quantile bracket exhausted")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# descriptive statistics


@dataclass(frozen=True)
class DescriptiveStats:
    """The summary columns reported per metric.

    For n == 1 the standard error and confidence bounds are undefined and
    reported as absent; sd/variance/iqr degrade to 0 by convention so a
    single-row summary still renders.
    """

    n: int
    mean: float
    se: float | None
    ci_low: float | None
    ci_high: float | None
    median: float
    sd: float
    variance: float
    iqr: float


def quantile(sorted_samples: Sequence[float], q: float) -> float:
    """Linear-interpolation (type-7) quantile of pre-sorted samples."""
    if not sorted_samples:
        raise EmptySampleError("quantile of empty sample")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q={q} outside [0, 1]")
    n = len(sorted_samples)
    if n == 1:
        return float(sorted_samples[0])
    h = (n - 1) * q
    lo = math.floor(h)
    frac = h - lo
    if lo + 1 >= n:
        return float(sorted_samples[-1])
    return sorted_samples[lo] + frac * (sorted_samples[lo + 1] - sorted_samples[lo])


def describe(samples: Sequence[float], confidence: float = 0.95) -> DescriptiveStats:
    """Mean, spread, and a t-based confidence interval for the mean.

    The interval uses the t distribution with n-1 degrees of freedom; median
    and IQR use type-7 quantiles.
    """
    n = len(samples)
    if n == 0:
        raise EmptySampleError("describe of empty sample")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence={confidence} outside (0, 1)")
    mean = math.fsum(samples) / n
    ordered = sorted(samples)
    median = quantile(ordered, 0.5)
    iqr = quantile(ordered, 0.75) - quantile(ordered, 0.25)
    if n == 1:
        return DescriptiveStats(n, mean, None, None, None, median, 0.0, 0.0, iqr)
    variance = math.fsum((x - mean) ** 2 for x in samples) / (n - 1)
    sd = math.sqrt(variance)
    se = sd / math.sqrt(n)
    half_width = t_ppf(0.5 + confidence / 2.0, n - 1) * se
    return DescriptiveStats(
        n, mean, se, mean - half_width, mean + half_width, median, sd, variance, iqr
    )


# ---------------------------------------------------------------------------
# hypothesis tests


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: float
    p_value: float
    alternative: Alternative
    df2: float | None = None  # denominator df (ANOVA only)

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")


def _t_p_value(t: float, df: float, alternative: Alternative) -> float:
    if alternative == "two_sided":
        return min(1.0, 2.0 * t_sf(abs(t), df))
    if alternative == "greater":
        return t_sf(t, df)
    if alternative == "less":
        return t_cdf(t, df)
    raise ValueError(f"unknown alternative {alternative!r}")


def _mean_var(samples: Sequence[float]) -> tuple[float, float]:
    n = len(samples)
    mean = math.fsum(samples) / n
    var = math.fsum((x - mean) ** 2 for x in samples) / (n - 1)
    return mean, var


def one_sample_t_test(
    samples: Sequence[float], mu0: float, alternative: Alternative = "two_sided"
) -> TestResult:
    """t test of the sample mean against ``mu0``."""
    n = len(samples)
    if n < 2:
        raise EmptySampleError("one-sample t test needs n >= 2")
    mean, var = _mean_var(samples)
    if var == 0.0:
        raise DegenerateSampleError("one-sample t test needs positive variance")
    se = math.sqrt(var / n)
    t = (mean - mu0) / se
    df = n - 1
    return TestResult(t, float(df), _t_p_value(t, df, alternative), alternative)


def welch_t_test(
    a: Sequence[float], b: Sequence[float], alternative: Alternative = "two_sided"
) -> TestResult:
    """Welch's unequal-variance t test with Welch-Satterthwaite df.

    When both groups have zero variance the statistic degenerates: equal
    means give p = 1, unequal means give the p = 0 limit.
    """
    if len(a) < 2 or len(b) < 2:
        raise EmptySampleError("welch t test needs n >= 2 in both groups")
    mean_a, var_a = _mean_var(a)
    mean_b, var_b = _mean_var(b)
    sq_a, sq_b = var_a / len(a), var_b / len(b)
    se2 = sq_a + sq_b
    if se2 == 0.0:
        if mean_a == mean_b:
            return TestResult(0.0, float(len(a) + len(b) - 2), 1.0, alternative)
        t = math.inf if mean_a > mean_b else -math.inf
        if alternative == "two_sided":
            p = 0.0
        elif alternative == "greater":
            p = 0.0 if t > 0 else 1.0
        else:
            p = 0.0 if t < 0 else 1.0
        return TestResult(t, float(len(a) + len(b) - 2), p, alternative)
    t = (mean_a - mean_b) / math.sqrt(se2)
    df = se2 * se2 / (sq_a * sq_a / (len(a) - 1) + sq_b * sq_b / (len(b) - 1))
    return TestResult(t, df, _t_p_value(t, df, alternative), alternative)


def welch_anova(groups: Sequence[Sequence[float]]) -> TestResult:
    """Welch's one-way ANOVA for k groups with unequal variances.

    Upper-tail F test; on two groups it equals the squared Welch t.
    """
    k = len(groups)
    if k < 2:
        raise TooFewGroupsError("welch anova needs at least 2 groups")
    for g in groups:
        if len(g) < 2:
            raise EmptySampleError("welch anova needs n >= 2 in every group")
    stats = [(_mean_var(g), len(g)) for g in groups]
    if any(var == 0.0 for (_, var), _ in stats):
        raise DegenerateSampleError("welch anova needs positive variance in every group")
    weights = [n / var for (_, var), n in stats]
    w_total = math.fsum(weights)
    grand = math.fsum(w * mean for w, ((mean, _), _) in zip(weights, stats)) / w_total
    between = math.fsum(
        w * (mean - grand) ** 2 for w, ((mean, _), _) in zip(weights, stats)
    ) / (k - 1)
    lam = math.fsum(
        (1.0 - w / w_total) ** 2 / (n - 1) for w, (_, n) in zip(weights, stats)
    ) / (k * k - 1.0)
    f = between / (1.0 + 2.0 * (k - 2) * lam)
    df1 = float(k - 1)
    df2 = 1.0 / (3.0 * lam)
    return TestResult(f, df1, f_sf(f, df1, df2), "greater", df2=df2)
