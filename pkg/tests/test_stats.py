from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from traceforge.errors import DegenerateSampleError, EmptySampleError, TooFewGroupsError
from traceforge.stats import (
    describe,
    f_cdf,
    f_sf,
    one_sample_t_test,
    quantile,
    regularized_incomplete_beta,
    t_cdf,
    t_ppf,
    t_sf,
    welch_anova,
    welch_t_test,
)

samples_strategy = st.lists(
    st.floats(min_value=-1e4, max_value=1e4, allow_nan=False), min_size=2, max_size=40
)


class TestDescribe:
    def test_constant_sample(self):
        d = describe([5, 5, 5, 5])
        assert (d.mean, d.sd, d.variance, d.iqr) == (5, 0, 0, 0)
        assert d.ci_low == d.ci_high == 5

    def test_hand_arithmetic(self):
        d = describe([1, 2, 3, 4, 5])
        assert d.n == 5
        assert d.mean == 3
        assert d.median == 3
        assert d.variance == pytest.approx(2.5)
        assert d.sd == pytest.approx(1.5811388300841898)
        assert d.se == pytest.approx(0.7071067811865476)
        # t_{0.975, 4} = 2.7764451051977987
        assert d.ci_low == pytest.approx(1.036756838522439, abs=1e-9)
        assert d.ci_high == pytest.approx(4.9632431614775605, abs=1e-9)
        assert d.iqr == pytest.approx(2.0)

    def test_single_value_flags_absent(self):
        d = describe([7.0])
        assert d.n == 1
        assert d.mean == 7.0
        assert d.se is None and d.ci_low is None and d.ci_high is None
        assert d.sd == 0.0 and d.variance == 0.0 and d.iqr == 0.0

    def test_empty_sample(self):
        with pytest.raises(EmptySampleError):
            describe([])

    @given(samples_strategy, st.randoms(use_true_random=False))
    @settings(max_examples=50)
    def test_permutation_invariance(self, xs, rng):
        shuffled = xs[:]
        rng.shuffle(shuffled)
        a, b = describe(xs), describe(shuffled)
        assert a.mean == pytest.approx(b.mean, abs=1e-9)
        assert a.median == b.median
        assert a.sd == pytest.approx(b.sd, abs=1e-9)
        assert a.iqr == pytest.approx(b.iqr, abs=1e-9)

    @given(samples_strategy, st.floats(min_value=-100, max_value=100, allow_nan=False))
    @settings(max_examples=50)
    def test_translation_covariance(self, xs, c):
        a, b = describe(xs), describe([x + c for x in xs])
        assert b.mean == pytest.approx(a.mean + c, abs=1e-6)
        assert b.median == pytest.approx(a.median + c, abs=1e-6)
        assert b.ci_low == pytest.approx(a.ci_low + c, abs=1e-6)
        assert b.sd == pytest.approx(a.sd, abs=1e-6)
        assert b.variance == pytest.approx(a.variance, abs=1e-4)
        assert b.iqr == pytest.approx(a.iqr, abs=1e-6)

    def test_invariants(self):
        d = describe([0.2, 0.4, 0.9, 1.4])
        assert d.ci_low <= d.mean <= d.ci_high
        assert d.se == pytest.approx(d.sd / math.sqrt(d.n))
        assert d.variance == pytest.approx(d.sd**2)


class TestQuantile:
    def test_type7_interpolation(self):
        xs = [1, 2, 3, 4, 5]
        assert quantile(xs, 0.25) == 2.0
        assert quantile(xs, 0.75) == 4.0
        assert quantile(xs, 0.5) == 3.0
        assert quantile([1, 2, 3, 4], 0.5) == 2.5
        assert quantile([1, 4], 0.25) == 1.75


class TestOneSampleT:
    def test_symmetric_sample_is_null(self):
        result = one_sample_t_test([1, 2, 3, 4, 5], 3.0)
        assert result.statistic == 0.0
        assert result.p_value == 1.0
        assert result.df == 4

    def test_greater_alternative(self):
        result = one_sample_t_test([2, 4, 6], 0.0, alternative="greater")
        # frozen from an independent reference implementation
        assert result.statistic == pytest.approx(3.464101615137755, abs=1e-9)
        assert result.df == 2
        assert result.p_value == pytest.approx(0.03708995011372426, abs=1e-9)
        assert result.p_value < 0.05

    def test_two_sided_doubles_tail(self):
        result = one_sample_t_test([2, 4, 6], 0.0)
        assert result.p_value == pytest.approx(0.07417990022744853, abs=1e-9)

    @given(samples_strategy)
    @settings(max_examples=50)
    def test_against_own_mean_is_one(self, xs):
        mean = math.fsum(xs) / len(xs)
        try:
            result = one_sample_t_test(xs, mean)
        except DegenerateSampleError:
            return  # (near-)constant sample; zero variance is a separate contract
        assert abs(result.p_value - 1.0) < 1e-9

    def test_degenerate_sample(self):
        with pytest.raises(DegenerateSampleError):
            one_sample_t_test([3, 3, 3], 0.0)

    def test_too_small(self):
        with pytest.raises(EmptySampleError):
            one_sample_t_test([1], 0.0)


WELCH_A = [1.1, 2.3, 3.5, 4.1]
WELCH_B = [2.0, 2.2, 2.9]


class TestWelchT:
    def test_identical_groups(self):
        result = welch_t_test([1, 2, 3], [1, 2, 3])
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_separated_groups(self):
        result = welch_t_test([1, 2, 3], [101, 102, 103])
        assert result.p_value < 1e-3

    def test_reference_fixture(self):
        # frozen from an independent reference implementation
        result = welch_t_test(WELCH_A, WELCH_B)
        assert result.statistic == pytest.approx(0.5331564277623093, abs=1e-6)
        assert result.df == pytest.approx(3.9275806735125505, abs=1e-6)
        assert result.p_value == pytest.approx(0.6226629956032379, abs=1e-6)
        greater = welch_t_test(WELCH_A, WELCH_B, alternative="greater")
        assert greater.p_value == pytest.approx(0.31133149780161895, abs=1e-6)

    def test_live_reference(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = random.Random(9)
        for _ in range(20):
            a = [rng.gauss(0, 1) for _ in range(rng.randint(2, 12))]
            b = [rng.gauss(0.5, 2) for _ in range(rng.randint(2, 12))]
            ours = welch_t_test(a, b)
            ref = scipy_stats.ttest_ind(a, b, equal_var=False)
            assert ours.statistic == pytest.approx(ref.statistic, abs=1e-6)
            assert ours.p_value == pytest.approx(ref.pvalue, abs=1e-6)

    def test_zero_variance_limits(self):
        equal = welch_t_test([2, 2], [2, 2])
        assert equal.p_value == 1.0
        unequal = welch_t_test([2, 2], [3, 3])
        assert unequal.p_value == 0.0
        assert welch_t_test([2, 2], [3, 3], alternative="less").p_value == 0.0
        assert welch_t_test([2, 2], [3, 3], alternative="greater").p_value == 1.0


ANOVA_GROUPS = [
    [12.1, 14.2, 13.3, 11.9, 12.8],
    [15.5, 16.1, 14.9, 15.8],
    [10.2, 11.1, 10.8, 9.9, 10.5, 11.3],
    [13.0, 12.5, 13.8],
]


class TestWelchAnova:
    def test_identical_groups_null(self):
        result = welch_anova([[1, 2, 3], [1, 2, 3], [1, 2, 3]])
        assert result.statistic == pytest.approx(0.0, abs=1e-12)
        assert result.p_value == pytest.approx(1.0, abs=1e-12)

    def test_two_groups_equal_squared_welch_t(self):
        anova = welch_anova([WELCH_A, WELCH_B])
        t = welch_t_test(WELCH_A, WELCH_B)
        assert anova.statistic == pytest.approx(t.statistic**2, abs=1e-9)
        assert anova.p_value == pytest.approx(t.p_value, abs=1e-9)
        assert anova.df2 == pytest.approx(t.df, abs=1e-9)

    def test_reference_fixture(self):
        # frozen from an independent reference implementation
        result = welch_anova(ANOVA_GROUPS)
        assert result.statistic == pytest.approx(59.59593883728626, abs=1e-6)
        assert result.df == 3
        assert result.df2 == pytest.approx(6.365157863398596, abs=1e-6)
        assert result.p_value == pytest.approx(4.8535642072583295e-05, abs=1e-9)

    def test_live_reference(self):
        oneway = pytest.importorskip("statsmodels.stats.oneway")
        rng = random.Random(17)
        for _ in range(10):
            groups = [
                [rng.gauss(mu, 1 + mu / 4) for _ in range(rng.randint(3, 10))]
                for mu in (0.0, 0.5, 1.0)
            ]
            ours = welch_anova(groups)
            ref = oneway.anova_oneway(groups, use_var="unequal", welch_correction=True)
            assert ours.statistic == pytest.approx(float(ref.statistic), abs=1e-6)
            assert ours.p_value == pytest.approx(float(ref.pvalue), abs=1e-6)

    def test_too_few_groups(self):
        with pytest.raises(TooFewGroupsError):
            welch_anova([[1, 2, 3]])

    def test_degenerate_group(self):
        with pytest.raises(DegenerateSampleError):
            welch_anova([[1, 2, 3], [4, 4, 4]])

    def test_small_group_rejected(self):
        with pytest.raises(EmptySampleError):
            welch_anova([[1, 2], [3]])


class TestDistributions:
    def test_t_cdf_against_quadrature(self):
        integrate = pytest.importorskip("scipy.integrate")

        def t_pdf(x, df):
            return (
                math.gamma((df + 1) / 2)
                / (math.sqrt(df * math.pi) * math.gamma(df / 2))
                * (1 + x * x / df) ** (-(df + 1) / 2)
            )

        for df in (1, 2, 4.5, 10, 30.7):
            for x in (-4.0, -1.5, -0.3, 0.0, 0.7, 2.0, 5.0):
                numeric, _ = integrate.quad(t_pdf, -math.inf, x, args=(df,), limit=500)
                assert t_cdf(x, df) == pytest.approx(numeric, abs=1e-8)

    def test_f_sf_against_quadrature(self):
        integrate = pytest.importorskip("scipy.integrate")

        def f_pdf(x, d1, d2):
            if x <= 0:
                return 0.0
            num = (d1 * x) ** d1 * d2**d2 / (d1 * x + d2) ** (d1 + d2)
            beta = math.gamma(d1 / 2) * math.gamma(d2 / 2) / math.gamma((d1 + d2) / 2)
            return math.sqrt(num) / (x * beta)

        for d1, d2 in ((1, 4), (3, 6.4), (5, 2), (2, 25)):
            for x in (0.1, 0.8, 1.7, 4.0, 9.0):
                numeric, _ = integrate.quad(f_pdf, 0, x, args=(d1, d2), limit=400)
                assert f_cdf(x, d1, d2) == pytest.approx(numeric, abs=1e-8)
                assert f_sf(x, d1, d2) == pytest.approx(1 - numeric, abs=1e-8)

    def test_incomplete_beta_edges(self):
        assert regularized_incomplete_beta(0.0, 2, 3) == 0.0
        assert regularized_incomplete_beta(1.0, 2, 3) == 1.0
        # I_x(1,1) = x
        assert regularized_incomplete_beta(0.37, 1, 1) == pytest.approx(0.37, abs=1e-12)

    def test_t_tail_symmetry(self):
        for df in (1.5, 5, 22):
            for x in (0.2, 1.1, 3.3):
                assert t_sf(x, df) == pytest.approx(t_cdf(-x, df), abs=1e-12)
                assert t_cdf(x, df) + t_sf(x, df) == pytest.approx(1.0, abs=1e-12)

    def test_t_ppf_inverts_cdf(self):
        for df in (2, 7, 19):
            for p in (0.025, 0.2, 0.5, 0.8, 0.975):
                assert t_cdf(t_ppf(p, df), df) == pytest.approx(p, abs=1e-10)

    def test_t_critical_value(self):
        # classic two-sided 95% critical value at df=4
        assert t_ppf(0.975, 4) == pytest.approx(2.7764451051977987, abs=1e-8)
