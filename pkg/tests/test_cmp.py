import math

import numpy as np
import pytest
from mpmath import mp, mpf

from cmpmix.cmp import (
    classify_dispersion,
    log_normalizer_truncated,
    moments_truncated,
    pmf_rows,
    pmf_truncated,
    pmf_untruncated,
    sample_counts_from_pmf,
    sample_truncated,
    successive_ratio,
)
from cmpmix.types import CmpParams, DispersionClass, Support

mp.dps = 40


def exact_log_normalizer(lam, nu, lower, upper):
    """Independent extended-precision oracle: direct term-by-term summation."""
    total = mpf(0)
    for j in range(lower, upper + 1):
        total += mpf(lam) ** j / mp.factorial(j) ** mpf(nu)
    return float(mp.log(total))


def exact_pmf(lam, nu, lower, upper):
    terms = [mpf(lam) ** j / mp.factorial(j) ** mpf(nu) for j in range(lower, upper + 1)]
    z = sum(terms)
    return np.array([float(t / z) for t in terms])


class TestLogNormalizer:
    @pytest.mark.parametrize("lam,nu", [(0.5, 0.0), (1.0, 1.0), (7.0, 2.5)])
    def test_single_point_support(self, lam, nu):
        assert log_normalizer_truncated(CmpParams(lam, nu), Support(1, 1)) == pytest.approx(
            math.log(lam), abs=1e-14
        )

    def test_geometric_partial_sum(self):
        # nu = 0 reduces the sum over {0..T} to a geometric partial sum
        got = log_normalizer_truncated(CmpParams(0.5, 0.0), Support(0, 7))
        assert got == pytest.approx(math.log((1 - 0.5**8) / (1 - 0.5)), abs=1e-12)

    def test_against_extended_precision_sum(self):
        got = log_normalizer_truncated(CmpParams(2.0, 0.5), Support(1, 5))
        assert got == pytest.approx(exact_log_normalizer(2.0, 0.5, 1, 5), abs=1e-12)


class TestPmfTruncated:
    def test_poisson_reduction(self):
        lam = 3.0
        support = Support(1, 5)
        xs = support.values()
        weights = lam**xs / np.array([math.factorial(int(x)) for x in xs])
        expected = weights / weights.sum()
        assert pmf_truncated(CmpParams(lam, 1.0), support) == pytest.approx(expected, abs=1e-12)

    def test_successive_ratio_law(self):
        params = CmpParams(9.0, 0.8)
        pmf = pmf_truncated(params, Support(1, 10))
        for x in range(2, 11):
            got = pmf[x - 2] / pmf[x - 1]
            assert got == pytest.approx(x**0.8 / 9.0, rel=1e-10)

    def test_against_extended_precision_sum(self):
        got = pmf_truncated(CmpParams(2.0, 0.5), Support(1, 5))
        assert got == pytest.approx(exact_pmf(2.0, 0.5, 1, 5), abs=1e-13)

    def test_normalization_random_parameters(self):
        rng = np.random.default_rng(7)
        for upper in (5, 10, 15):
            support = Support(1, upper)
            lams = rng.uniform(0.05, 50.0, 200)
            nus = rng.uniform(0.0, 10.0, 200)
            sums = pmf_rows(lams, nus, support).sum(axis=1)
            assert np.max(np.abs(sums - 1.0)) < 1e-12

    def test_log_space_stability_extremes(self):
        # lam**x alone would overflow here; log-space with max-shift must not
        for lam, nu in [(50.0, 0.0), (50.0, 10.0), (0.05, 10.0), (0.05, 0.0)]:
            pmf = pmf_truncated(CmpParams(lam, nu), Support(1, 20))
            assert np.all(np.isfinite(pmf))
            assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


class TestPmfUntruncated:
    def test_geometric_special_case(self):
        pmf = pmf_untruncated(CmpParams(0.5, 0.0))
        xs = np.arange(len(pmf))
        assert np.max(np.abs(pmf - 0.5 * 0.5**xs)) < 1e-10

    def test_poisson_special_case(self):
        pmf = pmf_untruncated(CmpParams(1.0, 1.0))
        xs = np.arange(len(pmf))
        expected = np.exp(-1.0) / np.array([math.factorial(int(x)) for x in xs])
        assert np.max(np.abs(pmf - expected)) < 1e-12

    def test_bernoulli_limit(self):
        pmf = pmf_untruncated(CmpParams(1.0, 50.0))
        assert pmf[:2].sum() > 0.999
        assert pmf[0] == pytest.approx(0.5, abs=1e-3)
        assert pmf[1] == pytest.approx(0.5, abs=1e-3)

    def test_divergent_series_rejected(self):
        with pytest.raises(ValueError, match="diverges"):
            pmf_untruncated(CmpParams(1.0, 0.0))
        with pytest.raises(ValueError, match="diverges"):
            pmf_untruncated(CmpParams(1.5, 0.0))

    def test_tail_mass_below_epsilon(self):
        pmf = pmf_untruncated(CmpParams(4.0, 0.9), tail_epsilon=1e-10)
        assert pmf[-1] < 1e-9
        assert pmf.sum() == pytest.approx(1.0, abs=1e-12)


class TestSuccessiveRatio:
    def test_poisson_case(self):
        assert successive_ratio(3, CmpParams(1.0, 1.0)) == pytest.approx(3.0)

    def test_geometric_case_constant(self):
        assert successive_ratio(4, CmpParams(2.0, 0.0)) == pytest.approx(0.5)

    def test_general_case(self):
        assert successive_ratio(2, CmpParams(1.13, 3.75)) == pytest.approx(
            2**3.75 / 1.13, rel=1e-12
        )

    def test_rejects_x_below_one(self):
        with pytest.raises(ValueError):
            successive_ratio(0, CmpParams(1.0, 1.0))


class TestMoments:
    def test_two_point_identity(self):
        # on {1, 2} with pmf (q, 1-q) the mean is 2 - q
        for nu in (0.0, 1.0, 4.0):
            params = CmpParams(1.0, nu)
            support = Support(1, 2)
            q = pmf_truncated(params, support)[0]
            mean, var = moments_truncated(params, support)
            assert mean == pytest.approx(2.0 - q, abs=1e-12)
            assert var >= 0

    def test_truncated_poisson_against_oracle(self):
        mean, var = moments_truncated(CmpParams(3.0, 1.0), Support(1, 20))
        assert mean == pytest.approx(3.1571870892504412, abs=1e-10)
        assert var == pytest.approx(2.6609180359665467, abs=1e-10)

    def test_oracle_pair(self):
        mean, var = moments_truncated(CmpParams(2.0, 0.5), Support(1, 5))
        assert mean == pytest.approx(3.1596414450516335, abs=1e-10)
        assert var == pytest.approx(1.7795774358097027, abs=1e-10)

    def test_variance_nonincreasing_in_nu_for_subcritical_rate(self):
        # The dispersion ordering in nu holds wherever nu=0 is itself a
        # proper (convergent) distribution, i.e. lam < 1.
        for upper in (5, 10, 15):
            support = Support(1, upper)
            for lam in (0.3, 0.5, 0.9):
                variances = [
                    moments_truncated(CmpParams(lam, float(nu)), support)[1]
                    for nu in np.linspace(0, 10, 41)
                ]
                assert np.all(np.diff(variances) <= 1e-12)

    def test_variance_not_monotone_for_supercritical_rate(self):
        # Truncation breaks the ordering for lam > 1: nu=0 piles mass on the
        # upper edge (low variance), small nu spreads a broad hump. Pinned
        # here so the behavior is visible, not accidental.
        support = Support(1, 10)
        v0 = moments_truncated(CmpParams(2.0, 0.0), support)[1]
        v_half = moments_truncated(CmpParams(2.0, 0.5), support)[1]
        assert v_half > v0


class TestDispersion:
    def test_classes(self):
        assert classify_dispersion(CmpParams(1.0, 1.0)) is DispersionClass.EQUI
        assert classify_dispersion(CmpParams(8.0, 0.7)) is DispersionClass.OVER
        assert classify_dispersion(CmpParams(1.0, 3.0)) is DispersionClass.UNDER


class TestSampling:
    def test_degenerate_pmf(self):
        rng = np.random.default_rng(0)
        counts = sample_counts_from_pmf(np.array([1.0, 0.0]), 10, rng)
        assert counts.tolist() == [10, 0]

    def test_zero_draws(self):
        table = sample_truncated(CmpParams(2.0, 0.5), Support(1, 5), 0, seed=1)
        assert table.counts.tolist() == [0, 0, 0, 0, 0]

    def test_deterministic_per_seed(self):
        a = sample_truncated(CmpParams(1.0, 3.0), Support(1, 10), 500, seed=42)
        b = sample_truncated(CmpParams(1.0, 3.0), Support(1, 10), 500, seed=42)
        c = sample_truncated(CmpParams(1.0, 3.0), Support(1, 10), 500, seed=43)
        assert np.array_equal(a.counts, b.counts)
        assert not np.array_equal(a.counts, c.counts)

    def test_counts_sum_to_n(self):
        table = sample_truncated(CmpParams(1.0, 3.0), Support(1, 10), 1234, seed=5)
        assert table.n == 1234

    def test_frequencies_within_three_standard_errors(self):
        params, support, n = CmpParams(1.0, 3.0), Support(1, 10), 10000
        pmf = pmf_truncated(params, support)
        table = sample_truncated(params, support, n, seed=20260810)
        freq = table.counts / n
        se = np.sqrt(pmf * (1 - pmf) / n)
        assert np.all(np.abs(freq - pmf) <= 3 * se + 1e-12)
