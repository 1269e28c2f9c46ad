"""Tests for the stitched-boundary, sign-based, and fixed-n baselines."""

import math

import numpy as np
import pytest

from seqt.baselines import (
    StitchParams,
    are_betabinom,
    classical_t_ci,
    known_var_mix_cs,
    log_median_betabinom,
    log_median_sign_supermartingale,
    median_betabinom,
    median_cs,
    median_epower,
    median_sign_supermartingale,
    plugin_t_cs,
    variance_upper_cs,
)
from seqt.errors import DomainError
from seqt.optimality import EffectSize, epower_ceiling
from seqt.scale_invariant import gauss_mix_cs
from seqt.special import t_quantile
from seqt.stats import SampleStats


def stats_of(values, retain=False):
    stats = SampleStats.empty(retain=retain)
    stats.extend(float(v) for v in values)
    return stats


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------


def wbar_bisect_oracle(branch, y):
    """Solve u - log(u) = y by bisection, no Newton, no library calls.

    Branch 0 searches t = log(u) in [-750, 0] where exp(t) - t is
    decreasing; branch -1 searches u in [1, y + 50] where u - log(u) is
    increasing.
    """
    if branch == 0:
        lo, hi = -750.0, 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if math.exp(mid) - mid > y:
                lo = mid
            else:
                hi = mid
        return math.exp(0.5 * (lo + hi))
    lo, hi = 1.0, y + 50.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - math.log(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def zeta_sum_oracle(s, terms=2_000_000):
    """Direct summation with an integral-plus-midpoint tail estimate."""
    k = np.arange(1, terms + 1, dtype=float)
    head = float(np.sum(k[::-1] ** (-s)))
    tail = terms ** (1.0 - s) / (s - 1.0) - 0.5 * terms ** (-s)
    return head + tail


def stitched_variance_interval_oracle(n, variance, alpha, eta, s):
    """Recompose the variance bound from the bisection/summation oracles."""
    zeta = zeta_sum_oracle(s)
    arg = 1.0 + (2.0 * (1.0 + eta) / (n - 1)) * (
        math.log(zeta / alpha)
        + s * math.log1p(math.log(n - 1) / math.log1p(eta))
    )
    den = wbar_bisect_oracle(0, arg) - 1.0 / (n - 1)
    if den <= 0.0:
        return math.inf
    return variance / den


def stitched_mean_radius_oracle(n, sigma, alpha, s):
    zeta = zeta_sum_oracle(s)
    arg = (
        1.0
        + 2.0 * math.log(1.0 / alpha)
        + 2.0 * math.log(zeta)
        + 2.0 * s * (1.0 - math.log(2.0 * s))
        + 2.0 * s * math.log(2.0 * s + math.log(n))
    )
    return sigma * math.sqrt(wbar_bisect_oracle(-1, arg) / n)


def median_halfwidth(n, alpha):
    """The deviation-bound half-width f, replicated in plain arithmetic."""
    ell = (1.4 * math.log(math.log(2.1 * n)) + math.log(10.0 / alpha)) / n
    return 0.75 * math.sqrt(ell) + 0.8 * ell


class TestStitchParams:
    def test_defaults(self):
        params = StitchParams()
        assert params.eta == 0.5
        assert params.s == 1.25

    @pytest.mark.parametrize("eta,s", [(0.0, 1.25), (-1.0, 1.25), (0.5, 1.0), (0.5, 0.5)])
    def test_rejects_bad_parameters(self, eta, s):
        with pytest.raises(DomainError):
            StitchParams(eta=eta, s=s)


class TestVarianceUpperCs:
    def test_two_observations_never_bind(self):
        # at n = 2 the crossing root cannot exceed 1/(n-1) = 1, so the
        # bound is vacuous no matter the data
        interval = variance_upper_cs(stats_of([0.0, 10.0]), 0.05)
        assert interval.lower == 0.0
        assert not interval.is_bounded

    def test_worked_value_against_oracle_chain(self):
        rng = np.random.default_rng(31)
        stats = stats_of(rng.normal(0.0, 1.0, 100))
        want = stitched_variance_interval_oracle(
            100, stats.variance, 0.05, 0.5, 1.25
        )
        got = variance_upper_cs(stats, 0.05)
        assert got.lower == 0.0
        assert got.upper == pytest.approx(want, rel=1e-9)

    def test_upper_approaches_sample_variance(self):
        stats = SampleStats(10**8, 0.0, float(10**8))
        interval = variance_upper_cs(stats, 0.05)
        assert 1.0 < interval.upper / stats.variance < 1.01

    def test_contains_sample_variance_once_active(self):
        rng = np.random.default_rng(32)
        stats = stats_of(rng.normal(3.0, 2.0, 500))
        interval = variance_upper_cs(stats, 0.05)
        assert interval.is_bounded
        assert interval.contains(stats.variance)

    def test_activation_is_monotone_in_n(self):
        rng = np.random.default_rng(33)
        values = rng.normal(0.0, 1.0, 200)
        stats = SampleStats.empty()
        active = []
        for x in values:
            stats.add(float(x))
            if stats.n >= 2:
                active.append(variance_upper_cs(stats, 0.05).is_bounded)
        assert any(active) and not active[0]
        first = active.index(True)
        assert all(active[first:])

    def test_rejects_short_samples_and_bad_alpha(self):
        with pytest.raises(DomainError):
            variance_upper_cs(stats_of([1.0]), 0.05)
        with pytest.raises(DomainError):
            variance_upper_cs(stats_of([1.0, 2.0]), 0.0)
        with pytest.raises(DomainError):
            variance_upper_cs(stats_of([1.0, 2.0]), 1.0)


class TestKnownVarMixCs:
    def test_single_observation_against_oracle_chain(self):
        stats = stats_of([0.3])
        want = stitched_mean_radius_oracle(1, 1.0, 0.05, 1.25)
        got = known_var_mix_cs(stats, 1.0, 0.05)
        assert 0.5 * got.width == pytest.approx(want, rel=1e-9)
        assert got.contains(0.3)

    def test_radius_scales_as_root_n(self):
        stats_small = SampleStats(100, 0.0, 100.0)
        stats_large = SampleStats(400, 0.0, 400.0)
        ratio = (
            known_var_mix_cs(stats_small, 1.0, 0.05).width
            / known_var_mix_cs(stats_large, 1.0, 0.05).width
        )
        # fourfold data halves the radius, up to the log-log boundary creep
        assert 1.9 < ratio < 2.1

    def test_radius_solves_the_boundary_equation(self):
        # push the returned radius back through u - log(u) and land on the
        # stitched exponent recomputed from the summation oracle
        n, sigma, alpha, s = 37, 2.5, 0.01, 1.25
        stats = SampleStats(n, 5.0, 40.0)
        radius = 0.5 * known_var_mix_cs(stats, sigma, alpha, s=s).width
        u = (radius / sigma) ** 2 * n
        zeta = zeta_sum_oracle(s)
        arg = (
            1.0
            + 2.0 * math.log(1.0 / alpha)
            + 2.0 * math.log(zeta)
            + 2.0 * s * (1.0 - math.log(2.0 * s))
            + 2.0 * s * math.log(2.0 * s + math.log(n))
        )
        assert u - math.log(u) == pytest.approx(arg, rel=1e-9)

    def test_scales_linearly_in_sigma(self):
        stats = SampleStats(50, 10.0, 60.0)
        assert known_var_mix_cs(stats, 3.0, 0.05).width == pytest.approx(
            3.0 * known_var_mix_cs(stats, 1.0, 0.05).width, rel=1e-12
        )

    def test_rejects_bad_arguments(self):
        with pytest.raises(DomainError):
            known_var_mix_cs(SampleStats.empty(), 1.0, 0.05)
        with pytest.raises(DomainError):
            known_var_mix_cs(stats_of([1.0]), 0.0, 0.05)
        with pytest.raises(DomainError):
            known_var_mix_cs(stats_of([1.0]), 1.0, 0.05, s=1.0)


class TestPluginTCs:
    def test_unbounded_until_variance_bound_activates(self):
        rng = np.random.default_rng(34)
        values = rng.normal(0.0, 1.0, 300)
        stats = SampleStats.empty()
        for x in values:
            stats.add(float(x))
            if stats.n < 2:
                continue
            plugin_bounded = plugin_t_cs(stats, 0.05).is_bounded
            variance_bounded = variance_upper_cs(stats, 0.025).is_bounded
            assert plugin_bounded == variance_bounded
        assert plugin_t_cs(stats, 0.05).is_bounded

    def test_splits_alpha_between_the_two_bounds(self):
        # the construction spends alpha/2 on the variance bound and
        # alpha/2 on the known-variance mixture, so the radius factors
        rng = np.random.default_rng(35)
        stats = stats_of(rng.normal(1.0, 2.0, 500))
        radius = 0.5 * plugin_t_cs(stats, 0.05).width
        mean_part = 0.5 * known_var_mix_cs(stats, 1.0, 0.025).width
        variance_part = variance_upper_cs(stats, 0.025).upper
        assert radius == pytest.approx(
            mean_part * math.sqrt(variance_part), rel=1e-12
        )

    def test_radius_grows_as_alpha_shrinks(self):
        rng = np.random.default_rng(36)
        stats = stats_of(rng.normal(0.0, 1.0, 500))
        assert (
            plugin_t_cs(stats, 0.025).width > plugin_t_cs(stats, 0.05).width
        )

    def test_wider_than_scale_invariant_mixture(self):
        rng = np.random.default_rng(37)
        stats = stats_of(rng.normal(0.0, 1.0, 10_000))
        assert (
            plugin_t_cs(stats, 0.05).width
            > gauss_mix_cs(stats, 1.0, 0.05).width
        )

    def test_contains_sample_mean(self):
        rng = np.random.default_rng(38)
        stats = stats_of(rng.normal(-4.0, 0.5, 400))
        assert plugin_t_cs(stats, 0.05).contains(stats.mean)

    def test_rejects_short_samples(self):
        with pytest.raises(DomainError):
            plugin_t_cs(stats_of([1.0]), 0.05)


class TestMedianSignSupermartingale:
    def test_zero_rate_is_flat(self):
        stats = stats_of([3.0, -1.0, 2.0, -7.0])
        assert median_sign_supermartingale(stats, 0.0) == 1.0

    def test_single_positive_observation(self):
        # one positive sign at lambda = log 3 pays sqrt(3) against the
        # normalizer (sqrt(3) + 1/sqrt(3))/2, i.e. exactly 3/2
        stats = stats_of([0.7])
        got = median_sign_supermartingale(stats, math.log(3.0))
        assert got == pytest.approx(1.5, rel=1e-15)

    def test_all_negative_signs_shrink(self):
        stats = stats_of([-1.0, -2.0, -3.0])
        assert median_sign_supermartingale(stats, 0.8) < 1.0

    @pytest.mark.parametrize("lam", [0.3, math.log(3.0), 2.0])
    def test_fair_sign_enumeration_has_mean_one(self, lam):
        # under a continuous median-zero law the sign pattern is a fair
        # coin sequence, so averaging over all 2^n patterns is an exact
        # expectation
        n = 3
        total = 0.0
        for bits in range(2**n):
            values = [1.0 if bits >> i & 1 else -1.0 for i in range(n)]
            total += median_sign_supermartingale(stats_of(values), lam)
        assert total / 2**n == pytest.approx(1.0, rel=1e-12)

    def test_log_and_plain_agree(self):
        stats = stats_of([1.0, -1.0, 1.0, 1.0])
        lam = 0.9
        assert median_sign_supermartingale(stats, lam) == pytest.approx(
            math.exp(log_median_sign_supermartingale(stats, lam)), rel=1e-15
        )

    def test_rejects_nonfinite_rate(self):
        with pytest.raises(DomainError):
            median_sign_supermartingale(stats_of([1.0]), math.inf)


class TestMedianBetabinom:
    def test_worked_values(self):
        assert median_betabinom(SampleStats.empty()) == pytest.approx(
            1.0, rel=1e-14
        )
        assert median_betabinom(stats_of([2.0])) == pytest.approx(
            1.0, rel=1e-14
        )
        assert median_betabinom(stats_of([2.0, 0.5])) == pytest.approx(
            4.0 / 3.0, rel=1e-14
        )

    def test_matches_integrated_sign_mixture(self):
        # the closed form must agree with literally mixing the sign
        # supermartingale over p ~ Beta(a, b) at lambda = log(p/(1-p))
        nodes, weights = np.polynomial.legendre.leggauss(400)
        p = 0.5 * (nodes + 1.0)
        w = 0.5 * weights
        lam = np.log(p / (1.0 - p))
        rng = np.random.default_rng(39)
        for _ in range(20):
            n = int(rng.integers(1, 31))
            signs = rng.choice([-1.0, 1.0], n)
            stats = stats_of(signs * rng.uniform(0.5, 2.0, n))
            a, b = rng.uniform(1.0, 4.0, 2)
            log_density = (
                (a - 1.0) * np.log(p)
                + (b - 1.0) * np.log(1.0 - p)
                - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))
            )
            mixture = float(
                np.sum(
                    w
                    * np.exp(log_density)
                    * np.array(
                        [
                            median_sign_supermartingale(stats, float(l))
                            for l in lam
                        ]
                    )
                )
            )
            assert median_betabinom(stats, a, b) == pytest.approx(
                mixture, rel=1e-8
            )

    def test_fair_sign_enumeration_has_mean_one(self):
        n = 4
        total = 0.0
        for bits in range(2**n):
            values = [1.0 if bits >> i & 1 else -1.0 for i in range(n)]
            total += median_betabinom(stats_of(values))
        assert total / 2**n == pytest.approx(1.0, rel=1e-12)

    def test_log_and_plain_agree(self):
        stats = stats_of([1.0, 1.0, -2.0])
        assert median_betabinom(stats, 2.0, 3.0) == pytest.approx(
            math.exp(log_median_betabinom(stats, 2.0, 3.0)), rel=1e-15
        )

    def test_rejects_bad_prior(self):
        with pytest.raises(DomainError):
            median_betabinom(stats_of([1.0]), 0.0, 1.0)
        with pytest.raises(DomainError):
            median_betabinom(stats_of([1.0]), 1.0, -2.0)


class TestMedianCs:
    def test_small_samples_are_vacuous(self):
        interval = median_cs(stats_of(range(10), retain=True), 0.05)
        assert not interval.is_bounded
        assert interval.lower == -math.inf

    def test_order_statistic_ranks(self):
        # once f < 1/2 the endpoints are the floor(n(1/2-f))+1 smallest
        # and ceil(n(1/2+f))-th smallest values; integer data makes the
        # chosen ranks visible
        for n, alpha in ((40, 0.05), (100, 0.05), (1000, 0.01)):
            f = median_halfwidth(n, alpha)
            assert f < 0.5
            data = range(1, n + 1)
            interval = median_cs(stats_of(data, retain=True), alpha)
            assert interval.lower == math.floor(n * (0.5 - f)) + 1
            assert interval.upper == math.ceil(n * (0.5 + f))

    def test_matches_documented_halfwidth(self):
        # n = 100 at alpha = 0.05 sits just above a quarter of the sample
        # on each side of the median
        assert median_halfwidth(100, 0.05) == pytest.approx(0.2685, abs=1e-4)

    def test_constant_data_collapse(self):
        interval = median_cs(stats_of([5.0] * 5000, retain=True), 0.05)
        assert interval.lower == 5.0 and interval.upper == 5.0

    def test_monotone_transform_equivariance(self):
        rng = np.random.default_rng(40)
        values = rng.normal(0.0, 2.0, 300)
        base = median_cs(stats_of(values, retain=True), 0.05)
        cubed = median_cs(stats_of(values**3, retain=True), 0.05)
        assert cubed.lower == base.lower**3
        assert cubed.upper == base.upper**3

    def test_contains_empirical_median(self):
        rng = np.random.default_rng(41)
        for n in (101, 200):
            values = rng.standard_cauchy(n)
            interval = median_cs(stats_of(values, retain=True), 0.05)
            assert interval.contains(float(np.median(values)))

    def test_requires_retained_observations(self):
        with pytest.raises(DomainError):
            median_cs(stats_of(range(100), retain=False), 0.05)


class TestClassicalTCi:
    def test_worked_value_via_cauchy_quantile(self):
        # with one degree of freedom the t quantile has the closed form
        # tan(pi (p - 1/2)), an oracle independent of the library's
        # incomplete-beta inversion
        interval = classical_t_ci(stats_of([0.0, 2.0]), 0.05)
        want = math.tan(math.pi * (0.975 - 0.5))
        assert 0.5 * interval.width == pytest.approx(want, rel=1e-10)
        assert interval.lower == pytest.approx(1.0 - want, rel=1e-10)

    def test_radius_shrinks_with_alpha_near_one(self):
        stats = stats_of([0.0, 2.0, 1.0])
        assert classical_t_ci(stats, 0.999999).width < 1e-4
        assert (
            classical_t_ci(stats, 0.01).width
            > classical_t_ci(stats, 0.1).width
        )

    def test_degenerate_sample_collapses(self):
        interval = classical_t_ci(stats_of([1.0, 1.0]), 0.05)
        assert interval.lower == 1.0 and interval.upper == 1.0

    def test_contains_sample_mean(self):
        rng = np.random.default_rng(42)
        stats = stats_of(rng.normal(2.0, 3.0, 50))
        assert classical_t_ci(stats, 0.05).contains(stats.mean)

    def test_fixed_n_coverage(self):
        # the fixed-n guarantee the sequential methods are measured
        # against: exact 95% coverage at each preregistered n
        rng = np.random.default_rng(43)
        reps = 100_000
        for n in (2, 5, 30):
            draws = rng.normal(0.0, 1.0, (reps, n))
            mean = draws.mean(axis=1)
            variance = draws.var(axis=1)
            radius = np.sqrt(variance / (n - 1)) * t_quantile(0.975, n - 1)
            for row in range(20):
                interval = classical_t_ci(stats_of(draws[row]), 0.05)
                assert 0.5 * interval.width == pytest.approx(
                    float(radius[row]), rel=1e-10
                )
            covered = float(np.mean(np.abs(mean) <= radius))
            band = 3.0 * math.sqrt(0.95 * 0.05 / reps)
            assert abs(covered - 0.95) <= band

    def test_rejects_single_observation(self):
        with pytest.raises(DomainError):
            classical_t_ci(stats_of([1.0]), 0.05)


class TestMedianEpower:
    def test_null_effect(self):
        assert median_epower(0.0) == 0.0

    def test_unit_effect_against_direct_arithmetic(self):
        p = 0.5 * (1.0 + math.erf(1.0 / math.sqrt(2.0)))
        want = p * math.log(p) + (1.0 - p) * math.log(1.0 - p) + math.log(2.0)
        assert median_epower(1.0) == pytest.approx(want, rel=1e-12)
        assert median_epower(1.0) == pytest.approx(0.2556, abs=2e-4)

    def test_symmetric_in_theta(self):
        for theta in (0.4, 1.0, 2.5):
            assert median_epower(theta) == median_epower(-theta)

    def test_saturates_at_log_two(self):
        assert median_epower(40.0) == math.log(2.0)

    def test_below_the_gaussian_ceiling(self):
        for theta in (0.5, 1.0, 2.0):
            assert median_epower(theta) < epower_ceiling(EffectSize(theta))


class TestAreBetabinom:
    def test_documented_value(self):
        assert are_betabinom() == pytest.approx(0.627, abs=1e-3)

    def test_matches_closed_form_limit(self):
        # the exact ratio of curvatures at zero effect is
        # 1/(4 phi(0)) = sqrt(pi/8)
        assert are_betabinom() == pytest.approx(
            math.sqrt(math.pi / 8.0), abs=2e-5
        )

    def test_curvature_ratio_is_half_pi(self):
        # the sign test loses a factor pi/2 in growth-rate curvature
        # (distinct from the sqrt(pi/8) efficiency, which also prices the
        # steeper betting slope)
        h = 1e-3
        ceiling_curv = (
            epower_ceiling(EffectSize(h))
            - 2.0 * epower_ceiling(EffectSize(0.0))
            + epower_ceiling(EffectSize(-h))
        ) / h**2
        median_curv = (
            median_epower(h) - 2.0 * median_epower(0.0) + median_epower(-h)
        ) / h**2
        assert ceiling_curv / median_curv == pytest.approx(
            math.pi / 2.0, rel=1e-4
        )

    def test_rejects_bad_step(self):
        with pytest.raises(DomainError):
            are_betabinom(0.0)
        with pytest.raises(DomainError):
            are_betabinom(0.5)


class TestSimultaneousCoverage:
    """Plug-in and median sequences hold their level uniformly over time.

    Both checks run 2000 replications out to n = 1000 with vectorized
    replicas of the interval arithmetic, each tied to the library on spot
    checks so the fast path can't drift from the real one.
    """

    REPS = 2000
    N_MAX = 1000
    ALPHA = 0.05

    def test_plugin_t_cs_time_uniform_coverage(self):
        n_grid = np.arange(2, self.N_MAX + 1)
        factor = np.empty(n_grid.size)
        params = StitchParams()
        for i, n in enumerate(n_grid):
            probe = SampleStats(int(n), 0.0, float(n))
            interval = plugin_t_cs(probe, self.ALPHA, params)
            # probe variance is exactly 1, so the half-width IS the factor
            factor[i] = (0.5 * interval.width) ** 2

        rng = np.random.default_rng(44)
        draws = rng.normal(0.0, 1.0, (self.REPS, self.N_MAX))
        cum_sum = np.cumsum(draws, axis=1)[:, 1:]
        cum_sq = np.cumsum(draws**2, axis=1)[:, 1:]
        mean = cum_sum / n_grid
        variance = np.maximum(cum_sq / n_grid - mean**2, 0.0)
        radius_sq = variance * factor
        miscovered = np.any(mean**2 > radius_sq, axis=1)

        for row in range(5):  # tie the vectorized radius to the library
            stats = stats_of(draws[row, :500])
            interval = plugin_t_cs(stats, self.ALPHA, params)
            assert (0.5 * interval.width) ** 2 == pytest.approx(
                float(radius_sq[row, 498]), rel=1e-9
            )

        coverage = 1.0 - float(np.mean(miscovered))
        band = 3.0 * math.sqrt(0.95 * 0.05 / self.REPS)
        assert coverage >= 0.95 - band

    def test_median_cs_time_uniform_coverage(self):
        n_grid = np.arange(1, self.N_MAX + 1)
        lo_rank = np.full(n_grid.size, -1)
        hi_rank = np.full(n_grid.size, 10**9)
        for i, n in enumerate(n_grid):
            f = median_halfwidth(int(n), self.ALPHA)
            if f >= 0.5:
                continue
            lo_rank[i] = math.floor(n * (0.5 - f))
            hi_rank[i] = math.ceil(n * (0.5 + f)) - 1

        rng = np.random.default_rng(45)
        draws = rng.normal(0.0, 1.0, (self.REPS, self.N_MAX))
        # the true median is 0: the interval misses it exactly when the
        # running count of nonpositive draws leaves [lo_rank+1, hi_rank+1]
        below = np.cumsum(draws <= 0.0, axis=1)
        miscovered = np.any(
            (below <= lo_rank) | (below > hi_rank + 1), axis=1
        )

        for row in range(5):  # tie the rank arithmetic to the library
            stats = stats_of(draws[row, :200], retain=True)
            interval = median_cs(stats, self.ALPHA)
            assert interval.contains(0.0) == (
                lo_rank[199] < below[row, 199] <= hi_rank[199] + 1
            )

        coverage = 1.0 - float(np.mean(miscovered))
        band = 3.0 * math.sqrt(0.95 * 0.05 / self.REPS)
        assert coverage >= 0.95 - band
