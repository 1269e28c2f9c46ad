"""Tests for the information-theoretic reference quantities."""

import math

import numpy as np
import pytest

from seqt.errors import DomainError
from seqt.optimality import (
    EffectSize,
    epower_ceiling,
    kl_gauss,
    log_numeraire_evalue,
    minimax_lower_bound,
    numeraire_evalue,
)


def kl_quadrature_oracle(mu1, sig1_sq, mu2, sig2_sq):
    """KL by direct quadrature of p1 log(p1/p2), independent of any
    closed form: Gauss-Legendre on a window of +-40 sd around mu1."""
    nodes, weights = np.polynomial.legendre.leggauss(600)
    sd1 = math.sqrt(sig1_sq)
    lo, hi = mu1 - 40.0 * sd1, mu1 + 40.0 * sd1
    x = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    w = 0.5 * (hi - lo) * weights
    log_p1 = -0.5 * (x - mu1) ** 2 / sig1_sq - 0.5 * math.log(
        2.0 * math.pi * sig1_sq
    )
    log_p2 = -0.5 * (x - mu2) ** 2 / sig2_sq - 0.5 * math.log(
        2.0 * math.pi * sig2_sq
    )
    return float(np.sum(w * np.exp(log_p1) * (log_p1 - log_p2)))


class TestEffectSize:
    def test_theta(self):
        assert EffectSize(1.5, 3.0).theta == 0.5
        assert EffectSize(-2.0).theta == -2.0

    @pytest.mark.parametrize("sigma", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_bad_sigma(self, sigma):
        with pytest.raises(DomainError):
            EffectSize(1.0, sigma)

    def test_rejects_nonfinite_mu(self):
        with pytest.raises(DomainError):
            EffectSize(math.inf)


class TestKlGauss:
    def test_identical_arguments_vanish(self):
        assert kl_gauss(0.7, 2.3, 0.7, 2.3) == 0.0

    def test_worked_values_against_quadrature(self):
        assert kl_gauss(1.0, 1.0, 0.0, 2.0) == pytest.approx(
            kl_quadrature_oracle(1.0, 1.0, 0.0, 2.0), rel=1e-10
        )
        assert kl_gauss(1.0, 1.0, 0.0, 2.0) == pytest.approx(
            0.5 * math.log(2.0), rel=1e-14
        )
        assert kl_gauss(0.0, 1.0, 0.0, 4.0) == pytest.approx(
            0.5 * (math.log(4.0) + 0.25 - 1.0), rel=1e-14
        )
        assert kl_gauss(0.0, 1.0, 0.0, 4.0) == pytest.approx(
            kl_quadrature_oracle(0.0, 1.0, 0.0, 4.0), rel=1e-10
        )

    def test_random_cases_against_quadrature(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            mu1, mu2 = rng.normal(0.0, 2.0, 2)
            s1, s2 = rng.uniform(0.3, 5.0, 2)
            want = kl_quadrature_oracle(mu1, s1, mu2, s2)
            assert kl_gauss(mu1, s1, mu2, s2) == pytest.approx(want, rel=1e-9)

    def test_nonnegative(self):
        rng = np.random.default_rng(18)
        for _ in range(200):
            mu1, mu2 = rng.normal(0.0, 3.0, 2)
            s1, s2 = rng.uniform(0.1, 9.0, 2)
            assert kl_gauss(mu1, s1, mu2, s2) >= 0.0

    def test_rejects_bad_variances(self):
        with pytest.raises(DomainError):
            kl_gauss(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            kl_gauss(0.0, 1.0, 0.0, -2.0)


class TestEpowerCeiling:
    def test_null_effect(self):
        assert epower_ceiling(EffectSize(0.0)) == 0.0

    def test_unit_effect(self):
        assert epower_ceiling(EffectSize(1.0)) == pytest.approx(
            0.5 * math.log(2.0), rel=1e-15
        )

    def test_one_sided_clips_negative_effects(self):
        assert epower_ceiling(EffectSize(-1.0), one_sided=True) == 0.0
        assert epower_ceiling(EffectSize(-0.3, 2.0), one_sided=True) == 0.0
        # on the right side of the null the flag changes nothing
        e = EffectSize(0.8)
        assert epower_ceiling(e, one_sided=True) == epower_ceiling(e)

    def test_is_kl_to_projected_null_bitwise(self):
        # The ceiling IS the divergence from the alternative to the
        # variance-inflated null N(0, 1 + theta^2); with sigma = 1 the two
        # call paths must produce the same float, not merely close ones.
        for theta in (-3.0, -0.9, 0.1, 0.25, 1.0, 2.0, 17.5):
            assert epower_ceiling(EffectSize(theta)) == kl_gauss(
                theta, 1.0, 0.0, 1.0 + theta * theta
            )

    def test_is_kl_to_projected_null_general_scale(self):
        # With sigma != 1 the two sides round differently (the KL takes a
        # log-ratio that cancels for small effects), so equality holds to
        # quadrature accuracy rather than bitwise.
        rng = np.random.default_rng(19)
        for _ in range(50):
            mu = float(rng.normal(0.0, 2.0))
            sigma = float(rng.uniform(0.2, 4.0))
            lhs = epower_ceiling(EffectSize(mu, sigma))
            rhs = kl_gauss(mu, sigma * sigma, 0.0, mu * mu + sigma * sigma)
            assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-12)

    def test_projection_is_the_minimizer(self):
        # Scanning nulls N(0, v) over a fine grid, the KL from the
        # alternative is smallest at v = mu^2 + sigma^2.
        for mu, sigma in ((1.0, 1.0), (0.5, 2.0), (-2.0, 0.7)):
            target = mu * mu + sigma * sigma
            grid = np.geomspace(target / 8.0, target * 8.0, 4001)
            kls = [kl_gauss(mu, sigma * sigma, 0.0, v) for v in grid]
            best = grid[int(np.argmin(kls))]
            step = grid[1] / grid[0]
            assert target / step <= best <= target * step


class TestMinimaxLowerBound:
    def test_worked_value(self):
        want = math.sqrt(0.2775 ** (-2.0 / 10.0) - 1.0)
        assert minimax_lower_bound(0.05, 10) == pytest.approx(want, rel=1e-12)
        assert minimax_lower_bound(0.05, 10) == pytest.approx(0.54060, abs=5e-6)

    def test_vanishes_for_large_n(self):
        values = [minimax_lower_bound(0.05, n) for n in (1, 5, 50, 500, 10**7)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-3

    def test_vanishes_near_one_third(self):
        assert minimax_lower_bound(1.0 / 3.0 - 1e-12, 5) < 1e-5

    @pytest.mark.parametrize("alpha", [0.0, 1.0 / 3.0, 0.4, 1.0])
    def test_rejects_alpha_outside_third(self, alpha):
        with pytest.raises(DomainError):
            minimax_lower_bound(alpha, 10)

    def test_rejects_bad_n(self):
        with pytest.raises(DomainError):
            minimax_lower_bound(0.05, 0)


class TestNumeraire:
    def test_null_effect_scores_one_everywhere(self):
        for x in (-7.0, 0.0, 0.3, 1e6):
            assert numeraire_evalue(x, EffectSize(0.0, 2.0)) == 1.0

    def test_worked_value(self):
        want = math.sqrt(2.0) * math.exp(-0.5)
        assert numeraire_evalue(0.0, EffectSize(1.0, 1.0)) == pytest.approx(
            want, rel=1e-14
        )

    def test_log_and_plain_agree(self):
        effect = EffectSize(0.7, 1.3)
        for x in (-2.0, 0.1, 4.5):
            assert numeraire_evalue(x, effect) == pytest.approx(
                math.exp(log_numeraire_evalue(x, effect)), rel=1e-15
            )

    def test_mean_under_any_null_is_at_most_one(self):
        # The e-value property: for every centered Gaussian null, the MC
        # mean stays within sampling error of <= 1; at the projection
        # variance sigma0^2 = mu^2 + sigma^2 it must BE 1.
        effect = EffectSize(1.0, 1.0)
        rng = np.random.default_rng(101)
        for sig0_sq in (0.5, 1.0, 4.0, 2.0):
            draws = rng.normal(0.0, math.sqrt(sig0_sq), 100_000)
            values = np.array(
                [numeraire_evalue(float(x), effect) for x in draws]
            )
            mean = float(values.mean())
            se = float(values.std(ddof=1)) / math.sqrt(values.size)
            assert mean <= 1.0 + 3.0 * se
            if sig0_sq == 2.0:  # mu^2 + sigma^2
                assert abs(mean - 1.0) <= 3.0 * se

    def test_epower_under_alternative_attains_ceiling(self):
        # E[log M*] under the alternative equals the ceiling exactly in
        # expectation; 10^6 draws via the same closed form the library
        # uses, tied to the scalar route on a subsample.
        effect = EffectSize(0.8, 1.5)
        rng = np.random.default_rng(102)
        x = rng.normal(effect.mu, effect.sigma, 1_000_000)
        sig_sq = effect.sigma**2
        inflated = effect.mu**2 + sig_sq
        logs = (
            0.5 * (np.log(inflated) - np.log(sig_sq))
            - (x - effect.mu) ** 2 / (2.0 * sig_sq)
            + x * x / (2.0 * inflated)
        )
        for xi in x[:100]:
            assert log_numeraire_evalue(float(xi), effect) == pytest.approx(
                float(
                    0.5 * (np.log(inflated) - np.log(sig_sq))
                    - (xi - effect.mu) ** 2 / (2.0 * sig_sq)
                    + xi * xi / (2.0 * inflated)
                ),
                rel=1e-12,
                abs=1e-12,
            )
        mean = float(logs.mean())
        se = float(logs.std(ddof=1)) / math.sqrt(logs.size)
        assert abs(mean - epower_ceiling(effect)) <= 3.0 * se

    def test_rejects_nonfinite_observation(self):
        with pytest.raises(DomainError):
            numeraire_evalue(math.nan, EffectSize(1.0))
