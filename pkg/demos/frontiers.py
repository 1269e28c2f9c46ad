"""The limits the methods press against, evaluated directly.

Four short exhibits:

* a floor on how tight any valid sequence of intervals can possibly be,
  next to what the universal-inference interval actually delivers;
* the alpha crossover — at everyday levels the classical t-interval is
  narrower, but its width blows up like alpha^(-1/(n-1)) as alpha
  shrinks while the sequential interval only pays alpha^(-1/n), so for
  small enough alpha the anytime-valid interval wins outright;
* the efficiency constant sqrt(pi/8) of the sign-based fallback: the
  share of the optimal growth rate that survives throwing away all
  magnitude information near theta = 0;
* the single-observation optimal e-value, whose mean under the matched
  null is exactly 1 — the defining property, checked by Monte Carlo.
"""

import math

import numpy as np

from seqt.baselines import are_betabinom, classical_t_ci
from seqt.batch import draw_gaussian_matrix, ui_sweep
from seqt.optimality import EffectSize, minimax_lower_bound, numeraire_evalue
from seqt.rng import ReplicationStream
from seqt.stats import SampleStats
from seqt.universal import UiProcessState, ui_cs


def width_floor():
    print("half-width floor at alpha = 0.05 vs the universal-inference interval")
    print(f"{'n':>4}  {'floor':>8}  {'10% quantile of actual':>23}")
    sweep = ui_sweep(draw_gaussian_matrix(seed=41, reps=4000, count=20), alpha=0.05)
    for n in (5, 10, 20):
        floor = minimax_lower_bound(0.05, n)
        actual = float(np.quantile(sweep.radius[:, n - 1], 0.10))
        print(f"{n:>4}  {floor:>8.4f}  {actual:>23.4f}")


def alpha_crossover():
    sample = (0.5, -0.3, 1.1)
    state = UiProcessState.start()
    stats = SampleStats.empty()
    for x in sample:
        state.observe(x)
        stats.add(x)
    print("\nwidths on the fixed sample (0.5, -0.3, 1.1), n = 3")
    print(f"{'alpha':>8}  {'sequential':>12}  {'classical':>12}")
    for k in range(1, 9):
        alpha = 10.0**-k
        sequential = ui_cs(state, alpha).width
        classical = classical_t_ci(stats, alpha).width
        marker = "  <- sequential narrower" if sequential < classical else ""
        print(f"{alpha:>8.0e}  {sequential:>12.4g}  {classical:>12.4g}{marker}")


def sign_test_share():
    print(f"\nsign-based fallback keeps {are_betabinom():.4f} of the optimal rate")
    print(f"analytic value sqrt(pi/8) = {math.sqrt(math.pi / 8.0):.4f}")


def matched_null_mean():
    effect = EffectSize(1.0, 1.0)
    matched = effect.mu**2 + effect.sigma**2
    print("\nmean of the one-step optimal e-value under N(0, v):")
    for v in (0.5, 1.0, matched, 4.0):
        draws = math.sqrt(v) * ReplicationStream(42, 0).gaussians(50_000)
        mean = float(np.mean([numeraire_evalue(float(x), effect) for x in draws]))
        note = "   (matched null: exactly 1 in expectation)" if v == matched else ""
        print(f"  v = {v:3.1f}: {mean:.4f}{note}")


if __name__ == "__main__":
    width_floor()
    alpha_crossover()
    sign_test_share()
    matched_null_mean()
