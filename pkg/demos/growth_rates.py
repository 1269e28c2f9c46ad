"""How fast evidence accumulates when the null is false.

Under a fixed alternative with standardized effect theta = mu/sigma,
every process here has an almost-sure growth rate: log(value)/n
converges, and the best achievable limit is (1/2)log(1 + theta^2) — a
ceiling no scale-invariant test process can beat.  The mixtures attain
it for every theta at once; the plug-in universal process attains it
too, at the price of a heavier finite-n wobble.

One-sided processes bet only on "mean > 0".  Facing a positive effect
they match the two-sided rate; facing a negative one they lose the bet:
the universal-inference variant's average log drifts to 0 from below,
while the subtracted-mixture variant forfeits its stake outright the
moment the running sum is nonpositive (value 0, so log = -inf below).
That is still a perfectly valid e-process — it just spent its evidence
on a direction the data refused to go.
"""

import math

from seqt.optimality import EffectSize, epower_ceiling
from seqt.rng import ReplicationStream
from seqt.scale_invariant import (
    log_gauss_mix_martingale,
    log_lai_ensm,
    log_semi_one_sided,
)
from seqt.stats import SampleStats
from seqt.universal import EmpiricalEstimator, UiProcessState, log_ui_t_eprocess, log_ui_t_one_sided

HORIZON = 20_000


def averaged_rates(mu, sigma, seed):
    draws = mu + sigma * ReplicationStream(seed, 0).gaussians(HORIZON)
    stats = SampleStats.empty()
    state = UiProcessState.start(EmpiricalEstimator(burn_in=20))
    for x in draws:
        stats.add(float(x))
        state.observe(float(x))
    return {
        "gauss-mix(1)": log_gauss_mix_martingale(stats, 1.0) / HORIZON,
        "gauss-mix(50)": log_gauss_mix_martingale(stats, 50.0) / HORIZON,
        "flat-mix": log_lai_ensm(stats) / HORIZON,
        "ui": log_ui_t_eprocess(state) / HORIZON,
        "one-sided(1)": log_semi_one_sided(stats, 1.0) / HORIZON,
        "ui-one-sided": log_ui_t_one_sided(state) / HORIZON,
    }


def main():
    cases = (
        (1.0, 1.0, 301),
        (0.5, math.sqrt(2.0), 302),
        (-1.0, 1.0, 303),
    )
    for mu, sigma, seed in cases:
        effect = EffectSize(mu, sigma)
        ceiling = epower_ceiling(effect)
        ceiling_one_sided = epower_ceiling(effect, one_sided=True)
        rates = averaged_rates(mu, sigma, seed)
        print(f"\nmean {mu}, sd {sigma:.4g}  over n = {HORIZON}")
        print(f"  two-sided ceiling (1/2)log(1+theta^2) = {ceiling:.5f}")
        for name in ("gauss-mix(1)", "gauss-mix(50)", "flat-mix", "ui"):
            print(f"    {name:>14}: {rates[name]:+.5f}")
        print(f"  one-sided ceiling = {ceiling_one_sided:.5f}")
        for name in ("one-sided(1)", "ui-one-sided"):
            print(f"    {name:>14}: {rates[name]:+.5f}")


if __name__ == "__main__":
    main()
