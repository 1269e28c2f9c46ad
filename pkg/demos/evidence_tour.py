"""Walk three e-processes along a single data stream.

Each process starts at 1 and stays a fair bet under the composite null
"mean zero, any variance": its running value is the factor by which an
initial stake has grown.  Ville's inequality turns that into a test —
reject at level alpha the first time the value clears 1/alpha — and the
guarantee survives continuous monitoring.

Run it twice in your head: under the null block the processes wander
below the rejection line; after the mean shifts they climb roughly
exponentially, each at its own rate.
"""

import math

from seqt.rng import ReplicationStream
from seqt.scale_invariant import log_gauss_mix_martingale, log_jzs_mixture, log_lai_ensm
from seqt.stats import SampleStats
from seqt.universal import EmpiricalEstimator, UiProcessState, log_ui_t_eprocess

ALPHA = 0.05
CHECKPOINTS = (5, 10, 20, 50, 100, 200, 400)


def track(observations):
    stats = SampleStats.empty()
    ui = UiProcessState.start(EmpiricalEstimator(burn_in=5))
    rows = []
    for i, x in enumerate(observations, start=1):
        stats.add(float(x))
        ui.observe(float(x))
        if i in CHECKPOINTS:
            rows.append(
                (
                    i,
                    log_gauss_mix_martingale(stats, 1.0),
                    log_lai_ensm(stats),
                    log_jzs_mixture(stats),
                    log_ui_t_eprocess(ui),
                )
            )
    return rows


def show(title, rows):
    line = math.log(1.0 / ALPHA)
    print(f"\n{title}  (reject when log value >= log(1/alpha) = {line:.3f})")
    print(f"{'n':>5}  {'gauss-mix':>10}  {'flat-mix':>10}  {'jzs':>10}  {'ui':>10}")
    for n, *values in rows:
        cells = "  ".join(
            f"{v:>10.3f}" + ("*" if v >= line else " ") for v in values
        )
        print(f"{n:>5}  {cells}")


def main():
    stream = ReplicationStream(seed=20260816, rep=0)
    null_draws = stream.gaussians(400)
    shifted = 0.5 + ReplicationStream(seed=20260816, rep=1).gaussians(400)

    show("mean 0, sd 1 (null holds)", track(null_draws))
    show("mean 0.5, sd 1 (alternative)", track(shifted))

    # The flat mixture starts at +inf: before any scale information exists
    # it is an extended process, legal but unusable as evidence at n = 1.
    one = SampleStats.empty()
    one.add(1.3)
    print(f"\nflat mixture at n=1: log value = {log_lai_ensm(one)}")


if __name__ == "__main__":
    main()
