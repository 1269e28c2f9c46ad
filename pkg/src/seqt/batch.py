"""Column sweeps of the scalar processes over replication matrices.

The Monte-Carlo claims — safety of the betting processes, simultaneous
coverage of the confidence sequences — need 10^4 replications of
1000-step trajectories, which is 10^7 process evaluations; calling the
scalar functions one observation at a time is far too slow.  The sweeps
here take a ``(reps, n)`` matrix of observations (rows are independent
replications) and evaluate every process value in the matrix with
vectorized arithmetic, mirroring the scalar formulas term for term.

The only divergence from the scalar path is in the running sums: the
streaming :class:`~seqt.stats.SampleStats` compensates its accumulators,
the sweeps use plain cumulative sums.  The resulting values agree to
float rounding (the tests pin this), which is far below the Monte-Carlo
resolution the sweeps exist to serve.

Sweeps assume continuous data: columns never hit the degenerate
all-observations-equal branches (those are measure zero under every
source the replication streams draw from), except where a function
documents its handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .rng import ReplicationStream
from .special import gauss_quantile
from .universal import VARIANCE_FLOOR

__all__ = [
    "UiSweep",
    "draw_gaussian_matrix",
    "draw_uniform_matrix",
    "jzs_sup_crossers",
    "log_gauss_mix_sweep",
    "log_jzs_sweep",
    "ui_sweep",
]

_LOG_2PI = math.log(2.0 * math.pi)


def _draw_uniform_rows(seed: int, reps: int, count: int) -> np.ndarray:
    if reps < 1 or count < 1:
        raise DomainError("need at least one replication and one draw")
    rows = np.empty((reps, count))
    for rep in range(reps):
        rows[rep] = ReplicationStream(seed, rep).uniforms(count)
    return rows


def draw_uniform_matrix(seed: int, reps: int, count: int) -> np.ndarray:
    """(reps, count) open-interval uniforms; row r is substream (seed, r)."""
    return _draw_uniform_rows(seed, reps, count)


def draw_gaussian_matrix(seed: int, reps: int, count: int) -> np.ndarray:
    """(reps, count) standard Gaussians, row r identical to
    ``ReplicationStream(seed, r).gaussians(count)``."""
    return gauss_quantile(_draw_uniform_rows(seed, reps, count))


def _cumulants(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2:
        raise DomainError("sweeps take a (reps, n) matrix")
    s = np.cumsum(xs, axis=1)
    q = np.cumsum(xs * xs, axis=1)
    k = np.arange(1, xs.shape[1] + 1, dtype=np.float64)
    return s, q, k


def log_gauss_mix_sweep(xs: np.ndarray, c_sq: float) -> np.ndarray:
    """Matrix of log G_n^{(c)} along each row of ``xs``.

    Entry (r, j) equals ``log_gauss_mix_martingale`` on the first j+1
    observations of row r, including the exact 0 at n = 1 and +inf where
    the grouped spread statistic rounds nonpositive.
    """
    if not (math.isfinite(c_sq) and c_sq > 0.0):
        raise DomainError(f"c_sq must be positive, got {c_sq}")
    s, q, k = _cumulants(xs)
    nc = k + c_sq
    d = (k * q - s * s) + c_sq * q
    out = np.full(s.shape, math.inf)
    ok = d > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        values = 0.5 * (math.log(c_sq) - np.log(nc)) + 0.5 * k * (
            np.log(nc * q) - np.log(d)
        )
    out[ok] = values[ok]
    out[:, 0] = 0.0
    return out


@dataclass(frozen=True)
class UiSweep:
    """Per-step outputs of the universal t process along each row.

    ``log_e`` is the log e-process, ``mean`` the running sample mean,
    and ``radius`` the confidence-sequence half-width (None unless an
    alpha was supplied).
    """

    log_e: np.ndarray
    mean: np.ndarray
    radius: Optional[np.ndarray]


def ui_sweep(xs: np.ndarray, alpha: Optional[float] = None) -> UiSweep:
    """Sweep the universal t e-process (empirical estimators, no burn-in,
    null location 0) down the columns of ``xs``.

    The plug-in product uses the same predictable estimates as the
    scalar path: (0, 1) before any data, the running mean with unit
    sigma after one observation, then the running mean and population
    variance with the 1e-12 floor.
    """
    if alpha is not None and not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2:
        raise DomainError("sweeps take a (reps, n) matrix")
    reps, n = xs.shape
    if n < 1:
        raise DomainError("need at least one column")

    log_e = np.empty((reps, n))
    mean_out = np.empty((reps, n))
    radius = np.empty((reps, n)) if alpha is not None else None

    run_sum = np.zeros(reps)
    run_sq = np.zeros(reps)
    lpp = np.zeros(reps)
    for j in range(n):
        x = xs[:, j]
        if j == 0:
            sig = np.ones(reps)
            z = x
        else:
            count = float(j)
            est_var = (count * run_sq - run_sum * run_sum) / (count * count)
            est_var = np.where(est_var > 0.0, est_var, 0.0)
            var_eff = np.where(
                est_var == 0.0,
                1.0,
                np.maximum(est_var, VARIANCE_FLOOR),
            )
            sig = np.sqrt(var_eff)
            z = (x - run_sum / count) / sig
        lpp += -np.log(sig) - 0.5 * z * z

        run_sum = run_sum + x
        run_sq = run_sq + x * x
        count = float(j + 1)
        log_e[:, j] = 0.5 * count * (np.log(run_sq / count) + 1.0) + lpp
        mean_out[:, j] = run_sum / count
        if radius is not None:
            s_sq = (count * run_sq - run_sum * run_sum) / (count * count)
            s_sq = np.where(s_sq > 0.0, s_sq, 0.0)
            log_w = -2.0 * math.log(alpha) / count - 1.0 - 2.0 * lpp / count
            zz = s_sq * np.exp(-log_w)
            inside = zz < 1.0
            r = np.zeros(reps)
            # log_w explodes when the variance floor engages, and the
            # overflowing exp is the right answer: an infinite radius,
            # i.e. a vacuous interval at that step.
            with np.errstate(over="ignore"):
                r[inside] = np.exp(
                    0.5 * log_w[inside] + 0.5 * np.log1p(-zz[inside])
                )
            radius[:, j] = r
    return UiSweep(log_e=log_e, mean=mean_out, radius=radius)


def _jzs_nodes(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule for ∫_0^9 of the Gaussian-weighted mixture.

    The mixing density is standard normal, so mass beyond u = 9 is below
    1e-18 of the total and the integrand is analytic on the interval.
    """
    if nodes < 8:
        raise DomainError("need at least 8 quadrature nodes")
    xi, w = np.polynomial.legendre.leggauss(nodes)
    u = 4.5 * (xi + 1.0)
    log_w = np.log(4.5 * w) - 0.5 * u * u - 0.5 * _LOG_2PI
    return u, log_w


def _jzs_cells(
    s: np.ndarray, q: np.ndarray, k: np.ndarray, u: np.ndarray, log_w: np.ndarray
) -> np.ndarray:
    """log(1/B) on flat cell arrays (s, q, k), k >= 2 and q > 0 throughout."""
    a = k * q - s * s
    u_sq = u * u
    nc = k[:, None] + u_sq[None, :]
    d = a[:, None] + u_sq[None, :] * q[:, None]
    body = 0.5 * (np.log(u_sq)[None, :] - np.log(nc)) + 0.5 * k[:, None] * (
        np.log(nc * q[:, None]) - np.log(d)
    )
    body = body + log_w[None, :]
    top = body.max(axis=1)
    out = top + np.log(np.exp(body - top[:, None]).sum(axis=1))
    return math.log(2.0) + out


def log_jzs_sweep(xs: np.ndarray, nodes: int = 160) -> np.ndarray:
    """Matrix of log(1/B_n) (the Cauchy-mixture e-value) along each row.

    Every cell gets the full quadrature, so this is for modest matrices;
    the safety check at 10^4 x 1000 goes through :func:`jzs_sup_crossers`
    instead, which prices only the cells that could matter.
    """
    s, q, k = _cumulants(xs)
    u, log_w = _jzs_nodes(nodes)
    out = np.zeros(s.shape)
    if s.shape[1] == 1:
        return out
    kk = np.broadcast_to(k, s.shape)
    flat = _jzs_cells(
        s[:, 1:].ravel(), q[:, 1:].ravel(), kk[:, 1:].ravel(), u, log_w
    )
    out[:, 1:] = flat.reshape(s[:, 1:].shape)
    return out


def _sup_log_gauss_mix(s: np.ndarray, q: np.ndarray, k: np.ndarray) -> np.ndarray:
    """sup over c^2 in (0, inf) of log G^{(c^2)}, cell by cell.

    Stationarity of log G in c^2 reduces to A + c^2 (A - (n-1) V) = 0
    with A = n V - S^2, so the supremum sits at c^2 = A / (S^2 - V) when
    S^2 > V and at the c^2 -> inf boundary (where G -> 1) otherwise.
    Cells with n = 1 report 0 (G_1 = 1 identically).
    """
    a = k * q - s * s
    diff = s * s - q
    out = np.zeros(s.shape)
    inner = (k >= 2.0) & (diff > 0.0) & (a > 0.0)
    t = a[inner] / diff[inner]
    kk = np.broadcast_to(k, s.shape)[inner]
    qq = q[inner]
    nc = kk + t
    d = a[inner] + t * qq
    out[inner] = 0.5 * (np.log(t) - np.log(nc)) + 0.5 * kk * (
        np.log(nc * qq) - np.log(d)
    )
    # a degenerate-but-nonzero sample sends the mixture to +inf
    out[(k >= 2.0) & (a <= 0.0)] = math.inf
    return out


def jzs_sup_crossers(
    xs: np.ndarray, log_threshold: float, nodes: int = 160
) -> np.ndarray:
    """Boolean per row: does sup_n 1/B_n reach exp(log_threshold)?

    The mixture is bounded by the best single prior precision,
    1/B_n <= sup_c G_n^{(c^2)}, and that envelope has a closed form; the
    expensive quadrature only runs on cells the envelope lets through.
    On null data that is a small fraction of the matrix.
    """
    if not log_threshold > 0.0:
        raise DomainError("threshold must exceed 1 (log threshold positive)")
    s, q, k = _cumulants(xs)
    envelope = _sup_log_gauss_mix(s, q, k)
    crossed = np.zeros(s.shape[0], dtype=bool)
    crossed |= np.isposinf(envelope).any(axis=1)

    candidate = (envelope >= log_threshold) & np.isfinite(envelope)
    rows, cols = np.nonzero(candidate)
    if rows.size == 0:
        return crossed
    u, log_w = _jzs_nodes(nodes)
    kk = np.broadcast_to(k, s.shape)
    chunk = 65536
    for lo in range(0, rows.size, chunk):
        r = rows[lo : lo + chunk]
        c = cols[lo : lo + chunk]
        values = _jzs_cells(s[r, c], q[r, c], kk[r, c], u, log_w)
        hit = values >= log_threshold
        np.logical_or.at(crossed, r[hit], True)
    return crossed
