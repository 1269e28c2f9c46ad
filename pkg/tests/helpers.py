"""Shared numerical oracles for the test suite.

These deliberately avoid the closed forms they are used to check: the
mixture oracle integrates the *defining* double integral of the
Gaussian-mixture martingale (prior density times likelihood ratio, with
the likelihood ratio itself left as an integral) on tensor-product
Gauss-Legendre grids.
"""

import math

import numpy as np

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl(npts: int) -> tuple[np.ndarray, np.ndarray]:
    if npts not in _GL_CACHE:
        _GL_CACHE[npts] = np.polynomial.legendre.leggauss(npts)
    return _GL_CACHE[npts]


def _mapped(npts: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = _gl(npts)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), w * half


def log_gauss_mixture_oracle(
    n: int, s: float, v: float, c_sq: float, npts: int = 240
) -> float:
    """log ∫ h_theta d N(0, 1/c^2)(theta) by direct 2-D quadrature.

    The inner integral of h_theta is substituted y = u^2 and the joint
    (theta, u) log-integrand is evaluated on a Gauss-Legendre product
    grid centered at its stationary point.  Everything is assembled with
    a single log-sum-exp, so the result is finite whenever the integral
    is representable at all.
    """
    kappa = s * math.sqrt(2.0 / v)
    nc = n + c_sq
    # Stationary point of the joint exponent.
    denom = 2.0 - kappa * kappa / nc
    u_star = math.sqrt((n - 1.0) / denom) if n > 1 else 0.0
    theta_center = kappa * u_star / nc
    sigma_theta = 1.0 / math.sqrt(nc - 0.5 * kappa * kappa)

    u_lo = max(u_star - 16.0, 1e-300)
    u_hi = u_star + 16.0
    t_lo = theta_center - 16.0 * sigma_theta
    t_hi = theta_center + 16.0 * sigma_theta

    u, wu = _mapped(npts, u_lo, u_hi)
    th, wt = _mapped(npts, t_lo, t_hi)
    uu = u[None, :]
    tt = th[:, None]

    log_f = -0.5 * nc * tt**2 - uu**2 + kappa * tt * uu
    if n > 1:
        log_f = log_f + (n - 1.0) * np.log(uu)
    peak = float(np.max(log_f))
    total = float(np.einsum("i,j,ij->", wt, wu, np.exp(log_f - peak)))
    return (
        peak
        + math.log(total)
        + math.log(2.0)
        - math.lgamma(0.5 * n)
        + 0.5 * math.log(c_sq / (2.0 * math.pi))
    )


def log_cauchy_mixture_oracle(n: int, s: float, v: float, npts: int = 400) -> float:
    """log ∫ h_theta dC(0,1)(theta) by direct nested quadrature, n >= 2.

    The outer integral runs in phi = arctan(theta), where the standard
    Cauchy measure is uniform: that keeps the prior's poles at +-i away
    from the integration contour, which otherwise stalls Gauss-Legendre
    convergence at small n.  For a non-degenerate sample the integrand
    decays like exp(-(nV - S^2)/(2V) theta^2), so the phi window is cut
    at +-30 marginal standard deviations in theta.  The inner
    likelihood-ratio integral gets its own Gauss-Legendre grid per theta
    node, centered on that node's saddle point and written with the
    square completed so nothing large cancels.  (At n = 1 the integrand
    is only integrable thanks to the prior's tails and this construction
    does not apply.)
    """
    if n < 2:
        raise ValueError("oracle needs n >= 2")
    if not n * v > s * s:
        raise ValueError("oracle needs a non-degenerate sample")
    kappa = s * math.sqrt(2.0 / v)
    # Decay rate of exp(-n theta^2 / 2 + kappa^2 theta^2 / 4), combined.
    q = (n * v - s * s) / (2.0 * v)

    # Window from the joint saddle point, as in the Gaussian oracle with
    # the prior curvature removed.
    u_star = math.sqrt((n - 1.0) / (2.0 - kappa * kappa / n))
    theta_center = kappa * u_star / n
    sigma_theta = 1.0 / math.sqrt(2.0 * q)
    p_lo = math.atan(theta_center - 30.0 * sigma_theta)
    p_hi = math.atan(theta_center + 30.0 * sigma_theta)

    phi, wp = _mapped(npts, p_lo, p_hi)
    base_u, base_wu = _gl(240)

    log_outer = np.empty(npts)
    for i, ph in enumerate(phi):
        th = math.tan(ph)
        kt = kappa * th
        peak_u = (kt + math.sqrt(kt * kt + 8.0 * (n - 1.0))) / 4.0
        lo = max(peak_u - 18.0, 1e-300)
        hi = peak_u + 18.0
        half = 0.5 * (hi - lo)
        u = lo + half * (base_u + 1.0)
        log_f = (n - 1.0) * np.log(u) - (u - 0.5 * kt) ** 2
        peak = float(np.max(log_f))
        inner = float(np.dot(base_wu, np.exp(log_f - peak))) * half
        log_outer[i] = -q * th * th + peak + math.log(inner)

    peak = float(np.max(log_outer))
    total = float(np.dot(wp, np.exp(log_outer - peak)))
    return (
        peak
        + math.log(total)
        + math.log(2.0)
        - math.lgamma(0.5 * n)
        - math.log(math.pi)
    )
