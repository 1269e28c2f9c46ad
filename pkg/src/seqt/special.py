"""Self-contained numerical kernel: special functions and adaptive quadrature.

Scalar routines built on the stdlib ``math`` module, plus a vectorized
Gaussian quantile used by the simulation RNG. Nothing here imports from the
statistical layers above, and nothing above needs scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericalError

__all__ = [
    "QuadratureSettings",
    "erf",
    "gauss_cdf",
    "gauss_quantile",
    "integrate",
    "integrate_log",
    "log_beta",
    "log_gamma",
    "reg_inc_beta",
    "riemann_zeta",
    "t_cdf",
    "t_pdf",
    "t_quantile",
    "wbar",
]


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b)."""
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta requires a, b > 0, got {a!r}, {b!r}")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def erf(x: float) -> float:
    """Error function."""
    return math.erf(x)


def gauss_cdf(x: float) -> float:
    """Standard Gaussian CDF, accurate in both tails via erfc."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Wichura's PPND16 rational approximations for the Gaussian quantile
# (double precision, |relative error| < 1e-15 across (0, 1)).
_PPND_A = (
    3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4, 2.5090809287301226727e3,
)
_PPND_B = (
    1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
    5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
    2.8729085735721942674e4, 5.2264952788528545610e3,
)
_PPND_C = (
    1.42343711074968357734e0, 4.63033784615654529590e0,
    5.76949722146069140550e0, 3.64784832476320460504e0,
    1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
)
_PPND_D = (
    1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
    6.89767334985100004550e-1, 1.48103976427480074590e-1,
    1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9,
)
_PPND_E = (
    6.65790464350110377720e0, 5.46378491116411436990e0,
    1.78482653991729133580e0, 2.96560571828504891230e-1,
    2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
)
_PPND_F = (
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
    1.48753612908506148525e-2, 7.86869131145613259100e-4,
    1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15,
)


def _ratpoly(num: Sequence[float], den: Sequence[float], r):
    """Evaluate the degree-7 rational num(r)/den(r) (works on arrays too)."""
    p = num[7]
    for c in (num[6], num[5], num[4], num[3], num[2], num[1], num[0]):
        p = p * r + c
    q = den[7]
    for c in (den[6], den[5], den[4], den[3], den[2], den[1], den[0]):
        q = q * r + c
    return p / q


def _gauss_quantile_scalar(p: float) -> float:
    q = p - 0.5
    if abs(q) <= 0.425:
        return q * _ratpoly(_PPND_A, _PPND_B, 0.180625 - q * q)
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        v = _ratpoly(_PPND_C, _PPND_D, r - 1.6)
    else:
        v = _ratpoly(_PPND_E, _PPND_F, r - 5.0)
    return -v if q < 0 else v


def gauss_quantile(p):
    """Inverse of the standard Gaussian CDF.

    Accepts a scalar in (0, 1) or an ndarray of them; the array path runs the
    same branch logic elementwise and returns an ndarray.
    """
    if isinstance(p, (float, int)):
        if not 0.0 < p < 1.0:
            raise DomainError(f"gauss_quantile requires p in (0,1), got {p!r}")
        return _gauss_quantile_scalar(float(p))

    arr = np.asarray(p, dtype=np.float64)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("gauss_quantile requires all p in (0,1)")
    q = arr - 0.5
    out = np.empty_like(arr)

    central = np.abs(q) <= 0.425
    if central.any():
        qc = q[central]
        out[central] = qc * _ratpoly(_PPND_A, _PPND_B, 0.180625 - qc * qc)
    tails = ~central
    if tails.any():
        qt = q[tails]
        r = np.sqrt(-np.log(np.where(qt < 0, arr[tails], 1.0 - arr[tails])))
        v = np.empty_like(r)
        mid = r <= 5.0
        v[mid] = _ratpoly(_PPND_C, _PPND_D, r[mid] - 1.6)
        v[~mid] = _ratpoly(_PPND_E, _PPND_F, r[~mid] - 5.0)
        out[tails] = np.where(qt < 0, -v, v)
    return out


def _beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by the modified Lentz method."""
    max_iter = 2000
    eps = 3e-16
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NumericalError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}, x={x}"
    )


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b).

    Continued fraction evaluated on whichever side of the symmetry point
    x = (a+1)/(a+b+2) converges quickly.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"reg_inc_beta requires a, b > 0, got {a!r}, {b!r}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got {x!r}")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = a * math.log(x) + b * math.log1p(-x) - log_beta(a, b)
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_pdf(x: float, df: float) -> float:
    """Density of Student's t with ``df`` degrees of freedom."""
    if not df > 0:
        raise DomainError(f"t_pdf requires df > 0, got {df!r}")
    log_norm = (
        math.lgamma((df + 1.0) / 2.0)
        - math.lgamma(df / 2.0)
        - 0.5 * math.log(df * math.pi)
    )
    return math.exp(log_norm - 0.5 * (df + 1.0) * math.log1p(x * x / df))


def t_cdf(x: float, df: float) -> float:
    """CDF of Student's t with ``df`` degrees of freedom."""
    if not df > 0:
        raise DomainError(f"t_cdf requires df > 0, got {df!r}")
    if x == 0.0:
        return 0.5
    tail = 0.5 * reg_inc_beta(df / 2.0, 0.5, df / (df + x * x))
    return 1.0 - tail if x > 0 else tail


def t_quantile(p: float, df: float) -> float:
    """Quantile of Student's t: bisection bracketed from a Gaussian seed,
    polished by Newton steps against t_pdf."""
    if not df > 0:
        raise DomainError(f"t_quantile requires df > 0, got {df!r}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"t_quantile requires p in (0,1), got {p!r}")
    if p == 0.5:
        return 0.0
    seed = _gauss_quantile_scalar(p)
    if p > 0.5:
        lo, hi = 0.0, max(seed, 1.0)
        for _ in range(400):
            if t_cdf(hi, df) >= p:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise NumericalError("t_quantile failed to bracket the root")
    else:
        hi, lo = 0.0, min(seed, -1.0)
        for _ in range(400):
            if t_cdf(lo, df) <= p:
                break
            hi, lo = lo, lo * 2.0
        else:
            raise NumericalError("t_quantile failed to bracket the root")

    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid

    x = 0.5 * (lo + hi)
    for _ in range(60):
        err = t_cdf(x, df) - p
        slope = t_pdf(x, df)
        if slope <= 0.0:
            break
        step = err / slope
        x_new = x - step
        if not lo <= x_new <= hi:  # Newton escaped the bracket; bisect instead
            x_new = 0.5 * (lo + hi)
        if err > 0:
            hi = x
        elif err < 0:
            lo = x
        if abs(x_new - x) <= 1e-14 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    return x


def wbar(branch: int, y: float) -> float:
    """Solve u − ln u = y for u, on the branch below (0) or above (−1) u = 1.

    This is the pair of real inverses of u ↦ u − ln u, defined for y ≥ 1:
    branch 0 maps into (0, 1], branch −1 into [1, ∞). Computed by Newton on
    u − ln u − y directly; the equivalent Lambert-W form −W_i(−e^{−y}) is
    never formed because e^{−y} underflows long before y exhausts the
    domain handled here.
    """
    if branch not in (0, -1):
        raise DomainError(f"wbar branch must be 0 or -1, got {branch!r}")
    if not y >= 1.0:
        raise DomainError(f"wbar requires y >= 1, got {y!r}")
    if y == 1.0:
        return 1.0
    r = y - 1.0

    if y < 1.5:
        # near the branch point use u = 1 + t with t − log1p(t) = r
        t = math.sqrt(2.0 * r) if branch == -1 else -math.sqrt(2.0 * r)
        for _ in range(100):
            g = t - math.log1p(t) - r
            if abs(g) < 1e-15 * max(1.0, y):
                break
            t -= g * (1.0 + t) / t
        return 1.0 + t

    if branch == -1:
        u = y + math.log(y)
        u = y + math.log(u)
    else:
        if y > 700.0:
            raise NumericalError(f"wbar(0, y) underflows for y={y!r}")
        u = math.exp(-y)
        for _ in range(4):
            u = math.exp(u - y)
    for _ in range(100):
        g = u - math.log(u) - y
        if abs(g) < 1e-15 * max(1.0, y):
            break
        u -= g * u / (u - 1.0)
    return u


# Bernoulli numbers B_2, B_4, ... B_12 for the Euler–Maclaurin tail
_BERNOULLI = (1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730)


def riemann_zeta(s: float) -> float:
    """ζ(s) for s > 1 by Euler–Maclaurin summation."""
    if not s > 1.0:
        raise DomainError(f"riemann_zeta requires s > 1, got {s!r}")
    n = 25
    total = sum(k ** (-s) for k in range(1, n))
    n_pow = n ** (-s)
    total += 0.5 * n_pow + n ** (1.0 - s) / (s - 1.0)
    # correction terms B_2j/(2j)! * s(s+1)...(s+2j-2) * n^{-(s+2j-1)}
    poch = s          # rising product s(s+1)...(s+2j-2)
    power = n_pow / n  # n^{-(s+2j-1)}
    factorial = 2.0    # (2j)!
    for j, b2j in enumerate(_BERNOULLI, start=1):
        total += b2j / factorial * poch * power
        poch *= (s + 2.0 * j - 1.0) * (s + 2.0 * j)
        power /= n * n
        factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0)
    return total


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and budget for the adaptive integrator."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


# 15-point Kronrod nodes (positive half) with their weights, and the weights
# of the embedded 7-point Gauss rule (which sits on nodes 1, 3, 5, 7).
_XGK = (
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0,
)
_WGK = (
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278,
)
_WG = (0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
       0.4179591836734694)


def _gk15(f: Callable[[float], float], a: float, b: float) -> tuple[float, float]:
    """One Gauss–Kronrod panel: returns (integral estimate, error estimate)."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    resk = _WGK[7] * fc
    resg = _WG[3] * fc
    for j in range(7):
        dx = half * _XGK[j]
        f1 = f(center - dx)
        f2 = f(center + dx)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    return resk * half, abs(resk - resg) * abs(half)


def _as_unit_pieces(f, lower, upper):
    """Map the requested range onto finite pieces via y = t/(1−t)."""
    if lower == -math.inf and upper == math.inf:
        return _as_unit_pieces(f, -math.inf, 0.0) + _as_unit_pieces(f, 0.0, math.inf)
    if upper == math.inf:
        a = lower

        def g(t, _a=a):
            onemt = 1.0 - t
            return f(_a + t / onemt) / (onemt * onemt)

        return [(g, 0.0, 1.0)]
    if lower == -math.inf:
        b = upper

        def g(t, _b=b):
            onemt = 1.0 - t
            return f(_b - t / onemt) / (onemt * onemt)

        return [(g, 0.0, 1.0)]
    if not lower < upper:
        raise DomainError(f"integrate requires lower < upper, got {lower!r}, {upper!r}")
    return [(f, float(lower), float(upper))]


def integrate(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    settings: QuadratureSettings | None = None,
) -> float:
    """Adaptive Gauss–Kronrod quadrature of f over [lower, upper].

    Semi-infinite and doubly infinite ranges are folded onto [0, 1) with the
    y = t/(1−t) substitution. Raises NumericalError if the subdivision
    budget runs out before the tolerances are met, or if the integrand
    produces non-finite values.
    """
    settings = settings or QuadratureSettings()
    pieces = _as_unit_pieces(f, lower, upper)

    # heap of (-err, tiebreak, a, b, integral, err) per segment
    heap: list = []
    total = 0.0
    total_err = 0.0
    counter = 0
    for g, a, b in pieces:
        val, err = _gk15(g, a, b)
        if not math.isfinite(val):
            raise NumericalError("integrand produced a non-finite value")
        heappush(heap, (-err, counter, a, b, g, val, err))
        counter += 1
        total += val
        total_err += err

    subdivisions = len(pieces)
    while total_err > max(settings.abs_tol, settings.rel_tol * abs(total)):
        if subdivisions >= settings.max_subdivisions:
            raise NumericalError(
                f"quadrature did not converge within {settings.max_subdivisions} subdivisions "
                f"(error estimate {total_err:.3e})"
            )
        _, _, a, b, g, val, err = heappop(heap)
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            raise NumericalError("quadrature interval collapsed before converging")
        v1, e1 = _gk15(g, a, mid)
        v2, e2 = _gk15(g, mid, b)
        if not (math.isfinite(v1) and math.isfinite(v2)):
            raise NumericalError("integrand produced a non-finite value")
        total += v1 + v2 - val
        total_err += e1 + e2 - err
        heappush(heap, (-e1, counter, a, mid, g, v1, e1))
        counter += 1
        heappush(heap, (-e2, counter, mid, b, g, v2, e2))
        counter += 1
        subdivisions += 1
    return total


def _fold_right(log_f, a, scale):
    log_j = math.log(scale)

    def log_g(t):
        onemt = 1.0 - t
        return log_f(a + scale * t / onemt) + log_j - 2.0 * math.log(onemt)

    return log_g


def _fold_left(log_f, b, scale):
    log_j = math.log(scale)

    def log_g(t):
        onemt = 1.0 - t
        return log_f(b - scale * t / onemt) + log_j - 2.0 * math.log(onemt)

    return log_g


def integrate_log(
    log_f: Callable[[float], float],
    lower: float,
    upper: float,
    settings: QuadratureSettings | None = None,
    peak_hint: float | None = None,
) -> float:
    """log ∫ exp(log_f(x)) dx, stabilized by shifting out the integrand's peak.

    The peak of log_f plus the transform's log-Jacobian is located on a
    scouting grid that is refined around the best point (so sharply
    concentrated integrands are still caught), then the shifted integrand is
    handed to ``integrate``. Returns −inf for an identically vanishing
    integrand.

    ``peak_hint``, when given for a half-infinite range, is the abscissa
    where the caller believes the mass sits; it sets the scale of the
    compactifying fold so that peaks many orders of magnitude from the
    finite endpoint still land mid-grid.  It is only a conditioning aid:
    any finite positive distance-to-endpoint is accepted, other values
    are ignored.
    """
    settings = settings or QuadratureSettings()

    def _fold_scale(endpoint: float) -> float:
        if peak_hint is None:
            return 1.0
        d = abs(peak_hint - endpoint)
        return d if 0.0 < d < math.inf else 1.0

    if lower == -math.inf and upper == math.inf:
        s = max(abs(peak_hint), 1.0) if peak_hint is not None and math.isfinite(peak_hint) else 1.0
        pieces = [(_fold_left(log_f, 0.0, s), 0.0, 1.0), (_fold_right(log_f, 0.0, s), 0.0, 1.0)]
    elif upper == math.inf:
        a = float(lower)
        pieces = [(_fold_right(log_f, a, _fold_scale(a)), 0.0, 1.0)]
    elif lower == -math.inf:
        b = float(upper)
        pieces = [(_fold_left(log_f, b, _fold_scale(b)), 0.0, 1.0)]
    else:
        if not lower < upper:
            raise DomainError(f"integrate_log requires lower < upper, got {lower!r}, {upper!r}")
        pieces = [(log_f, float(lower), float(upper))]

    best = -math.inf
    best_piece = -1
    best_t = math.nan
    for idx, (log_g, a, b) in enumerate(pieces):
        # Boundary-layer probes: a maximum pinned at an endpoint can sit
        # entirely inside one scout cell, so walk a geometric ladder into
        # each end before scanning the grid.
        span = b - a
        for off in (1e-15, 1e-12, 1e-9, 1e-6, 1e-3):
            for t in (a + off * span, b - off * span):
                if a < t < b:
                    v = log_g(t)
                    if v > best:
                        best = v
                        best_piece, best_t = idx, t
        lo_win, hi_win = a, b
        n_grid = 512
        for _ in range(4):  # refine the window around the running peak
            step = (hi_win - lo_win) / n_grid
            peak_t = None
            for i in range(n_grid):
                t = lo_win + (i + 0.5) * step
                v = log_g(t)
                if v > best:
                    best = v
                    peak_t = t
            if peak_t is None:
                break
            best_piece, best_t = idx, peak_t
            half = 2.0 * step
            lo_win = max(a, peak_t - half)
            hi_win = min(b, peak_t + half)
            n_grid = 64
    if best == -math.inf:
        return -math.inf

    shift = best
    total = 0.0
    for idx, (log_g, a, b) in enumerate(pieces):
        def g(t, _lg=log_g):
            v = _lg(t) - shift
            if v > 700.0:
                raise NumericalError(
                    "integrand exceeds its scouted peak by more than the "
                    "exponential range; the peak is too narrow to locate"
                )
            return math.exp(v) if v > -745.0 else 0.0

        # Anchor the adaptive rule around a sharply concentrated peak: split
        # at a geometric ladder of offsets so no panel straddles the spike
        # without sampling it.
        cuts = [a, b]
        if idx == best_piece:
            span = b - a
            for off in (1e-6, 1e-4, 1e-2):
                cuts.append(best_t - off * span)
                cuts.append(best_t + off * span)
            cuts.append(best_t)
            cuts = sorted(c for c in cuts if a <= c <= b)
        for left, right in zip(cuts, cuts[1:]):
            if right > left:
                total += integrate(g, left, right, settings)
    if total <= 0.0:
        return -math.inf
    return shift + math.log(total)
