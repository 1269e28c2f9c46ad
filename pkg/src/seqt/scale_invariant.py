"""Scale-invariant sequential t-tests.

Every process value in this module is a function of n and the ratio
S_n/sqrt(V_n) alone, which is what makes the guarantees hold under
optional stopping rules that may look at the *sizes* of the
observations.  The family members:

- ``si_likelihood_ratio``: the building-block likelihood ratio h_{theta,n},
  one value of theta at a time;
- ``lai_ensm`` / ``lai_cs``: the improper-prior mixture, an extended
  nonnegative supermartingale (it starts at +inf) and the classical
  confidence sequence built from it;
- ``gauss_mix_martingale`` / ``gauss_mix_cs``: the Gaussian-prior mixture,
  a genuine test martingale with a closed-form confidence sequence;
- ``semi_one_sided``: the e-process for the point null against positive
  alternatives;
- ``jzs_bayes_factor``: the Cauchy-prior mixture, reciprocal of the JZS
  Bayes factor.

Tests against a nonzero null location expect the observations to be
shifted on entry (X <- X - mu0); the formulas themselves never carry mu0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .special import QuadratureSettings, integrate_log, log_gamma, t_cdf, t_pdf
from .stats import CsInterval, SampleStats

__all__ = [
    "SiProcessParams",
    "gauss_mix_cs",
    "gauss_mix_martingale",
    "jzs_bayes_factor",
    "lai_cs",
    "lai_ensm",
    "lai_threshold",
    "log_gauss_mix_martingale",
    "log_jzs_mixture",
    "log_lai_ensm",
    "log_semi_one_sided",
    "log_si_likelihood_ratio",
    "optimal_c_sq",
    "semi_one_sided",
    "si_likelihood_ratio",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SiProcessParams:
    """Hyperparameters of the scale-invariant family.

    ``c_sq`` is the Gaussian prior precision c^2 (the precision itself is
    stored — not c — since that is the scale on which the closed forms
    are written); ``lai_m`` is the start time of the Lai confidence
    sequence; ``mu0`` is the null location that observations are shifted
    by before any process sees them.
    """

    c_sq: float = 1.0
    lai_m: int = 2
    mu0: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.c_sq) and self.c_sq > 0.0):
            raise DomainError(f"c_sq must be positive, got {self.c_sq}")
        if self.lai_m < 2:
            raise DomainError(f"lai_m must be at least 2, got {self.lai_m}")
        if not math.isfinite(self.mu0):
            raise DomainError("mu0 must be finite")


def _require_scaled_sample(stats: SampleStats) -> None:
    if stats.n < 1:
        raise DomainError("scale-invariant processes need at least one observation")
    if not stats.sum_sq > 0.0:
        raise DomainError(
            "sample has no scale (all observations zero); "
            "scale-invariant processes are undefined"
        )


def _exp_or_inf(log_value: float) -> float:
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def log_si_likelihood_ratio(
    theta: float,
    stats: SampleStats,
    settings: Optional[QuadratureSettings] = None,
) -> float:
    """log of h_{theta,n}, the scale-invariant likelihood ratio.

    After substituting y = u^2 the defining integral becomes
    2 ∫_0^inf u^{n-1} exp(-u^2 + theta S_n sqrt(2/V_n) u) du, which has no
    endpoint singularity for any n >= 1; it is integrated adaptively on
    the log scale and normalized by Gamma(n/2).  Completing the square in
    the exponent pulls the constant -theta^2 (n V_n - S_n^2) / (2 V_n) out
    of the integral, so nothing large cancels even for extreme theta; and
    when the remaining integrand peaks far from the origin, the integral
    is split around the (analytically known) peak so the adaptive rule
    cannot lose it.
    """
    _require_scaled_sample(stats)
    theta = float(theta)
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    if theta == 0.0:
        return 0.0
    n = stats.n
    kappa = theta * stats.sum * math.sqrt(2.0 / stats.sum_sq)
    half_k = 0.5 * kappa
    excess = (
        -theta * theta * (n * stats.sum_sq - stats.sum * stats.sum)
        / (2.0 * stats.sum_sq)
    )
    power = n - 1.0
    if abs(kappa) >= 1e8:
        # Far beyond any float-resolvable peak the quadrature grid
        # staircases; the Laplace/Watson expansions are exact to well
        # under 1e-12 relative here (next term ~ (n/kappa)^4).
        if kappa > 0.0:
            body = (
                power * math.log(half_k)
                + 0.5 * math.log(math.pi)
                + math.log1p(power * (power - 1.0) / (4.0 * half_k * half_k))
            )
        else:
            body = (
                -half_k * half_k
                + log_gamma(float(n))
                - n * math.log(-kappa)
                + math.log1p(-n * (n + 1.0) / (kappa * kappa))
            )
        return excess - log_gamma(0.5 * n) + body + math.log(2.0)
    # Root of 2u^2 - kappa u - (n - 1): the integrand's peak (the origin
    # when kappa <= 0 and n = 1).
    disc = math.sqrt(kappa * kappa + 8.0 * power)
    u_star = 0.25 * (kappa + disc)
    if u_star > 20.0:
        # Split around the peak, integrating in w = u - kappa/2: at
        # extreme kappa the u grid's own rounding turns the integrand
        # into a staircase the adaptive rule cannot polish, while w
        # keeps the Gaussian factor exact.
        if n == 1:
            log_fw = lambda w: -w * w
        else:
            log_fw = lambda w: power * math.log(half_k + w) - w * w
        if kappa >= 0.0:
            w_star = 2.0 * power / (disc + kappa)
        else:
            w_star = u_star - half_k
        pieces = (-half_k, w_star - 15.0, w_star + 15.0, math.inf)
        parts = [
            integrate_log(log_fw, lo, hi, settings)
            for lo, hi in zip(pieces, pieces[1:])
        ]
        top = max(parts)
        if top == -math.inf:
            body = -math.inf
        else:
            body = top + math.log(sum(math.exp(p - top) for p in parts))
    else:
        hint = u_star + 1.0 / (1.0 + abs(half_k))
        if kappa > 0.0:
            # Peak is interior and moderate; the completed square keeps
            # the exponent free of the +kappa^2/4 constant.
            if n == 1:
                log_f = lambda u: -(u - half_k) * (u - half_k)
            else:
                log_f = lambda u: power * math.log(u) - (u - half_k) * (u - half_k)
            body = integrate_log(log_f, 0.0, math.inf, settings, peak_hint=hint)
        else:
            # kappa <= 0: the peak crowds the origin at scale
            # ~(n-1)/|kappa|, far from kappa/2, where the completed
            # square would difference floats of wildly different size;
            # keep the exponent in product form and take the constant
            # out analytically.
            if n == 1:
                log_f = lambda u: -u * u + kappa * u
            else:
                log_f = lambda u: power * math.log(u) - u * u + kappa * u
            body = -half_k * half_k + integrate_log(
                log_f, 0.0, math.inf, settings, peak_hint=hint
            )
    return excess - log_gamma(0.5 * n) + body + math.log(2.0)


def si_likelihood_ratio(
    theta: float,
    stats: SampleStats,
    settings: Optional[QuadratureSettings] = None,
) -> float:
    """The likelihood ratio h_{theta,n}; equals 1 identically at theta = 0."""
    if float(theta) == 0.0:
        _require_scaled_sample(stats)
        return 1.0
    return _exp_or_inf(log_si_likelihood_ratio(theta, stats, settings))


def log_lai_ensm(stats: SampleStats) -> float:
    """log of :func:`lai_ensm`; +inf at n = 1 and for degenerate samples."""
    _require_scaled_sample(stats)
    n = stats.n
    if n == 1:
        return math.inf
    nv = n * stats.sum_sq
    d = nv - stats.sum * stats.sum
    if d <= 0.0:
        return math.inf
    return 0.5 * (_LOG_2PI - math.log(n)) + 0.5 * n * (math.log(nv) - math.log(d))


def lai_ensm(stats: SampleStats) -> float:
    """The improper-mixture process H_n = sqrt(2 pi / n) (n V_n / (n V_n - S_n^2))^{n/2}.

    An *extended* nonnegative supermartingale: it starts at H_1 = +inf
    and is also infinite whenever the sample is degenerate.  Despite the
    infinite start, threshold crossings of H_n/anything remain
    well-behaved because the process is decreasing in expectation.
    """
    return _exp_or_inf(log_lai_ensm(stats))


def lai_threshold(m: int, alpha: float) -> tuple[float, float]:
    """Solve the start-time-m crossing equation for the Lai CS.

    Returns (a, b): ``a`` is the root of
    2 (1 - F_{m-1}(a) + a f_{m-1}(a)) = alpha, found by bisection on a
    map that decreases strictly from 1 at a = 0; ``b`` is
    (1 + a^2/(m-1))^m / m.  alpha = 1 is allowed and gives a = 0 exactly.
    """
    if m < 2:
        raise DomainError(f"start time m must be at least 2, got {m}")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    df = m - 1.0

    def excess(a: float) -> float:
        return 2.0 * (1.0 - t_cdf(a, df) + a * t_pdf(a, df))

    if alpha >= 1.0:
        a = 0.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(200):
            if excess(hi) < alpha:
                break
            lo = hi
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if excess(mid) > alpha:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-10:
                break
        a = 0.5 * (lo + hi)
    return a, _exp_or_inf(_lai_log_b(m, a))


def _lai_log_b(m: int, a: float) -> float:
    return m * math.log1p(a * a / (m - 1.0)) - math.log(m)


def lai_cs(stats: SampleStats, m: int, alpha: float) -> CsInterval:
    """Lai's confidence sequence, active from its start time m onward.

    Before time m the sequence has not started and the whole real line
    is returned, so that a harness can plot every method on a common
    time axis.
    """
    if m < 2:
        raise DomainError(f"start time m must be at least 2, got {m}")
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    n = stats.n
    if n < m:
        return CsInterval(-math.inf, math.inf)
    a, _ = lai_threshold(m, alpha)
    # (b n)^{1/n} - 1 via expm1; b n >= n/m >= 1 keeps it nonnegative.
    factor = math.expm1((_lai_log_b(m, a) + math.log(n)) / n)
    radius = math.sqrt(stats.variance * max(factor, 0.0))
    mean = stats.mean
    return CsInterval(mean - radius, mean + radius)


def log_gauss_mix_martingale(stats: SampleStats, c_sq: float) -> float:
    """log of :func:`gauss_mix_martingale`; exactly 0 at n = 1."""
    if not (math.isfinite(c_sq) and c_sq > 0.0):
        raise DomainError(f"c_sq must be positive, got {c_sq}")
    _require_scaled_sample(stats)
    n = stats.n
    if n == 1:
        return 0.0
    nc = n + c_sq
    # (n + c^2) V - S^2, grouped as (n V - S^2) + c^2 V: the only
    # cancellation happens once, in the sample's own spread statistic,
    # and the c^2 V term then enters as a clean positive addend.  The
    # direct grouping loses the spread's low bits again for every c^2,
    # which made the Cauchy-mixture quadrature inconsistent with the
    # theta-space route on nearly degenerate samples.
    d = (n * stats.sum_sq - stats.sum * stats.sum) + c_sq * stats.sum_sq
    if d <= 0.0:
        # Impossible in exact arithmetic (d >= c^2 V_n > 0); only extreme
        # rounding could land here, and it means saturated evidence.
        return math.inf
    return 0.5 * (math.log(c_sq) - math.log(nc)) + 0.5 * n * (
        math.log(nc * stats.sum_sq) - math.log(d)
    )


def gauss_mix_martingale(stats: SampleStats, c_sq: float) -> float:
    """Test martingale from mixing h_{theta,n} over theta ~ N(0, 1/c^2):

        G_n^{(c)} = sqrt(c^2/(n+c^2)) ((n+c^2) V_n / ((n+c^2) V_n - S_n^2))^{n/2}.

    Starts (and stays, in expectation) at G_1 = 1 regardless of the data.
    """
    return _exp_or_inf(log_gauss_mix_martingale(stats, c_sq))


def gauss_mix_cs(stats: SampleStats, c_sq: float, alpha: float) -> CsInterval:
    """Closed-form confidence sequence from inverting the Gaussian mixture.

    With t = (alpha^2 c^2 / (n+c^2))^{1/n}, the squared radius is
    (n+c^2)(1-t) / [ {t (n+c^2) - c^2} ∨ 0 ] times the sample variance;
    a nonpositive denominator means the sequence is still uninformative
    and the interval is the whole line.
    """
    if not (math.isfinite(c_sq) and c_sq > 0.0):
        raise DomainError(f"c_sq must be positive, got {c_sq}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if stats.n < 1:
        raise DomainError("confidence sequence needs at least one observation")
    n = stats.n
    nc = n + c_sq
    log_t = (2.0 * math.log(alpha) + math.log(c_sq) - math.log(nc)) / n
    t = math.exp(log_t)
    denominator = t * nc - c_sq
    if denominator <= 0.0:
        return CsInterval(-math.inf, math.inf)
    rho_sq = nc * (1.0 - t) / denominator
    radius = math.sqrt(rho_sq * stats.variance)
    mean = stats.mean
    return CsInterval(mean - radius, mean + radius)


def optimal_c_sq(n: int, alpha: float) -> float:
    """Prior precision that approximately minimizes the CS radius at time n.

    Solves c^2/(n+c^2) = alpha^{2/(n-1)} 2^{-n/(n-1)} for c^2; with this
    choice the squared radius collapses to (1/r - 2) s_n^2, where r is
    the right-hand side, and is always finite.
    """
    if n < 2:
        raise DomainError(f"need n >= 2 to tune c^2, got {n}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    r = math.exp((2.0 * math.log(alpha) - n * math.log(2.0)) / (n - 1.0))
    if r >= 1.0:
        raise DomainError("tuning equation has no positive solution")
    return n * r / (1.0 - r)


def log_semi_one_sided(stats: SampleStats, c_sq: float) -> float:
    """log of :func:`semi_one_sided`; -inf whenever S_n <= 0."""
    if not (math.isfinite(c_sq) and c_sq > 0.0):
        raise DomainError(f"c_sq must be positive, got {c_sq}")
    _require_scaled_sample(stats)
    if stats.sum <= 0.0:
        return -math.inf
    log_g = log_gauss_mix_martingale(stats, c_sq)
    if log_g == math.inf:
        return math.inf
    log_g0 = 0.5 * (math.log(c_sq) - math.log(stats.n + c_sq))
    ratio = math.exp(log_g0 - log_g)
    if ratio >= 1.0:
        return -math.inf
    return math.log(2.0) + log_g + math.log1p(-ratio)


def semi_one_sided(stats: SampleStats, c_sq: float) -> float:
    """Semi-one-sided e-process 2 G_n^{(c)} - 2 G_n^{(c)}|_{S_n <- S_n ∧ 0}.

    The second term replaces S_n by min(S_n, 0), so the value is exactly
    0 whenever the running sum is nonpositive and otherwise equals
    2 (G_n^{(c)} - sqrt(c^2/(n+c^2)) (G with S_n = 0)).  Valid e-process
    for the point null N(0, sigma^2); its status under the composite
    one-sided null is not claimed.
    """
    log_value = log_semi_one_sided(stats, c_sq)
    return 0.0 if log_value == -math.inf else _exp_or_inf(log_value)


def log_jzs_mixture(
    stats: SampleStats, settings: Optional[QuadratureSettings] = None
) -> float:
    """log of the Cauchy-mixture e-value 1/B via the normal-scale-mixture
    identity: a standard Cauchy is N(0, 1/u^2) with u ~ N(0, 1), so the
    mixture equals E_{u}[G_n^{(u^2)}], a single smooth quadrature with the
    closed-form martingale as integrand.  Fast path for long streams;
    agrees with :func:`jzs_bayes_factor` (which follows the defining
    theta-integral) to quadrature accuracy.
    """
    _require_scaled_sample(stats)
    if stats.n == 1:
        return 0.0

    def log_f(u: float) -> float:
        return -0.5 * u * u - 0.5 * _LOG_2PI + log_gauss_mix_martingale(
            stats, u * u
        )

    # G^{(c^2)} peaks at roughly c^2 = (n V - S^2) / ((n-1) V); for
    # nearly degenerate samples that spike sits many decades below the
    # prior's own scale, so resolve the two regions separately.
    n = stats.n
    c_star_sq = (n * stats.sum_sq - stats.sum * stats.sum) / (
        (n - 1.0) * stats.sum_sq
    )
    if c_star_sq <= 0.0:
        # Degenerate direction: h grows like theta^{n-1} against the
        # prior's 1/theta^2 tail, so the mixture diverges.
        return math.inf
    c_star = math.sqrt(c_star_sq)
    if c_star < 0.05:
        cut = 10.0 * c_star
        parts = (
            integrate_log(log_f, 0.0, cut, settings),
            integrate_log(log_f, cut, math.inf, settings, peak_hint=1.0),
        )
        top = max(parts)
        if top == -math.inf:
            return -math.inf
        body = top + math.log(sum(math.exp(p - top) for p in parts))
    else:
        body = integrate_log(
            log_f, 0.0, math.inf, settings, peak_hint=max(c_star, 1.0)
        )
    return math.log(2.0) + body


def jzs_bayes_factor(
    stats: SampleStats, settings: Optional[QuadratureSettings] = None
) -> float:
    """JZS Bayes factor in favor of the null: B = 1 / ∫ h_theta dC(0,1).

    The Cauchy integral substitutes theta = tan(u) over (-pi/2, pi/2) so
    the adaptive rule works on a finite interval with the heavy tails
    absorbed exactly by the Jacobian (the Cauchy density times the
    Jacobian is the constant 1/pi).  1/B is an e-value for the null.

    B_1 = 1 exactly: with one observation the reduced likelihood ratio
    is 1 + erf(theta sgn(X_1) / sqrt(2)), whose odd part integrates to
    zero against the symmetric prior, so no quadrature is attempted.
    For a degenerate sample (S_n^2 = n V_n, n >= 2) the mixture integral
    diverges and B = 0 is returned: saturated evidence.
    """
    _require_scaled_sample(stats)
    if stats.n == 1:
        return 1.0
    if stats.n * stats.sum_sq - stats.sum * stats.sum <= 0.0:
        return 0.0

    def log_f(u: float) -> float:
        return log_si_likelihood_ratio(math.tan(u), stats, settings)

    log_mix = (
        integrate_log(log_f, -0.5 * math.pi, 0.5 * math.pi, settings)
        - math.log(math.pi)
    )
    return _exp_or_inf(-log_mix)
