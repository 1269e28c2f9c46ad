"""Universal-inference tests for the Gaussian mean.

The numerator of every process here is a product of plug-in Gaussian
densities evaluated at predictable parameter estimates; the denominator
is the null likelihood, either at fixed parameters (Z-test variants) or
maximized over the null (t-test variants, where the nuisance variance is
profiled out).  Ratios are carried in log space throughout — at
n ~ 10^4 they span hundreds of orders of magnitude.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError
from .stats import CsInterval, SampleStats

__all__ = [
    "EmpiricalEstimator",
    "NigEstimator",
    "PluginEstimator",
    "UiProcessState",
    "VARIANCE_FLOOR",
    "estimator_step",
    "log_ui_t_eprocess",
    "log_ui_t_one_sided",
    "log_ui_z_martingale",
    "log_ui_z_one_sided",
    "one_obs_ci",
    "ui_cs",
    "ui_observe",
    "ui_t_eprocess",
    "ui_t_one_sided",
    "ui_z_martingale",
    "ui_z_one_sided",
]

VARIANCE_FLOOR = 1e-12


def _exp_or_inf(log_value: float) -> float:
    """exp that saturates to +inf instead of raising; process values are
    extended reals and can genuinely outgrow the float range at n ~ 10^4."""
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


class PluginEstimator:
    """Predictable point estimates (mu_tilde, sigma_tilde) for the plug-in
    density.

    Estimates emitted at step n may depend only on observations
    1, ..., n; the process machinery queries :meth:`current` *before*
    absorbing each observation to keep the sequence predictable.  A
    variance estimate that falls in (0, 1e-12) is clamped to the floor
    and the ``clamped`` flag is raised.
    """

    burn_in: int = 0
    clamped: bool = False

    def current(self) -> tuple[float, float]:
        """Return (mu_tilde, sigma_tilde) given the data absorbed so far."""
        raise NotImplementedError

    def absorb(self, x: float) -> None:
        raise NotImplementedError

    def copy(self) -> "PluginEstimator":
        raise NotImplementedError

    def _apply_floor(self, var: float) -> float:
        if var < VARIANCE_FLOOR:
            if not self.clamped:
                warnings.warn(
                    "plug-in variance estimate fell below 1e-12; clamping",
                    RuntimeWarning,
                    stacklevel=3,
                )
            self.clamped = True
            return VARIANCE_FLOOR
        return var


class EmpiricalEstimator(PluginEstimator):
    """Running mean and population variance, with (0, 1) start-up values.

    Until the variance estimate is defined and positive it falls back to
    1, and the mean falls back to 0 before any data; the fallbacks double
    as the constants required of the estimate used for the very first
    observation.
    """

    def __init__(self, burn_in: int = 0):
        if burn_in < 0:
            raise DomainError("burn_in must be nonnegative")
        self.burn_in = burn_in
        self.clamped = False
        self._stats = SampleStats.empty()

    def current(self) -> tuple[float, float]:
        if self._stats.n == 0:
            return 0.0, 1.0
        var = self._stats.variance
        if var == 0.0:
            return self._stats.mean, 1.0
        return self._stats.mean, math.sqrt(self._apply_floor(var))

    def absorb(self, x: float) -> None:
        self._stats.add(x)

    def copy(self) -> "EmpiricalEstimator":
        out = EmpiricalEstimator(self.burn_in)
        out.clamped = self.clamped
        out._stats = self._stats.copy()
        return out


class NigEstimator(PluginEstimator):
    """Posterior-mean estimates under a normal-inverse-gamma prior.

    The prior has location ``mu0``, precision scale ``nu0`` and
    inverse-gamma shape/scale ``(a0, b0)``.  The emitted estimates are the
    posterior location mu_n and the posterior mean of the variance,
    beta_n / (alpha_n - 1); the latter requires a0 > 1 to be defined
    before any data arrive.
    """

    def __init__(
        self, mu0: float, nu0: float, a0: float, b0: float, burn_in: int = 0
    ):
        if not (nu0 > 0.0 and b0 > 0.0):
            raise DomainError("nu0 and b0 must be positive")
        if not a0 > 1.0:
            raise DomainError(
                "a0 must exceed 1 so the prior variance estimate is defined"
            )
        if burn_in < 0:
            raise DomainError("burn_in must be nonnegative")
        self.mu0 = float(mu0)
        self.nu0 = float(nu0)
        self.a0 = float(a0)
        self.b0 = float(b0)
        self.burn_in = burn_in
        self.clamped = False
        self._stats = SampleStats.empty()

    def posterior(self) -> tuple[float, float, float, float]:
        """Current (mu_n, nu_n, alpha_n, beta_n) of the conjugate update."""
        s = self._stats
        n = s.n
        if n == 0:
            return self.mu0, self.nu0, self.a0, self.b0
        nu_n = self.nu0 + n
        mu_n = (self.nu0 * self.mu0 + s.sum) / nu_n
        alpha_n = self.a0 + 0.5 * n
        xbar = s.mean
        centered_ss = n * s.variance
        beta_n = (
            self.b0
            + 0.5 * centered_ss
            + n * self.nu0 * (xbar - self.mu0) ** 2 / (2.0 * nu_n)
        )
        return mu_n, nu_n, alpha_n, beta_n

    def current(self) -> tuple[float, float]:
        mu_n, _, alpha_n, beta_n = self.posterior()
        var = self._apply_floor(beta_n / (alpha_n - 1.0))
        return mu_n, math.sqrt(var)

    def absorb(self, x: float) -> None:
        self._stats.add(x)

    def copy(self) -> "NigEstimator":
        out = NigEstimator(self.mu0, self.nu0, self.a0, self.b0, self.burn_in)
        out.clamped = self.clamped
        out._stats = self._stats.copy()
        return out


def estimator_step(
    est: PluginEstimator, x: float
) -> tuple[float, float, PluginEstimator]:
    """Absorb ``x`` and return the estimates for the next observation.

    Functional counterpart of the in-place update: the input estimator is
    untouched.
    """
    out = est.copy()
    out.absorb(x)
    mu, sigma = out.current()
    return mu, sigma, out


@dataclass
class UiProcessState:
    """Accumulated state of one universal-inference process.

    ``log_plugin_product`` carries the running numerator
    sum of [-log sigma_tilde - ((X - mu_tilde)/sigma_tilde)^2 / 2]; the
    2-pi factors cancel against the denominator and are never computed.
    During burn-in the estimator absorbs observations but the process is
    held at 1 — accumulation (including the null sum of squares) starts
    from scratch afterward.
    """

    estimator: PluginEstimator
    mu0: float = 0.0
    stats: SampleStats = field(default_factory=SampleStats.empty)
    log_plugin_product: float = 0.0
    seen: int = 0

    @classmethod
    def start(
        cls, estimator: Optional[PluginEstimator] = None, mu0: float = 0.0
    ) -> "UiProcessState":
        return cls(estimator=estimator if estimator is not None else EmpiricalEstimator(), mu0=mu0)

    def observe(self, x: float) -> None:
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"observation must be finite, got {x!r}")
        self.seen += 1
        if self.seen <= self.estimator.burn_in:
            self.estimator.absorb(x)
            return
        mu, sig = self.estimator.current()
        z = (x - mu) / sig
        self.log_plugin_product += -math.log(sig) - 0.5 * z * z
        self.stats.add(x)
        self.estimator.absorb(x)


def ui_observe(state: UiProcessState, x: float) -> None:
    """Feed one observation into the process state."""
    state.observe(x)


def log_ui_z_martingale(state: UiProcessState, mu: float, sigma: float) -> float:
    """log of :func:`ui_z_martingale`; the natural scale for growth rates."""
    if not sigma > 0.0:
        raise DomainError("sigma must be positive")
    n = state.stats.n
    if n == 0:
        return 0.0
    quad = (
        state.stats.sum_sq
        - 2.0 * mu * state.stats.sum
        + n * mu * mu
    ) / (2.0 * sigma * sigma)
    return state.log_plugin_product + n * math.log(sigma) + quad


def ui_z_martingale(state: UiProcessState, mu: float, sigma: float) -> float:
    """Test martingale for H0: X_i iid N(mu, sigma^2), both known.

    Ratio of the plug-in density product to the null density product.
    """
    return _exp_or_inf(log_ui_z_martingale(state, mu, sigma))


def log_ui_z_one_sided(state: UiProcessState, sigma: float) -> float:
    """log of :func:`ui_z_one_sided`."""
    if not sigma > 0.0:
        raise DomainError("sigma must be positive")
    n = state.stats.n
    if n == 0:
        return 0.0
    m = min(state.stats.mean, 0.0)
    quad = (state.stats.sum_sq - n * m * m) / (2.0 * sigma * sigma)
    return state.log_plugin_product + n * math.log(sigma) + quad


def ui_z_one_sided(state: UiProcessState, sigma: float) -> float:
    """E-process for H0: mean <= 0 with known variance sigma^2.

    The null likelihood is maximized at mu = min(mean, 0), which turns
    the quadratic term into (V_n - n (mean ∧ 0)^2) / (2 sigma^2).
    """
    return _exp_or_inf(log_ui_z_one_sided(state, sigma))


def _log_profiled_ratio(n: int, null_ss: float, log_plugin_product: float) -> float:
    """log of [ (null_ss / n)^{n/2} e^{n/2} * plug-in product ].

    ``null_ss`` is the sum of squares the null MLE profiles over; the
    closed form comes from plugging sigma_hat^2 = null_ss / n back into
    the Gaussian likelihood.
    """
    return 0.5 * n * (math.log(null_ss / n) + 1.0) + log_plugin_product


def log_ui_t_eprocess(state: UiProcessState) -> float:
    """log of :func:`ui_t_eprocess`; -inf for a sample degenerate at mu0."""
    n = state.stats.n
    if n == 0:
        return 0.0
    mu0 = state.mu0
    null_ss = (
        state.stats.sum_sq - 2.0 * mu0 * state.stats.sum + n * mu0 * mu0
    )
    if null_ss <= 0.0:
        return -math.inf
    return _log_profiled_ratio(n, null_ss, state.log_plugin_product)


def ui_t_eprocess(state: UiProcessState) -> float:
    """E-process for H0: X_i iid N(mu0, sigma^2), sigma unknown.

    Only the null's sum of squares is recentered at mu0; the plug-in
    numerator always works on the raw observations.  A sample sitting
    exactly on mu0 carries no evidence and yields 0.
    """
    log_value = log_ui_t_eprocess(state)
    return 0.0 if log_value == -math.inf else _exp_or_inf(log_value)


def log_ui_t_one_sided(state: UiProcessState) -> float:
    """log of :func:`ui_t_one_sided`."""
    n = state.stats.n
    if n == 0:
        return 0.0
    m = min(state.stats.mean, 0.0)
    null_ss = state.stats.sum_sq - n * m * m
    if null_ss <= 0.0:
        return -math.inf
    return _log_profiled_ratio(n, null_ss, state.log_plugin_product)


def ui_t_one_sided(state: UiProcessState) -> float:
    """E-process for H0: mean <= 0, variance unknown.

    Identical to :func:`ui_t_eprocess` at mu0 = 0 whenever the sample
    mean is nonnegative; otherwise the null sum of squares shrinks to
    V_n - n * mean^2.
    """
    log_value = log_ui_t_one_sided(state)
    return 0.0 if log_value == -math.inf else _exp_or_inf(log_value)


def _cs_radius(log_w: float, s_sq: float) -> float:
    """sqrt(W - s^2) evaluated as W^(1/2) * sqrt(1 - s^2 / W) in log space.

    W dominates the sample variance whenever the data admit any
    non-rejected mean, so the radicand is nonnegative up to rounding;
    a nonpositive radicand collapses the radius to zero.
    """
    z = s_sq * math.exp(-log_w)
    if not z < 1.0:
        return 0.0
    return math.exp(0.5 * log_w + 0.5 * math.log1p(-z))


def ui_cs(state: UiProcessState, alpha: float) -> CsInterval:
    """Confidence sequence from inverting the universal t e-process.

    The interval is mean ± sqrt(mean^2 - mean_sq + W_n) with
    W_n = alpha^(-2/n) e^(-1) exp(-2 log_plugin_product / n).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    n = float(state.stats.n)
    if n < 1:
        raise DomainError("confidence sequence needs at least one observation")
    lpp = state.log_plugin_product
    log_w = -2.0 * math.log(alpha) / n - 1.0 - 2.0 * lpp / n
    radius = _cs_radius(log_w, state.stats.variance)
    mean = state.stats.mean
    return CsInterval(mean - radius, mean + radius)


def one_obs_ci(
    x1: float,
    alpha: float,
    randomized: bool = False,
    u: Optional[float] = None,
) -> CsInterval:
    """Confidence interval for the mean from a single observation:
    [x1 ± (u_or_1 / alpha) exp((x1^2 - 1)/2)].

    With ``randomized`` set, an externally supplied uniform draw
    u ∈ (0, 1] tightens the radius by the factor u at the cost of
    exact-coverage rather than conservative guarantees.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if randomized:
        if u is None or not 0.0 < u <= 1.0:
            raise DomainError("randomized interval needs a uniform draw u in (0, 1]")
    elif u is not None:
        raise DomainError("u supplied without randomized=True")
    x1 = float(x1)
    if not math.isfinite(x1):
        raise DomainError("observation must be finite")
    # The expression tree below mirrors the n = 1 path of ui_cs with the
    # (0, 1) start-up estimates, so the two coincide bit for bit.
    z = (x1 - 0.0) / 1.0
    lpp = -math.log(1.0) - 0.5 * z * z
    log_w = -2.0 * math.log(alpha) / 1.0 - 1.0 - 2.0 * lpp / 1.0
    radius = _cs_radius(log_w, 0.0)
    if randomized:
        radius *= u
    return CsInterval(x1 - radius, x1 + radius)
