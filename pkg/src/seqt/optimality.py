"""Reference quantities that bound what any sequential t-test can achieve.

Nothing here looks at data except :func:`numeraire_evalue`, which scores a
single observation.  The rest are closed forms: Gaussian KL divergence, the
growth-rate ceiling no two-sided t-test process can beat, and the minimax
floor under which no valid confidence interval can shrink.
"""

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "EffectSize",
    "epower_ceiling",
    "kl_gauss",
    "log_numeraire_evalue",
    "minimax_lower_bound",
    "numeraire_evalue",
]


@dataclass(frozen=True)
class EffectSize:
    """A Gaussian alternative summarized by its standardized mean.

    Only the ratio ``mu / sigma`` matters to every consumer in this
    module; the two fields are kept separate because callers usually
    have them separately.
    """

    mu: float
    sigma: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu!r}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise DomainError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def theta(self) -> float:
        return self.mu / self.sigma


def kl_gauss(mu1: float, sig1_sq: float, mu2: float, sig2_sq: float) -> float:
    """KL divergence between two Gaussians, KL(N(mu1, sig1_sq) || N(mu2, sig2_sq))."""
    for name, value in (("mu1", mu1), ("mu2", mu2)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value!r}")
    for name, value in (("sig1_sq", sig1_sq), ("sig2_sq", sig2_sq)):
        if not (math.isfinite(value) and value > 0.0):
            raise DomainError(f"{name} must be a positive variance, got {value!r}")
    delta = mu1 - mu2
    return (
        0.5 * (math.log(sig2_sq) - math.log(sig1_sq))
        + (sig1_sq + delta * delta) / (2.0 * sig2_sq)
        - 0.5
    )


def epower_ceiling(effect: EffectSize, one_sided: bool = False) -> float:
    """Largest achievable growth rate per observation against ``effect``.

    Equals (1/2) log(1 + theta^2), computed as the KL divergence from the
    alternative to its closest null -- the variance-inflated N(0, 1+theta^2)
    -- so that the ceiling and :func:`kl_gauss` agree bit for bit at the
    projection point.  For a one-sided test the ceiling is flat at zero on
    the wrong side of the null.
    """
    theta = effect.theta
    if one_sided and theta < 0.0:
        theta = 0.0
    return kl_gauss(theta, 1.0, 0.0, 1.0 + theta * theta)


def minimax_lower_bound(alpha: float, n: int) -> float:
    """Half-width no valid level-alpha t-confidence interval can undercut.

    In the standardized scale (units of the sample standard deviation),
    for n observations: sqrt((6 alpha - 9 alpha^2)^(-2/n) - 1).  The bound
    is vacuous at alpha >= 1/3, where the quadratic reaches 1.
    """
    if not 0.0 < alpha < 1.0 / 3.0:
        raise DomainError(f"alpha must lie in (0, 1/3), got {alpha}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    base = alpha * (6.0 - 9.0 * alpha)
    return math.sqrt(math.expm1((-2.0 / n) * math.log(base)))


def log_numeraire_evalue(x1: float, effect: EffectSize) -> float:
    """Log of the single-observation likelihood ratio against the
    variance-inflated null: log dN(mu, sigma^2)/dN(0, mu^2+sigma^2) at x1.
    """
    if not math.isfinite(x1):
        raise DomainError(f"x1 must be finite, got {x1!r}")
    if effect.mu == 0.0:
        return 0.0  # the two measures coincide
    sig_sq = effect.sigma * effect.sigma
    inflated = effect.mu * effect.mu + sig_sq
    centered = x1 - effect.mu
    return (
        0.5 * (math.log(inflated) - math.log(sig_sq))
        - centered * centered / (2.0 * sig_sq)
        + x1 * x1 / (2.0 * inflated)
    )


def numeraire_evalue(x1: float, effect: EffectSize) -> float:
    """The e-value of a single observation against the composite null,
    scored by the alternative's reverse information projection.

    Its mean under any N(0, sigma0^2) is at most 1, with equality when
    sigma0^2 = mu^2 + sigma^2; its expected log under the alternative
    itself is exactly :func:`epower_ceiling`.
    """
    return math.exp(log_numeraire_evalue(x1, effect))
