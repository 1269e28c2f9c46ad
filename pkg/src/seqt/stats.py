"""Streaming sample statistics and shared sequential-testing machinery.

Everything downstream — the universal-inference processes, the
scale-invariant mixtures, the baselines — consumes observations through
:class:`SampleStats` and exposes its evidence through the
:class:`ProcessEvaluator` contract.  This module also carries the pieces
that are method-agnostic: Ville's rejection threshold, anytime-valid
p-values, the e-value adjuster, and numerical inversion of a process
family into a confidence interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Optional

from .errors import DegenerateSampleError, DomainError, NumericalError

__all__ = [
    "CsInterval",
    "Filtration",
    "ProcessEvaluator",
    "ProcessKind",
    "SampleStats",
    "adjust_evalue",
    "anytime_p_value",
    "invert_to_cs",
    "t_statistic",
    "update",
    "ville_threshold",
]

ProcessKind = Literal["martingale", "e-process", "extended-NSM"]
Filtration = Literal["canonical", "scale-invariant"]

_KINDS = ("martingale", "e-process", "extended-NSM")
_FILTRATIONS = ("canonical", "scale-invariant")


@dataclass
class SampleStats:
    """Running summaries of an observation stream.

    Keeps the count, the partial sum, the partial sum of squares and the
    number of strictly positive observations.  Sums are Kahan-compensated
    because the centered second moment ``sum_sq - sum**2 / n`` loses most
    of its digits to cancellation when the data have small variance.

    Raw observations are only retained when ``retain=True``; the median
    confidence sequence needs order statistics, everything else runs in
    constant memory.
    """

    n: int = 0
    sum: float = 0.0
    sum_sq: float = 0.0
    pos_count: int = 0
    retained: Optional[list[float]] = None
    _sum_c: float = field(default=0.0, repr=False)
    _sum_sq_c: float = field(default=0.0, repr=False)

    @classmethod
    def empty(cls, retain: bool = False) -> "SampleStats":
        return cls(retained=[] if retain else None)

    def add(self, x: float) -> None:
        """Fold one observation into the summaries, in place."""
        x = float(x)
        if not math.isfinite(x):
            raise DomainError(f"observation must be finite, got {x!r}")
        self.n += 1
        y = x - self._sum_c
        t = self.sum + y
        self._sum_c = (t - self.sum) - y
        self.sum = t
        xx = x * x
        y = xx - self._sum_sq_c
        t = self.sum_sq + y
        self._sum_sq_c = (t - self.sum_sq) - y
        self.sum_sq = t
        if x > 0.0:
            self.pos_count += 1
        if self.retained is not None:
            self.retained.append(x)

    def extend(self, xs: Iterable[float]) -> None:
        for x in xs:
            self.add(x)

    def copy(self) -> "SampleStats":
        return SampleStats(
            n=self.n,
            sum=self.sum,
            sum_sq=self.sum_sq,
            pos_count=self.pos_count,
            retained=None if self.retained is None else list(self.retained),
            _sum_c=self._sum_c,
            _sum_sq_c=self._sum_sq_c,
        )

    @property
    def mean(self) -> float:
        if self.n == 0:
            raise DomainError("mean of an empty sample")
        return self.sum / self.n

    @property
    def mean_sq(self) -> float:
        if self.n == 0:
            raise DomainError("mean square of an empty sample")
        return self.sum_sq / self.n

    @property
    def variance(self) -> float:
        """Population variance s_n^2 (divisor n, not n-1)."""
        if self.n == 0:
            raise DomainError("variance of an empty sample")
        n = float(self.n)
        v = (n * self.sum_sq - self.sum * self.sum) / (n * n)
        # Cauchy-Schwarz guarantees nonnegativity; rounding may not.
        return v if v > 0.0 else 0.0


def update(stats: SampleStats, x: float) -> SampleStats:
    """Return a new :class:`SampleStats` with ``x`` folded in.

    The input is left untouched; evaluators that stream millions of
    points use the in-place :meth:`SampleStats.add` instead.
    """
    out = stats.copy()
    out.add(x)
    return out


class ProcessEvaluator:
    """Contract shared by every sequential test process in the package.

    Subclasses accept observations one at a time through
    :meth:`observe` and report the current amount of evidence against
    their null through :attr:`value`.  ``kind`` says what the process is
    (a test martingale, an e-process, or an extended nonnegative
    supermartingale, which may take the value ``+inf``); ``filtration``
    says which information stream the guarantee is stated under.  Both
    tags are fixed for the evaluator's lifetime.
    """

    kind: ProcessKind = "e-process"
    filtration: Filtration = "canonical"

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.kind not in _KINDS:
            raise TypeError(f"unknown process kind {cls.kind!r}")
        if cls.filtration not in _FILTRATIONS:
            raise TypeError(f"unknown filtration {cls.filtration!r}")

    def observe(self, x: float) -> None:
        raise NotImplementedError

    @property
    def value(self) -> float:
        """Current process value; nonnegative, and finite unless the
        evaluator is an extended-NSM."""
        raise NotImplementedError

    def feed(self, xs: Iterable[float]) -> list[float]:
        """Observe ``xs`` in order and return the value after each one."""
        out = []
        for x in xs:
            self.observe(x)
            out.append(self.value)
        return out


@dataclass(frozen=True)
class CsInterval:
    """One confidence interval, possibly unbounded on either side."""

    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise DomainError("interval endpoints cannot be NaN")
        if self.lower > self.upper:
            raise DomainError(
                f"lower endpoint {self.lower} exceeds upper {self.upper}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)


def t_statistic(stats: SampleStats, mu0: float = 0.0) -> float:
    """The t-statistic sqrt(n-1) (S_n - n mu0) / sqrt(n V_n - S_n^2).

    Requires at least two observations that are not all equal.
    """
    if stats.n < 2:
        raise DomainError("t-statistic needs n >= 2")
    n = float(stats.n)
    denom_sq = n * stats.sum_sq - stats.sum * stats.sum
    if denom_sq <= 0.0:
        raise DegenerateSampleError(
            "all observations equal; t-statistic undefined"
        )
    return math.sqrt(n - 1.0) * (stats.sum - n * mu0) / math.sqrt(denom_sq)


def ville_threshold(alpha: float) -> float:
    """Rejection threshold 1/alpha for a unit-initialized test process."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return 1.0 / alpha


def anytime_p_value(trajectory: Iterable[float]) -> float:
    """Anytime-valid p-value 1 ∧ 1/max(trajectory).

    The running maximum only grows as the trajectory extends, so the
    p-value is monotone non-increasing; an empty trajectory carries no
    evidence and maps to 1.  A trajectory that hits ``+inf`` (possible
    for extended-NSM evaluators) yields p = 0.
    """
    best = 0.0
    for v in trajectory:
        v = float(v)
        if math.isnan(v) or v < 0.0:
            raise DomainError(f"process values must be nonnegative, got {v!r}")
        if v > best:
            best = v
    if best <= 1.0:
        return 1.0
    return 1.0 / best


def adjust_evalue(x: float) -> float:
    """Convert a final e-value into one valid at the running maximum.

    Implements f(x) = (y - 1 - log y) / log(y)^2 with y = max(x, 1+1e-9);
    the clamp sidesteps the removable 0/0 at x = 1, where f tends to 1/2.
    """
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"e-value must be nonnegative, got {x!r}")
    d = max(x, 1.0 + 1e-9) - 1.0
    log_y = math.log1p(d)
    return (d - log_y) / (log_y * log_y)


_MAX_DOUBLINGS = 240
_MAX_BISECTIONS = 200


def _expand(
    family: Callable[[float], float],
    inside: float,
    direction: float,
    step0: float,
    threshold: float,
) -> Optional[tuple[float, float]]:
    """Walk outward from a sub-threshold point until the process crosses
    the threshold.  Returns a bracket (still_below, at_or_above), or None
    when the family never reaches the threshold on this side."""
    below = inside
    step = step0
    for _ in range(_MAX_DOUBLINGS):
        candidate = inside + direction * step
        if not math.isfinite(candidate):
            return None
        if family(candidate) >= threshold:
            return below, candidate
        below = candidate
        step *= 2.0
    return None


def _bisect_boundary(
    family: Callable[[float], float],
    below: float,
    above: float,
    threshold: float,
) -> float:
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (below + above)
        if mid == below or mid == above:
            break
        if family(mid) < threshold:
            below = mid
        else:
            above = mid
        if abs(above - below) <= 1e-9 * max(1.0, abs(below), abs(above)):
            break
    return 0.5 * (below + above)


def invert_to_cs(
    process_family: Callable[[float], float],
    alpha: float,
    search_center: float = 0.0,
    search_scale: float = 1.0,
) -> CsInterval:
    """Invert mu0 -> process value into the confidence set
    {mu0 : value(mu0) < 1/alpha}.

    Assumes the family is quasi-convex in mu0 (every family in this
    package is), so the confidence set is an interval.  Each endpoint is
    located by doubling steps outward from ``search_center`` followed by
    bisection to a relative tolerance of 1e-9; a side where the process
    never reaches the threshold is reported as infinite.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not (math.isfinite(search_scale) and search_scale > 0.0):
        raise DomainError("search_scale must be positive and finite")
    threshold = 1.0 / alpha

    raw_family = process_family

    def process_family(mu: float) -> float:
        # Far from the data a family may overflow the float range; that
        # is unambiguous rejection, not a failure.
        try:
            return raw_family(mu)
        except OverflowError:
            return math.inf

    center = search_center
    if process_family(center) >= threshold:
        # Hunt for a sub-threshold point: ternary search for the minimum
        # over progressively wider brackets around the center.
        found = False
        for widen in range(8):
            lo = center - search_scale * 4.0**widen
            hi = center + search_scale * 4.0**widen
            for _ in range(120):
                m1 = lo + (hi - lo) / 3.0
                m2 = hi - (hi - lo) / 3.0
                if process_family(m1) <= process_family(m2):
                    hi = m2
                else:
                    lo = m1
            candidate = 0.5 * (lo + hi)
            if process_family(candidate) < threshold:
                center = candidate
                found = True
                break
        if not found:
            raise NumericalError(
                "no parameter value keeps the process below 1/alpha; "
                "the confidence set appears empty"
            )

    up = _expand(process_family, center, +1.0, search_scale, threshold)
    down = _expand(process_family, center, -1.0, search_scale, threshold)
    upper = (
        math.inf if up is None else _bisect_boundary(process_family, *up, threshold)
    )
    lower = (
        -math.inf
        if down is None
        else _bisect_boundary(process_family, *down, threshold)
    )
    return CsInterval(lower, upper)
