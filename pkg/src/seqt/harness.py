"""Engines behind the command-line interface.

Everything the CLI does — streaming a data file through a method,
running a seeded Monte-Carlo experiment, replaying a dataset across
several methods — is a plain function here, so tests and notebooks can
drive the same machinery without argv in the way.

A "method" bundles up to two views of one procedure: a log e-value for
the null at ``mu0`` and a confidence sequence for the mean.  Methods
that only bet (jzs, semi-one-sided, betabinom, the one-sided universal
test) have no interval; methods that only estimate (plugin, median,
classical) have no e-value.  Observations are centered at ``mu0``
before any betting process sees them, and intervals are reported on the
original scale.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .baselines import (
    StitchParams,
    classical_t_ci,
    log_median_betabinom,
    median_cs,
    plugin_t_cs,
)
from .errors import DataError, DomainError
from .rng import ReplicationStream
from .scale_invariant import (
    gauss_mix_cs,
    lai_cs,
    log_gauss_mix_martingale,
    log_jzs_mixture,
    log_lai_ensm,
    log_semi_one_sided,
)
from .stats import CsInterval, SampleStats
from .universal import (
    EmpiricalEstimator,
    NigEstimator,
    UiProcessState,
    log_ui_t_eprocess,
    log_ui_t_one_sided,
    ui_cs,
    ui_observe,
)

__all__ = [
    "DistSpec",
    "MethodParams",
    "RepRecord",
    "SimConfig",
    "aggregate_records",
    "cs_method_names",
    "cs_trajectory",
    "eprocess_method_names",
    "eprocess_trajectory",
    "format_value",
    "method_is_fixed_n_only",
    "read_observations",
    "replay_file",
    "resolve_method",
    "simulate",
]


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------


def format_value(x) -> str:
    """Fixed text form for one CSV cell.

    Floats use repr (shortest round-trip form), non-finite values the
    literals inf/-inf/nan, booleans true/false, missing values nan.
    Stability of this function is what makes output files diffable.
    """
    if x is None:
        return "nan"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))  # crossing times and counts read as integers
    return repr(x)


def _json_ready(x):
    if isinstance(x, float) and not math.isfinite(x):
        return format_value(x)
    return x


# ---------------------------------------------------------------------------
# data sources
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DistSpec:
    """One data-generating distribution, or a file standing in for one.

    ``scale`` is the standard deviation for the normal kind and the
    half-width for the shifted uniform.  A file source replays the same
    observations in every replication and has no known mean, so
    miscoverage is not measured against it.
    """

    kind: str
    mu: float = 0.0
    scale: float = 1.0
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("normal", "uniform", "file"):
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "file":
            if not self.path:
                raise DomainError("file distribution needs a path")
            return
        if not (math.isfinite(self.mu) and math.isfinite(self.scale)):
            raise DomainError("distribution parameters must be finite")
        if not self.scale > 0.0:
            raise DomainError(
                f"distribution scale must be positive, got {self.scale}"
            )

    @classmethod
    def parse(cls, text: str) -> "DistSpec":
        """Parse ``normal:mu,sigma`` / ``uniform:mu,half_width`` /
        ``file:path`` (bare ``normal`` and ``uniform`` mean mu=0, scale=1).
        """
        kind, _, rest = text.partition(":")
        kind = kind.strip().replace("_", "-")
        if kind in ("uniform-shifted", "shifted-uniform"):
            kind = "uniform"
        if kind == "file":
            if not rest:
                raise DomainError("file distribution needs a path, e.g. file:obs.csv")
            return cls(kind="file", path=rest)
        if kind not in ("normal", "uniform"):
            raise DomainError(f"unknown distribution {text!r}")
        if not rest:
            return cls(kind=kind)
        parts = rest.split(",")
        if len(parts) != 2:
            raise DomainError(
                f"{kind} takes two parameters, e.g. {kind}:0,1; got {text!r}"
            )
        try:
            mu, scale = float(parts[0]), float(parts[1])
        except ValueError:
            raise DomainError(f"could not parse {text!r}") from None
        return cls(kind=kind, mu=mu, scale=scale)

    @property
    def mean(self) -> Optional[float]:
        """The true mean, when the source has one."""
        if self.kind == "file":
            return None
        return self.mu

    def draw(self, stream: ReplicationStream, count: int) -> np.ndarray:
        if self.kind == "normal":
            return self.mu + self.scale * stream.gaussians(count)
        if self.kind == "uniform":
            return self.mu + self.scale * (2.0 * stream.uniforms(count) - 1.0)
        raise DomainError("file sources are read, not drawn")


def read_observations(path: str) -> list[float]:
    """One observation per line; blank lines and ``#`` comments skipped."""
    values: list[float] = []
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                text = line.strip()
                if not text or text.startswith("#"):
                    continue
                try:
                    x = float(text)
                except ValueError:
                    raise DataError(
                        f"{path}: line {lineno}: could not parse {text!r} as a number"
                    ) from None
                if not math.isfinite(x):
                    raise DataError(
                        f"{path}: line {lineno}: observation must be finite, got {text!r}"
                    )
                values.append(x)
    except OSError as exc:
        raise DataError(f"could not read {path}: {exc.strerror}") from None
    if not values:
        raise DataError(f"{path}: no observations found")
    return values


# ---------------------------------------------------------------------------
# the method registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MethodParams:
    """Hyperparameters shared across the method registry.

    ``prior`` switches the universal processes from empirical plug-in
    estimates to the normal-inverse-gamma posterior (mu, nu, a, b), with
    the location understood on the centered scale (relative to mu0).
    """

    mu0: float = 0.0
    c_sq: float = 1.0
    lai_m: int = 2
    eta: float = 0.5
    stitch_s: float = 1.25
    prior: Optional[tuple[float, float, float, float]] = None
    burn_in: int = 0

    def __post_init__(self):
        if not math.isfinite(self.mu0):
            raise DomainError("mu0 must be finite")
        if self.burn_in < 0:
            raise DomainError("burn-in must be nonnegative")
        if self.prior is not None and len(self.prior) != 4:
            raise DomainError("prior must be the quadruple mu,nu,a,b")

    def stitch(self) -> StitchParams:
        return StitchParams(eta=self.eta, s=self.stitch_s)


class _MethodState:
    """Accumulators for one streamed trajectory."""

    __slots__ = ("raw", "shifted", "ui")

    def __init__(self, raw, shifted, ui):
        self.raw = raw
        self.shifted = shifted
        self.ui = ui


@dataclass(frozen=True)
class _MethodSpec:
    retain: bool = False
    wants_shifted: bool = False
    wants_ui: bool = False
    fixed_n_only: bool = False
    log_evalue: Optional[Callable[[_MethodState, MethodParams], float]] = None
    interval: Optional[
        Callable[[_MethodState, MethodParams, float], CsInterval]
    ] = None


def _ui_cs_recentered(state: _MethodState, params: MethodParams, alpha: float):
    # While burn-in is still feeding the estimator the process itself has
    # absorbed nothing, so the interval is the whole line.
    if state.ui.stats.n < 1:
        return CsInterval(-math.inf, math.inf)
    inner = ui_cs(state.ui, alpha)
    if params.mu0 == 0.0:
        return inner
    return CsInterval(inner.lower + params.mu0, inner.upper + params.mu0)


def _classical_interval(state: _MethodState, params: MethodParams, alpha: float):
    # One observation with unknown variance pins down nothing; the only
    # valid t-based statement is the whole line, same as median before
    # its activation time.
    if state.raw.n < 2:
        return CsInterval(-math.inf, math.inf)
    return classical_t_ci(state.raw, alpha)


def _plugin_interval(state: _MethodState, params: MethodParams, alpha: float):
    if state.raw.n < 2:
        return CsInterval(-math.inf, math.inf)
    return plugin_t_cs(state.raw, alpha, params.stitch())


_METHODS: dict[str, _MethodSpec] = {
    "gauss-mix": _MethodSpec(
        wants_shifted=True,
        log_evalue=lambda s, p: log_gauss_mix_martingale(s.shifted, p.c_sq),
        interval=lambda s, p, a: gauss_mix_cs(s.raw, p.c_sq, a),
    ),
    "semi-one-sided": _MethodSpec(
        wants_shifted=True,
        log_evalue=lambda s, p: log_semi_one_sided(s.shifted, p.c_sq),
    ),
    "lai": _MethodSpec(
        wants_shifted=True,
        log_evalue=lambda s, p: log_lai_ensm(s.shifted),
        interval=lambda s, p, a: lai_cs(s.raw, p.lai_m, a),
    ),
    "ui": _MethodSpec(
        wants_ui=True,
        log_evalue=lambda s, p: log_ui_t_eprocess(s.ui),
        interval=_ui_cs_recentered,
    ),
    "ui-one-sided": _MethodSpec(
        wants_ui=True,
        log_evalue=lambda s, p: log_ui_t_one_sided(s.ui),
    ),
    "jzs": _MethodSpec(
        wants_shifted=True,
        log_evalue=lambda s, p: log_jzs_mixture(s.shifted),
    ),
    "betabinom": _MethodSpec(
        wants_shifted=True,
        log_evalue=lambda s, p: log_median_betabinom(s.shifted),
    ),
    "plugin": _MethodSpec(
        interval=_plugin_interval,
    ),
    "median": _MethodSpec(
        retain=True,
        interval=lambda s, p, a: median_cs(s.raw, a),
    ),
    "classical": _MethodSpec(
        fixed_n_only=True,
        interval=_classical_interval,
    ),
}

_ALIASES = {"lai-ensm": "lai", "ui-t": "ui", "ui-t-one-sided": "ui-one-sided"}


def _resolve(method: str) -> tuple[str, _MethodSpec]:
    name = _ALIASES.get(method, method)
    spec = _METHODS.get(name)
    if spec is None:
        known = ", ".join(sorted(set(_METHODS) | set(_ALIASES)))
        raise DomainError(f"unknown method {method!r} (known: {known})")
    return name, spec


def eprocess_method_names() -> list[str]:
    return sorted(n for n, s in _METHODS.items() if s.log_evalue is not None)


def cs_method_names() -> list[str]:
    return sorted(n for n, s in _METHODS.items() if s.interval is not None)


def method_is_fixed_n_only(method: str) -> bool:
    return _resolve(method)[1].fixed_n_only


def resolve_method(method: str) -> str:
    """Canonical name for ``method``, unfolding aliases; DomainError if unknown."""
    return _resolve(method)[0]


def _new_state(spec: _MethodSpec, params: MethodParams) -> _MethodState:
    raw = SampleStats.empty(retain=spec.retain)
    shifted = SampleStats.empty() if spec.wants_shifted else None
    ui = None
    if spec.wants_ui:
        if params.prior is not None:
            estimator = NigEstimator(*params.prior, burn_in=params.burn_in)
        else:
            estimator = EmpiricalEstimator(burn_in=params.burn_in)
        ui = UiProcessState.start(estimator)
    return _MethodState(raw, shifted, ui)


def _observe(state: _MethodState, x: float, params: MethodParams) -> None:
    state.raw.add(x)
    if state.shifted is not None:
        state.shifted.add(x - params.mu0)
    if state.ui is not None:
        ui_observe(state.ui, x - params.mu0)


# ---------------------------------------------------------------------------
# single trajectories
# ---------------------------------------------------------------------------


def eprocess_trajectory(
    method: str, params: MethodParams, observations: Iterable[float]
) -> list[float]:
    """Log e-values after each observation."""
    name, spec = _resolve(method)
    if spec.log_evalue is None:
        raise DomainError(f"method {name!r} has no e-process")
    state = _new_state(spec, params)
    out = []
    for x in observations:
        _observe(state, x, params)
        out.append(spec.log_evalue(state, params))
    return out


def cs_trajectory(
    method: str,
    params: MethodParams,
    observations: Iterable[float],
    alpha: float,
) -> list[CsInterval]:
    """Confidence intervals after each observation."""
    name, spec = _resolve(method)
    if spec.interval is None:
        raise DomainError(f"method {name!r} has no confidence sequence")
    state = _new_state(spec, params)
    out = []
    for x in observations:
        _observe(state, x, params)
        out.append(spec.interval(state, params, alpha))
    return out


# ---------------------------------------------------------------------------
# the Monte-Carlo experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    """One seeded experiment: a source, a method, and a stopping horizon."""

    dist: DistSpec
    n_max: int
    reps: int
    seed: int
    alpha: float
    method: str
    params: MethodParams = field(default_factory=MethodParams)

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError(f"reps must be at least 1, got {self.reps}")
        if self.n_max < 1:
            raise DomainError(f"n_max must be at least 1, got {self.n_max}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        _resolve(self.method)


@dataclass(frozen=True)
class RepRecord:
    """Summary of one replication.

    ``crossed``/``first_crossing``/``anytime_p`` are None/inf/nan-coded
    when the method has no e-process, and ``miscovered``/``final_width``
    likewise when it has no interval (or the source no known mean).
    """

    rep: int
    crossed: Optional[bool]
    first_crossing: float
    miscovered: Optional[bool]
    final_width: float
    anytime_p: float

    def row(self) -> str:
        return ",".join(
            format_value(v)
            for v in (
                self.rep,
                self.crossed,
                self.first_crossing,
                self.miscovered,
                self.final_width,
                self.anytime_p,
            )
        )


REP_HEADER = "rep,crossed,first_crossing,miscovered,final_width,anytime_p"


def _rep_observations(config: SimConfig, rep: int, file_data) -> np.ndarray:
    if config.dist.kind == "file":
        if len(file_data) < config.n_max:
            raise DataError(
                f"{config.dist.path}: {len(file_data)} observations cannot "
                f"fill n_max={config.n_max}"
            )
        return np.asarray(file_data[: config.n_max])
    return config.dist.draw(
        ReplicationStream(config.seed, rep), config.n_max
    )


def _simulate_rep(config: SimConfig, rep: int, file_data=None) -> RepRecord:
    name, spec = _resolve(config.method)
    xs = _rep_observations(config, rep, file_data)
    state = _new_state(spec, config.params)
    threshold = -math.log(config.alpha)

    sup_log = -math.inf
    first: float = math.inf
    miscovered = False
    interval = None
    truth = config.dist.mean
    for i, x in enumerate(xs, start=1):
        _observe(state, float(x), config.params)
        if spec.log_evalue is not None:
            log_value = spec.log_evalue(state, config.params)
            if log_value > sup_log:
                sup_log = log_value
            if first == math.inf and log_value >= threshold:
                first = i
        if spec.interval is not None:
            interval = spec.interval(state, config.params, config.alpha)
            if truth is not None and not interval.contains(truth):
                miscovered = True

    if spec.log_evalue is None:
        crossed, first, anytime_p = None, math.nan, math.nan
    else:
        crossed = sup_log >= threshold
        try:
            anytime_p = min(1.0, math.exp(-sup_log))
        except OverflowError:
            anytime_p = 1.0
    if spec.interval is None:
        miscovered_out, final_width = None, math.nan
    else:
        miscovered_out = miscovered if truth is not None else None
        final_width = interval.width
    return RepRecord(
        rep=rep,
        crossed=crossed,
        first_crossing=first,
        miscovered=miscovered_out,
        final_width=final_width,
        anytime_p=anytime_p,
    )


def _simulate_range(config: SimConfig, lo: int, hi: int) -> list[RepRecord]:
    file_data = (
        read_observations(config.dist.path)
        if config.dist.kind == "file"
        else None
    )
    return [_simulate_rep(config, rep, file_data) for rep in range(lo, hi)]


def simulate(config: SimConfig, workers: int = 1) -> list[RepRecord]:
    """Run every replication and return the records in replication order.

    With ``workers > 1`` the replication range is split across processes;
    each replication derives its own substream from (seed, rep), so the
    partition cannot affect any value and outputs are byte-identical to
    a serial run.
    """
    if workers < 1:
        raise DomainError(f"workers must be at least 1, got {workers}")
    if workers == 1 or config.reps == 1:
        return _simulate_range(config, 0, config.reps)
    workers = min(workers, config.reps)
    bounds = np.linspace(0, config.reps, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = pool.map(
            _simulate_range,
            [config] * workers,
            bounds[:-1].tolist(),
            bounds[1:].tolist(),
        )
        return [record for chunk in chunks for record in chunk]


def _rate_fields(values: Sequence[Optional[bool]]) -> tuple:
    flags = [v for v in values if v is not None]
    if not flags:
        return None, None
    rate = sum(flags) / len(flags)
    return rate, math.sqrt(rate * (1.0 - rate) / len(flags))


def aggregate_records(records: Sequence[RepRecord]) -> dict:
    """The JSON summary sidecar: rates, mean width, standard errors."""
    crossing_rate, crossing_se = _rate_fields([r.crossed for r in records])
    miss_rate, miss_se = _rate_fields([r.miscovered for r in records])
    widths = [r.final_width for r in records if not math.isnan(r.final_width)]
    if widths:
        mean_width = float(np.mean(widths))
        if len(widths) > 1 and math.isfinite(mean_width):
            mean_width_se = float(
                np.std(widths, ddof=1) / math.sqrt(len(widths))
            )
        else:
            mean_width_se = None
    else:
        mean_width, mean_width_se = None, None
    summary = {
        "reps": len(records),
        "crossing_rate": crossing_rate,
        "crossing_rate_se": crossing_se,
        "miscoverage_rate": miss_rate,
        "miscoverage_rate_se": miss_se,
        "mean_width": mean_width,
        "mean_width_se": mean_width_se,
    }
    return {k: _json_ready(v) for k, v in summary.items()}


def summary_json(records: Sequence[RepRecord]) -> str:
    return json.dumps(aggregate_records(records), indent=2) + "\n"


# ---------------------------------------------------------------------------
# replaying a data file across methods
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayReport:
    method: str
    n: int = 0
    log_trajectory: tuple[float, ...] = ()
    error: Optional[str] = None

    @property
    def max_log(self) -> float:
        return max(self.log_trajectory)

    @property
    def anytime_p(self) -> float:
        try:
            return min(1.0, math.exp(-self.max_log))
        except OverflowError:
            return 1.0

    def first_crossing(self, alpha: float) -> Optional[int]:
        threshold = -math.log(alpha)
        for i, value in enumerate(self.log_trajectory, start=1):
            if value >= threshold:
                return i
        return None

    def line(self, alpha: float) -> str:
        if self.error is not None:
            return f"method={self.method} error={self.error}"
        try:
            max_e = math.exp(self.max_log)
        except OverflowError:
            max_e = math.inf
        crossing = self.first_crossing(alpha)
        return (
            f"method={self.method} n={self.n}"
            f" max_e={format_value(max_e)}"
            f" anytime_p={format_value(self.anytime_p)}"
            f" first_crossing={crossing if crossing is not None else 'none'}"
        )


def replay_file(
    path: str,
    methods: Sequence[str],
    alpha: float,
    params: MethodParams,
) -> list[ReplayReport]:
    """Stream one file through each method's e-process independently.

    Method-contract failures (say, a degenerate sample under a
    scale-invariant process) are captured per method so the remaining
    methods still report.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    observations = read_observations(path)
    reports = []
    for method in methods:
        name, _ = _resolve(method)
        try:
            logs = eprocess_trajectory(name, params, observations)
        except (DomainError, ArithmeticError) as exc:
            reports.append(ReplayReport(method=name, error=str(exc)))
            continue
        reports.append(
            ReplayReport(
                method=name, n=len(logs), log_trajectory=tuple(logs)
            )
        )
    return reports
