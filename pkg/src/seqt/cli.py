"""Command-line interface.

Five subcommands: ``eprocess`` and ``cs`` emit per-step trajectories,
``simulate`` runs a seeded Monte-Carlo experiment with a JSON summary
sidecar, ``bounds`` prints the reference quantities for a design point,
and ``replay`` streams a data file through several methods at once.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional

from .errors import DataError, DomainError, NumericalError
from .harness import (
    REP_HEADER,
    DistSpec,
    MethodParams,
    SimConfig,
    cs_method_names,
    cs_trajectory,
    eprocess_method_names,
    eprocess_trajectory,
    format_value,
    method_is_fixed_n_only,
    read_observations,
    replay_file,
    resolve_method,
    simulate,
    summary_json,
)
from .optimality import EffectSize, epower_ceiling, minimax_lower_bound
from .rng import ReplicationStream
from .scale_invariant import optimal_c_sq

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures routed to exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _parse_prior(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            "prior must be the NIG quadruple mu,nu,a,b"
        )
    try:
        mu, nu, a, b = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"could not parse prior {text!r}")
    return mu, nu, a, b


def _add_method_flags(parser: _Parser, repeatable_method: bool = False) -> None:
    if repeatable_method:
        parser.add_argument(
            "--method",
            action="append",
            help="repeatable: methods to replay",
        )
    else:
        parser.add_argument("--method", help="method name (see command help)")
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument(
        "--mu0",
        type=float,
        default=0.0,
        help="null location; streams are centered here before betting",
    )
    parser.add_argument(
        "--c-sq",
        default="1.0",
        help="Gaussian mixture prior precision c^2, or the word "
        "'optimal' to tune it for the horizon via optimal_c_sq",
    )
    parser.add_argument("--lai-m", type=int, default=2)
    parser.add_argument("--eta", type=float, default=0.5)
    parser.add_argument("--stitch-s", type=float, default=1.25)
    parser.add_argument(
        "--prior",
        type=_parse_prior,
        default=None,
        help="normal-inverse-gamma quadruple mu,nu,a,b for the universal "
        "methods (location on the centered scale)",
    )
    parser.add_argument("--burn-in", type=int, default=0)


def _add_source_flags(parser: _Parser) -> None:
    parser.add_argument(
        "--dist",
        default="normal:0,1",
        help="normal:mu,sigma | uniform:mu,half_width | file:path",
    )
    parser.add_argument("--n-max", type=int, default=100)
    parser.add_argument("--reps", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--input", help="read observations from this CSV instead of --dist"
    )
    parser.add_argument("--out", help="write output here instead of stdout")


def _params_from(args) -> MethodParams:
    c_sq = args.c_sq
    if c_sq != "optimal":
        try:
            c_sq = float(c_sq)
        except ValueError:
            raise DomainError(
                f"--c-sq must be a number or 'optimal', got {c_sq!r}"
            ) from None
    return MethodParams(
        mu0=args.mu0,
        c_sq=1.0 if c_sq == "optimal" else c_sq,
        lai_m=args.lai_m,
        eta=args.eta,
        stitch_s=args.stitch_s,
        prior=args.prior,
        burn_in=args.burn_in,
    )


def _maybe_tune(args, params: MethodParams) -> MethodParams:
    """Resolve --c-sq optimal against the run's horizon."""
    if args.c_sq != "optimal":
        return params
    if getattr(args, "input", None):
        horizon = len(read_observations(args.input))
    else:
        horizon = args.n_max
    return replace(params, c_sq=optimal_c_sq(horizon, args.alpha))


def _require_method(args, known: list[str]) -> str:
    if not args.method:
        raise _UsageError(f"--method is required (one of: {', '.join(known)})")
    try:
        name = resolve_method(args.method)
    except DomainError as exc:
        raise _UsageError(str(exc)) from None
    if name not in known:
        raise _UsageError(
            f"method {args.method!r} does not fit this command "
            f"(one of: {', '.join(known)})"
        )
    return args.method


def _iter_reps(args):
    """Yield (rep, observations) for trajectory commands."""
    if args.input:
        yield 0, read_observations(args.input)
        return
    dist = DistSpec.parse(args.dist)
    if dist.kind == "file":
        data = read_observations(dist.path)
        if len(data) < args.n_max:
            raise DataError(
                f"{dist.path}: {len(data)} observations cannot fill "
                f"n_max={args.n_max}"
            )
        for rep in range(args.reps):
            yield rep, data[: args.n_max]
        return
    if args.reps < 1:
        raise DomainError(f"reps must be at least 1, got {args.reps}")
    if args.n_max < 1:
        raise DomainError(f"n_max must be at least 1, got {args.n_max}")
    for rep in range(args.reps):
        yield rep, dist.draw(ReplicationStream(args.seed, rep), args.n_max)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _wrap_stream_errors(fn, source_name: Optional[str]):
    """Run a trajectory; method-contract failures on user data are data
    errors, not usage ones."""
    try:
        return fn()
    except DomainError as exc:
        if source_name:
            raise DataError(f"{source_name}: {exc}") from None
        raise


def _cmd_eprocess(args) -> int:
    method = _require_method(args, eprocess_method_names())
    params = _maybe_tune(args, _params_from(args))
    lines = ["rep,n,log_value"]
    for rep, xs in _iter_reps(args):
        logs = _wrap_stream_errors(
            lambda: eprocess_trajectory(method, params, xs),
            args.input or None,
        )
        lines.extend(
            f"{rep},{n},{format_value(v)}" for n, v in enumerate(logs, 1)
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_cs(args) -> int:
    method = _require_method(args, cs_method_names())
    params = _maybe_tune(args, _params_from(args))
    lines = ["rep,n,lower,upper"]
    if method_is_fixed_n_only(method):
        lines.append("# fixed_n_only=true")
    for rep, xs in _iter_reps(args):
        intervals = _wrap_stream_errors(
            lambda: cs_trajectory(method, params, xs, args.alpha),
            args.input or None,
        )
        lines.extend(
            f"{rep},{n},{format_value(iv.lower)},{format_value(iv.upper)}"
            for n, iv in enumerate(intervals, 1)
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_simulate(args) -> int:
    method = _require_method(
        args, sorted(set(eprocess_method_names()) | set(cs_method_names()))
    )
    if not args.out:
        raise _UsageError("simulate writes files; --out is required")
    params = _maybe_tune(args, _params_from(args))
    if args.input:
        dist = DistSpec(kind="file", path=args.input)
    else:
        dist = DistSpec.parse(args.dist)
    config = SimConfig(
        dist=dist,
        n_max=args.n_max,
        reps=args.reps,
        seed=args.seed,
        alpha=args.alpha,
        method=method,
        params=params,
    )
    records = simulate(config, workers=args.workers)
    lines = [REP_HEADER]
    if method_is_fixed_n_only(method):
        lines.append("# fixed_n_only=true")
    lines.extend(record.row() for record in records)
    _emit("\n".join(lines) + "\n", args.out)
    _emit(summary_json(records), args.out + ".summary.json")
    return 0


def _cmd_bounds(args) -> int:
    if not 0.0 < args.alpha < 1.0 / 3.0:
        print(
            "error: the minimax bound needs alpha < 1/3 "
            f"(and alpha > 0), got {args.alpha}",
            file=sys.stderr,
        )
        return 1
    bound = minimax_lower_bound(args.alpha, args.n_max)
    ceiling = epower_ceiling(EffectSize(args.theta))
    c_sq = optimal_c_sq(args.n_max, args.alpha) if args.n_max >= 2 else None
    lines = [
        f"minimax_lower_bound = {format_value(bound)}",
        f"epower_ceiling = {format_value(ceiling)}",
        f"optimal_c_sq = {format_value(c_sq)}",
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_replay(args) -> int:
    if not args.input:
        raise _UsageError("replay needs --input")
    methods = args.method or []
    if not methods:
        raise _UsageError(
            "replay needs at least one --method "
            f"(one of: {', '.join(eprocess_method_names())})"
        )
    betting = eprocess_method_names()
    for method in methods:
        try:
            name = resolve_method(method)
        except DomainError as exc:
            raise _UsageError(str(exc)) from None
        if name not in betting:
            raise _UsageError(
                f"method {method!r} has no e-process to replay "
                f"(one of: {', '.join(betting)})"
            )
    params = _params_from(args)
    reports = replay_file(args.input, methods, args.alpha, params)
    for report in reports:
        print(report.line(args.alpha))
    if args.out:
        lines = ["method,n,log_value"]
        for report in reports:
            if report.error is not None:
                continue
            lines.extend(
                f"{report.method},{n},{format_value(v)}"
                for n, v in enumerate(report.log_trajectory, 1)
            )
        _emit("\n".join(lines) + "\n", args.out)
    return 2 if any(r.error is not None for r in reports) else 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="seqt",
        description="Sequential t-tests: e-processes, confidence sequences, "
        "and seeded Monte-Carlo experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_e = sub.add_parser(
        "eprocess",
        help="per-step log e-values "
        f"(methods: {', '.join(eprocess_method_names())})",
    )
    _add_method_flags(p_e)
    _add_source_flags(p_e)
    p_e.set_defaults(run=_cmd_eprocess)

    p_cs = sub.add_parser(
        "cs",
        help="per-step confidence intervals "
        f"(methods: {', '.join(cs_method_names())})",
    )
    _add_method_flags(p_cs)
    _add_source_flags(p_cs)
    p_cs.set_defaults(run=_cmd_cs)

    p_sim = sub.add_parser(
        "simulate",
        help="seeded Monte-Carlo experiment; writes per-rep records plus a "
        "JSON summary sidecar",
    )
    _add_method_flags(p_sim)
    _add_source_flags(p_sim)
    p_sim.add_argument(
        "--workers",
        type=int,
        default=1,
        help="split replications across processes (results are identical)",
    )
    p_sim.set_defaults(run=_cmd_simulate)

    p_b = sub.add_parser(
        "bounds",
        help="minimax width lower bound, e-power ceiling, tuned c^2",
    )
    p_b.add_argument("--alpha", type=float, default=0.05)
    p_b.add_argument("--n-max", type=int, default=100)
    p_b.add_argument("--theta", type=float, default=1.0)
    p_b.add_argument("--out")
    p_b.set_defaults(run=_cmd_bounds)

    p_r = sub.add_parser(
        "replay",
        help="stream one data file through several methods",
    )
    _add_method_flags(p_r, repeatable_method=True)
    _add_source_flags(p_r)
    p_r.set_defaults(run=_cmd_replay)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.run(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
