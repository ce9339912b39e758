"""Command-line entry point ``varscale``.

Exit status: 0 when every check passes, 1 when a check fails, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from typing import Sequence

import numpy as np

from ..bounds import UnverifiedBoundWarning, check_coincidence, concavity_verified, error_bound
from ..exceptions import ConfigError, ExprSyntaxError, PreconditionError
from ..indexfn import parse
from .checks import CRITERIA, run_all
from .config import ExperimentConfig, ModcontConfig, load_config, read_json
from .experiments import deblur_config, eddington_config, run_deblur_experiment, run_eddington_experiment, run_rate_experiment
from .reports import fmt, open_out

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return v


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=_u64, default=d(None), help="master RNG seed (u64)")
    parser.add_argument("--out", default=d(None), help="CSV output path (default: stdout)")
    parser.add_argument("--quiet", action="store_true", default=d(False), help="suppress the summary")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="varscale", description="Variable Hilbert scale error analysis experiments.")
    _globals(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="run the acceptance suite")
    c.add_argument("--only", default=None, help="comma-separated criterion numbers")

    for name, text in (("rates", "spectral source rate experiment"), ("eddington", "Eddington spectroscopy experiment")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("config", nargs="?", help="JSON config (defaults used when omitted)")
    d = sub.add_parser("deblur", parents=[common], help="penalised deblurring rate experiment")
    d.add_argument("--l", type=int, required=True, help="Sobolev order of the penalty")
    d.add_argument("config", nargs="?", help="JSON config (defaults used when omitted)")

    m = sub.add_parser("modcont", parents=[common], help="compare the two modulus-of-continuity bounds")
    m.add_argument("config", nargs="?", help="JSON config (defaults used when omitted)")

    b = sub.add_parser("bounds", parents=[common], help="evaluate the interpolation error bound")
    b.add_argument("--psi", required=True, help="index-function expression, e.g. 'pow 0.5'")
    b.add_argument("--eps", type=float, required=True, help="||f||_theta (epsilon)")
    b.add_argument("--zeta", type=float, required=True, help="||f||_{psi theta} (zeta)")
    return p


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text, file=sys.stderr)


def _experiment_config(args, base: ExperimentConfig) -> ExperimentConfig:
    cfg = load_config(args.config, base) if args.config else base
    return cfg.with_overrides(seed=args.seed, out=args.out)


def _report(args, rep, out: str | None) -> int:
    with open_out(out) as fh:
        rep.write_csv(fh)
    _say(args, rep.summary())
    for note in rep.notes:
        _say(args, f"  note: {note}")
    return EXIT_FAIL if rep.passed is False else EXIT_OK


def _cmd_check(args) -> int:
    numbers = None
    if args.only:
        try:
            numbers = [int(x) for x in args.only.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad criterion list {args.only!r}") from None
        if any(n not in CRITERIA for n in numbers):
            raise ConfigError(f"criteria are numbered 1-{len(CRITERIA)}")
    seed = 42 if args.seed is None else args.seed
    results = run_all(seed, numbers)
    if not args.quiet:
        for r in results:
            print(r.line())
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    if args.out:
        with open_out(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["criterion", "title", "passed", "runtime", "limit", "detail"])
            for r in results:
                w.writerow([r.number, r.title, int(r.passed), fmt(r.runtime), fmt(r.limit), r.detail])
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _cmd_modcont(args) -> int:
    cfg = ModcontConfig.from_dict(read_json(args.config)) if args.config else ModcontConfig()
    psi = cfg.psi_fn()
    ratios = cfg.deltas.values()
    worst = 0.0
    with open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["R", "delta", "bound_direct", "bound_nested", "rel_dev"])
        for R in cfg.R:
            deltas = R * ratios if cfg.relative else ratios
            rep = check_coincidence(psi, R, deltas, strict=False)
            worst = max(worst, rep.max_dev)
            for row in zip(rep.deltas, rep.direct, rep.nested, rep.rel_dev):
                w.writerow([fmt(R), *map(fmt, row)])
    ok = worst <= cfg.tol
    _say(args, f"{'PASS' if ok else 'FAIL'} modcont psi={cfg.psi} max rel deviation {worst:.3e} (tol {cfg.tol:g})")
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_bounds(args) -> int:
    try:
        psi = parse(args.psi)
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad --psi expression: {exc}") from None
    if not (args.eps > 0 and args.zeta > 0):
        raise ConfigError("--eps and --zeta must be positive")
    verified = concavity_verified(psi)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnverifiedBoundWarning)
        value = error_bound(psi, args.eps, args.zeta, strict=False)
    with open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["psi", "eps", "zeta", "bound", "verified"])
        w.writerow([str(psi), fmt(args.eps), fmt(args.zeta), fmt(value), int(verified)])
    if not verified:
        _say(args, f"FAIL {psi} is not verified concave; bound is unverified")
        return EXIT_FAIL
    _say(args, f"PASS bound {value:.16e}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with np.errstate(all="ignore"):
            if args.command == "check":
                return _cmd_check(args)
            if args.command == "rates":
                cfg = _experiment_config(args, ExperimentConfig())
                return _report(args, run_rate_experiment(cfg), cfg.out)
            if args.command == "deblur":
                cfg = _experiment_config(args, deblur_config())
                return _report(args, run_deblur_experiment(args.l, cfg), cfg.out)
            if args.command == "eddington":
                cfg = _experiment_config(args, eddington_config())
                return _report(args, run_eddington_experiment(cfg), cfg.out)
            if args.command == "modcont":
                return _cmd_modcont(args)
            return _cmd_bounds(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
