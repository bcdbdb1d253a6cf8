"""Command-line interface: ``gauss-convex <command> [options]``.

Exit codes: 0 success (all checks pass), 1 a check failed, 2 usage or spec
error, 3 an inconclusive check under ``--strict``.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bodyspec import BodySpecError, load_body_spec
from .influence import influences_along, max_influence_direction, shell_density, total_influence
from .report import REPORT_COLUMNS, render, render_report
from .sampling import SamplingPlan
from .verify import CHECK_NAMES, FAIL, INCONCLUSIVE, friedgut_average, parse_grid, run_suite, threshold_curve, transition_grid
from .verify import constants as C
from .verify.suite import _checks_for

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
SEED_ENV = "GAUSS_CONVEX_SEED"
SAMPLES_ENV = "GAUSS_CONVEX_SAMPLES"
DEFAULT_SAMPLES = 1 << 20


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    body: str | None
    sigma: float
    seed: int | None
    samples: int
    workers: int
    output: str | None
    fmt: str
    strict: bool = False

    def plan(self) -> SamplingPlan:
        return SamplingPlan(self.seed if self.seed is not None else 0, self.samples, self.workers)


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0 or value != value or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {text!r}")
    return value


def _positive_int(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return value


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64): {text!r}")
    return value


def _unit_interval(text):
    value = _positive_float(text)
    if value >= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1): {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gauss-convex", description="Convex influence in Gaussian space.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sigma", type=_positive_float, default=1.0, help="Gaussian scale (default 1)")
    common.add_argument("--seed", type=_seed, default=None, help=f"random seed (env {SEED_ENV})")
    common.add_argument("--samples", type=_positive_int, default=None,
                        help=f"Monte Carlo sample count (env {SAMPLES_ENV}, default 2^20)")
    common.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1,
                        help="worker threads (results do not depend on this)")
    common.add_argument("--output", "-o", default=None, help="output path (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--strict", action="store_true", help="exit 3 when a check is inconclusive")

    body = argparse.ArgumentParser(add_help=False)
    body.add_argument("--body", required=True, help="body spec file or inline YAML")
    body.add_argument("--dim", type=_positive_int, default=None, help="override the top-level dimension n")
    body.add_argument("--r", type=_positive_float, default=None, help="override the top-level radius r")
    body.add_argument("--c", type=_positive_float, default=None, help="override the top-level slab width c")

    sub.add_parser("influence", parents=[common, body], help="coordinate, total and maximal influences")

    p = sub.add_parser("verify", parents=[common], help="run verification checks")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--suite", choices=("builtin",), help="run the builtin body suite")
    src.add_argument("--body", help="body spec file or inline YAML")
    p.add_argument("--dim", type=_positive_int, default=None)
    p.add_argument("--r", type=_positive_float, default=None)
    p.add_argument("--c", type=_positive_float, default=None)
    p.add_argument("--checks", default=None, help=f"comma-separated subset of: {', '.join(CHECK_NAMES)}")

    p = sub.add_parser("threshold", parents=[common, body], help="volume curve sigma -> gamma_sigma(K)")
    p.add_argument("--eps", type=_unit_interval, default=0.1)
    p.add_argument("--grid", default=None, help="start:stop:count (default: 64 log-spaced points over the transition)")

    p = sub.add_parser("shell", parents=[common, body], help="shell density alpha_K(r)")
    p.add_argument("--radii", required=True, help="start:stop:count")

    p = sub.add_parser("friedgut", parents=[common, body], help="iterative averaging trace")
    p.add_argument("--eps", type=_unit_interval, required=True, help="target residual variance")
    p.add_argument("--inner", type=_positive_int, default=C.FRIEDGUT_INNER, help="inner samples per outer point")
    p.add_argument("--step-cap", type=_positive_int, default=None)
    return parser


def _env_int(name):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"environment variable {name} is not an integer: {raw!r}")


def make_config(args) -> RunConfig:
    seed = args.seed if args.seed is not None else _env_int(SEED_ENV)
    if seed is not None and not 0 <= seed < 1 << 64:
        raise UsageError(f"seed out of range: {seed}")
    samples = args.samples if args.samples is not None else _env_int(SAMPLES_ENV)
    if samples is None:
        samples = C.FRIEDGUT_OUTER if args.command == "friedgut" else DEFAULT_SAMPLES
    if samples < 1:
        raise UsageError("samples must be >= 1")
    if args.command == "verify" and seed is None:
        raise UsageError(f"verify requires --seed or {SEED_ENV}")
    return RunConfig(args.command, getattr(args, "body", None), args.sigma, seed, samples, args.workers,
                     args.output, args.fmt, args.strict)


def _load(args):
    return load_body_spec(args.body, {"n": args.dim, "r": args.r, "c": args.c})


def _vector_text(v) -> str:
    return " ".join(repr(float(x)) for x in v)


def cmd_influence(args, cfg: RunConfig):
    body = _load(args)
    plan = cfg.plan()
    rows = []
    coords = influences_along(body, np.eye(body.n), cfg.sigma, plan.substream(0))
    for i, e in enumerate(coords):
        rows.append({"quantity": "influence", "direction": f"e{i + 1}", "value": e.value, "se": e.std_error,
                     "seed": e.seed, "samples": e.samples})
    t = total_influence(body, cfg.sigma, plan.substream(1))
    rows.append({"quantity": "total_influence", "direction": "", "value": t.value, "se": t.std_error,
                 "seed": t.seed, "samples": t.samples})
    v, m = max_influence_direction(body, cfg.sigma, plan.substream(2))
    rows.append({"quantity": "max_influence", "direction": _vector_text(v), "value": m.value, "se": m.std_error,
                 "seed": m.seed, "samples": m.samples})
    columns = ("quantity", "direction", "value", "se", "seed", "samples")
    return render(rows, columns, cfg.fmt, "influence"), EXIT_OK


def _exit_for(verdicts, strict):
    if FAIL in verdicts:
        return EXIT_FAIL
    if strict and INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig):
    checks = None
    if args.checks:
        checks = [c.strip() for c in args.checks.split(",") if c.strip()]
        unknown = sorted(set(checks) - set(CHECK_NAMES))
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(unknown)}")
    plan = cfg.plan()
    if args.suite:
        results = run_suite(plan, checks)
    else:
        body = _load(args)
        selected = set(CHECK_NAMES if checks is None else checks)
        results = _checks_for(body.kind, body, plan, selected)
        if "isoperimetric_estimate" in selected:
            from .verify import check_isoperimetric_estimate

            results.insert(0, check_isoperimetric_estimate())
    return render_report(results, cfg.fmt), _exit_for({r.verdict for r in results}, cfg.strict)


def cmd_threshold(args, cfg: RunConfig):
    body = _load(args)
    plan = cfg.plan()
    try:
        grid = parse_grid(args.grid) if args.grid else transition_grid(body, args.eps, 64, plan.substream(1))
    except ValueError as exc:
        raise UsageError(str(exc))
    # gamma_sigma(K) = gamma_1(K / sigma); --sigma rescales the whole grid
    curve = threshold_curve(body, args.eps, grid * cfg.sigma, plan)
    rows = [{"sigma": float(s), "gamma": e.value, "se": e.std_error, "width": curve.width, "seed": e.seed,
             "samples": e.samples} for s, e in zip(curve.sigmas, curve.estimates)]
    code = EXIT_OK if curve.bracketed else _exit_for({INCONCLUSIVE}, cfg.strict)
    return render(rows, ("sigma", "gamma", "se", "width", "seed", "samples"), cfg.fmt, "threshold"), code


def cmd_shell(args, cfg: RunConfig):
    body = _load(args)
    try:
        radii = parse_grid(args.radii)
    except ValueError as exc:
        raise UsageError(str(exc))
    dens = shell_density(body, radii, cfg.plan())
    rows = [{"r": float(r), "alpha": e.value, "se": e.std_error, "seed": e.seed, "samples": e.samples}
            for r, e in zip(dens.radii, dens.estimates)]
    return render(rows, ("r", "alpha", "se", "seed", "samples"), cfg.fmt, "shell"), EXIT_OK


def cmd_friedgut(args, cfg: RunConfig):
    body = _load(args)
    trace = friedgut_average(body, args.eps, cfg.plan(), step_cap=args.step_cap, inner=args.inner, sigma=cfg.sigma)
    rows = [{"step": 0, "direction": "", "influence": None, "influence_se": None,
             "residual_variance": trace.initial_variance.value, "residual_variance_se": trace.initial_variance.std_error,
             "bound": None, "verdict": ""}]
    for k, s in enumerate(trace.steps, start=1):
        rows.append({"step": k, "direction": _vector_text(s.direction), "influence": s.influence.value,
                     "influence_se": s.influence.std_error, "residual_variance": s.residual_variance.value,
                     "residual_variance_se": s.residual_variance.std_error, "bound": s.bound, "verdict": ""})
    rows[-1]["verdict"] = trace.verdict
    columns = ("step", "direction", "influence", "influence_se", "residual_variance", "residual_variance_se",
               "bound", "verdict")
    return render(rows, columns, cfg.fmt, "friedgut"), _exit_for({trace.verdict}, cfg.strict)


COMMANDS = {
    "influence": cmd_influence,
    "verify": cmd_verify,
    "threshold": cmd_threshold,
    "shell": cmd_shell,
    "friedgut": cmd_friedgut,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = make_config(args)
        text, code = COMMANDS[args.command](args, cfg)
    except BodySpecError as exc:
        print(f"gauss-convex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gauss-convex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
