"""Command-line entry point: ``saddleflow {run,validate,compare,gradcheck}``.

Exit codes: 0 success, 1 condition or tolerance failure, 2 usage error,
3 numerical failure.
"""

import argparse
import logging
import os
import sys

from . import __version__
from .analysis import rate_slope
from .errors import InvalidArgumentError, SaddleFlowError
from .experiments import RunFailedError, build_problem, compare, sweep, ProblemSpec
from .gradcheck import check_gradients
from .options import (
    CONFIG_KEYS,
    build_configs,
    config_help,
    load_config_file,
    parse_damping,
    parse_number,
    parse_scaling,
    parse_tikhonov,
)
from .records import write_csv, write_json
from .schedules import ScheduleSet, classify_regime, default_grid, validate_conditions

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

BASELINE_NOTE = (
    "note: the external inertial baseline is not implemented and is omitted from this table"
)


class _HelpConfig(argparse.Action):
    def __init__(self, option_strings, dest, **kwargs):
        super().__init__(option_strings, dest, nargs=0, default=argparse.SUPPRESS, **kwargs)

    def __call__(self, parser, namespace, values, option_string=None):
        print(config_help())
        parser.exit(EXIT_OK)


def _add_experiment_flags(p):
    p.add_argument("--config", help="key = value config document")
    p.add_argument("--help-config", action=_HelpConfig, help="print the config schema")
    for key in CONFIG_KEYS:
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                       help=CONFIG_KEYS[key][0])


def _options(args):
    opts = load_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def _out_path(base, index, count):
    if count == 1:
        return base
    stem, dot, ext = base.rpartition(".")
    if not dot:
        return f"{base}-{index}"
    return f"{stem}-{index}.{ext}"


def _summary(result):
    last = result.samples[-1] if result.samples else None
    if last is None:
        return f"{result.config.label}: no samples"
    metric = "gap" if last.gap is not None else ("phi" if last.phi is not None else "norm_xy")
    try:
        t_end = result.config.t_end
        slope = rate_slope(result.series(metric), (t_end / 10.0, t_end))
        slope_s = f"{slope:.4g}"
    except InvalidArgumentError:
        slope_s = "n/a"
    parts = [f"{result.config.label}: t={last.t:.6g}"]
    if last.gap is not None:
        parts.append(f"final gap={last.gap:.6g}")
    if last.phi is not None:
        parts.append(f"final phi={last.phi:.6g}")
    parts.append(f"final norm={last.norm_xy:.6g}")
    parts.append(f"slope({metric})={slope_s}")
    return " ".join(parts)


def cmd_run(args):
    configs = build_configs(_options(args))
    out = args.out or "run.csv"
    code = EXIT_OK
    for i, cfg in enumerate(configs):
        try:
            (result,) = sweep([cfg], threads=1)
        except RunFailedError as exc:
            result, code = exc.result, EXIT_NUMERIC
        path = _out_path(out, i, len(configs))
        write_csv(result, path, deterministic=args.deterministic)
        if args.json:
            write_json(result, _out_path(args.json, i, len(configs)), args.deterministic)
        status = "FAILED " + result.error if result.failed else "ok"
        print(f"{_summary(result)} [{status}] -> {path}")
    return code


def cmd_validate(args):
    sched = ScheduleSet(
        parse_damping(args.alpha),
        parse_scaling(args.beta),
        parse_tikhonov(args.eps),
        parse_number(args.theta),
        parse_number(args.t0),
    )
    grid = default_grid(sched.t0, args.grid_count, args.grid_span)
    rep = validate_conditions(sched, grid)
    labels = {
        "damping": "damping   alpha >= (1+theta)/(theta t)",
        "scaling": "scaling   beta'/beta <= (1-2 theta)/(theta t)",
        "tikhonov_growth": "growth    alpha + t alpha' <= t beta eps",
        "eps_monotone": "monotone  eps' <= 0",
    }
    failed = rep.failures()
    for key, text in labels.items():
        verdict = "FAIL" if key in failed else "pass"
        extra = f" analytic={rep.analytic[key]:.6g}" if key in rep.analytic else ""
        print(f"{verdict}  {text:<48} worst margin={rep.worst_margin[key]:.6g}{extra}")
    reg = classify_regime(sched)
    print(
        f"regime: {reg.kind}  strong convergence: {str(reg.strong_convergence_flag).lower()}"
        f"  ({reg.method})"
    )
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_compare(args):
    opts = _options(args)
    opts.setdefault("preset", "example1-vs-apdd")
    configs = build_configs(opts)
    window = None
    if args.window:
        lo, hi = (parse_number(v) for v in args.window.split(","))
        window = (lo, hi)
    try:
        results = sweep(configs, args.threads)
    except RunFailedError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    rows = compare(configs, args.metric, window, results=results)
    print(f"{'label':<24} {'variant':<16} {'final ' + args.metric:>24} {'slope':>10}")
    for r in rows:
        slope = "n/a" if r.slope is None else f"{r.slope:.4f}"
        print(f"{r.label:<24} {r.variant:<16} {r.final:>24.17g} {slope:>10}")
    print(BASELINE_NOTE)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(f"# tool: saddleflow {__version__}\n# metric: {args.metric}\n")
            fh.write(f"# {BASELINE_NOTE}\n")
            fh.write("label,variant,final,slope\n")
            for r in rows:
                slope = "" if r.slope is None else format(r.slope, ".17g")
                fh.write(f"{r.label},{r.variant},{r.final:.17g},{slope}\n")
    return EXIT_OK


def cmd_gradcheck(args):
    if args.problem == "toy":
        spec = ProblemSpec("toy")
        step = args.step or 1e-6
        tol = args.tol or 1e-6
    else:
        m, n = (int(v) for v in args.dims.lower().split("x"))
        spec = ProblemSpec("regression", dims=(m, n), kappa=args.kappa, omega=args.omega, a=args.a)
        step = args.step or 1e-7
        tol = args.tol or 1e-4
    p = build_problem(spec, args.seed)
    worst = check_gradients(p, points=args.points, step=step, seed=args.seed)
    for k, v in worst.items():
        print(f"{k:<12} max relative error {v:.3e}")
    overall = max(worst.values())
    ok = overall <= tol
    print(f"max relative error {overall:.3e} (tolerance {tol:g}, step {step:g}): "
          f"{'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def make_parser():
    parser = argparse.ArgumentParser(prog="saddleflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"saddleflow {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a configured system and write a CSV")
    _add_experiment_flags(p)
    p.add_argument("--out", help="CSV output path (default run.csv)")
    p.add_argument("--json", help="also write a JSON mirror to this path")
    p.add_argument("--deterministic", action="store_true",
                   help="omit timestamps and timings from outputs")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check schedule conditions and classify the regime")
    p.add_argument("--alpha", default="power:17")
    p.add_argument("--beta", default="power:1")
    p.add_argument("--eps", default="power:7,2")
    p.add_argument("--theta", default="1/16")
    p.add_argument("--t0", default="1")
    p.add_argument("--grid-count", type=int, default=200)
    p.add_argument("--grid-span", type=float, default=100.0)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="compare final metric values and rates")
    _add_experiment_flags(p)
    p.add_argument("--metric", default="gap")
    p.add_argument("--window", help="slope window lo,hi (default last decade)")
    p.add_argument("--out", help="write the table as CSV")
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (default $SADDLEFLOW_THREADS or 1)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", help="finite-difference gradient validation")
    p.add_argument("--problem", choices=("toy", "regression"), default="toy")
    p.add_argument("--a", type=float, default=100.0)
    p.add_argument("--omega", type=float, default=0.1)
    p.add_argument("--dims", default="100x200")
    p.add_argument("--kappa", type=float, default=35.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SaddleFlowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
