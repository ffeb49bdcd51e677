"""Command-line front end.

Examples::

    capdist preset binary --q 0.4 --out binary.json
    capdist sweep --channel binary.json --out curve.csv
    capdist solve --preset awgn --power-db 10 --pam 2 --mu 0 --format json
    capdist check curve.csv
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .builders import AwgnModelSpec, build_binary_multiplicative, build_fading_awgn
from .channel import ChannelError, load_channel, save_channel
from .solver import InfeasibleError, SolveOptions, solve
from .tradeoff import TradeoffCurve, check_curve_properties, grid_oracle, sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 3


def parse_mu_grid(text):
    """``start:stop:count[,geometric|linear]`` or a comma-separated list."""
    if ":" not in text:
        return np.array([float(v) for v in text.split(",")])
    spec, _, kind = text.partition(",")
    kind = kind or "linear"
    start, stop, count = spec.split(":")
    start, stop, count = float(start), float(stop), int(count)
    if kind == "linear":
        return np.linspace(start, stop, count)
    if kind == "geometric":
        if start <= 0:
            raise ValueError("geometric mu grid needs start > 0")
        return np.geomspace(start, stop, count)
    raise ValueError(f"unknown grid kind {kind!r}")


def _add_channel_args(p):
    src = p.add_argument_group("channel source")
    src.add_argument("--channel", help="channel JSON file")
    src.add_argument("--preset", choices=("binary", "awgn"))
    _add_preset_params(src)


def _add_preset_params(p):
    p.add_argument("--q", type=float, default=0.4, help="binary: P(S=1)")
    p.add_argument("--power-db", type=float, default=10.0, help="awgn: input power in dB")
    p.add_argument("--pam", type=int, default=2, help="awgn: PAM order")
    p.add_argument("--state-levels", type=int, default=64)
    p.add_argument("--output-levels", type=int, default=513)
    p.add_argument("--range-sigma", type=float, default=5.0)


def _add_solver_args(p):
    p.add_argument("--cost-limit", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-9, help="outer tolerance (nats)")
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--dual-step", type=float, default=0.1)
    p.add_argument("--dual-iters", type=int, default=200)
    p.add_argument("--dual-tol", type=float, default=1e-7)
    p.add_argument("--lambda0", type=float, default=1.0)


def _add_output_args(p):
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="capdist",
        description="Capacity-distortion-cost tradeoff of state-dependent channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="one solve at fixed mu")
    _add_channel_args(p)
    p.add_argument("--mu", type=float, default=0.0)
    _add_solver_args(p)
    _add_output_args(p)
    p.add_argument("--trace", action="store_true", help="per-iteration CSV on stderr")

    p = sub.add_parser("sweep", help="trace the curve over a mu grid")
    _add_channel_args(p)
    p.add_argument("--mu-grid", default=None,
                   help="start:stop:count,geometric|linear or a comma list")
    _add_solver_args(p)
    _add_output_args(p)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trace", action="store_true", help="per-point log on stderr")

    p = sub.add_parser("preset", help="write a built-in example channel")
    p.add_argument("kind", choices=("binary", "awgn"))
    _add_preset_params(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="exhaustive simplex-grid search (nx <= 4)")
    _add_channel_args(p)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--cost-limit", type=float, default=None)
    _add_output_args(p)

    p = sub.add_parser("check", help="check a curve CSV is nondecreasing and concave")
    p.add_argument("curve")
    p.add_argument("--tol", type=float, default=2e-3)
    return parser


def _preset(kind, args):
    if kind == "binary":
        return build_binary_multiplicative(args.q)
    spec = AwgnModelSpec.from_db(
        args.power_db, pam_order=args.pam, state_levels=args.state_levels,
        output_levels=args.output_levels, output_range_sigma=args.range_sigma,
    )
    return build_fading_awgn(spec)


def _channel(args):
    if (args.channel is None) == (args.preset is None):
        raise ValueError("give exactly one of --channel or --preset")
    if args.channel:
        return load_channel(args.channel)
    return _preset(args.preset, args)


def _options(args, mu=0.0):
    return SolveOptions(mu=mu, cost_limit=args.cost_limit, outer_tol=args.tol,
                        max_outer_iters=args.max_iters, dual_step0=args.dual_step,
                        dual_iters=args.dual_iters, dual_tol=args.dual_tol,
                        lambda0=args.lambda0)


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solve_record(res):
    row = res.as_row()
    row["p_x"] = [float(v) for v in res.p_x]
    return row


def _format_records(records, fmt):
    if fmt == "json":
        return json.dumps(records if len(records) != 1 else records[0], indent=1) + "\n"
    cols = list(records[0])
    lines = [",".join(cols)]
    for rec in records:
        cells = []
        for k in cols:
            v = rec[k]
            if isinstance(v, bool):
                cells.append(str(int(v)))
            elif isinstance(v, list):
                cells.append(" ".join(repr(x) for x in v))
            elif isinstance(v, float):
                cells.append(repr(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def cmd_solve(args):
    ch, d, b = _channel(args)
    opts = _options(args, args.mu)
    if args.mu > 0 and d is None:
        raise ValueError("distortion required for sweep/solve with mu>0")
    res = solve(ch, d, b, opts, trace=args.trace)
    if args.trace:
        w = csv.writer(sys.stderr, lineterminator="\n")
        w.writerow(["iter", "objective_nats", "lambda", "cost", "distortion"])
        w.writerows(res.trace)
    _emit(_format_records([_solve_record(res)], args.format), args.out)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args):
    ch, d, b = _channel(args)
    grid = parse_mu_grid(args.mu_grid) if args.mu_grid else None
    curve = sweep(ch, d, b, mu_grid=grid, opts=_options(args),
                  warm_start=not args.no_warm_start, jobs=args.jobs)
    if args.trace:
        for pt in curve.points:
            print(f"mu={pt.mu:.6g} rate={pt.rate_bits:.6f} D={pt.distortion:.6f} "
                  f"iters={pt.iterations} converged={pt.converged}", file=sys.stderr)
    text = curve.to_csv() if args.format == "csv" else curve.to_json() + "\n"
    _emit(text, args.out)
    return EXIT_OK if all(pt.converged for pt in curve.points) else EXIT_NOT_CONVERGED


def cmd_preset(args):
    ch, d, b = _preset(args.kind, args)
    save_channel(args.out, ch, d, b)
    return EXIT_OK


def cmd_oracle(args):
    ch, d, b = _channel(args)
    if args.mu > 0 and d is None:
        raise ValueError("distortion required for sweep/solve with mu>0")
    p, obj = grid_oracle(ch, d, b, mu=args.mu, step=args.step, cost_limit=args.cost_limit)
    rec = {"mu": args.mu, "step": args.step, "objective_nats": obj,
           "p_x": [float(v) for v in p]}
    _emit(_format_records([rec], args.format), args.out)
    return EXIT_OK


def cmd_check(args):
    curve = TradeoffCurve.from_csv(args.curve)
    report = check_curve_properties(curve, args.tol)
    print(report)
    return EXIT_OK if report.ok else EXIT_ERROR


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "preset": cmd_preset,
            "oracle": cmd_oracle, "check": cmd_check}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ChannelError, InfeasibleError, ValueError, OSError) as exc:
        print(f"capdist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
