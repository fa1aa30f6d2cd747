"""Command-line entry points.

Subcommands:
  run        execute one scenario file
  compare    strategy-by-target grid from a base scenario
  ingest     smooth a motion recording and run it through dynamics
  calibrate  report auto-calibrated weights for a scenario
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .. import cost as cost_mod
from ..body_model import default_model, load_model
from ..dynamics import _trapz
from .mocap import ingest_mocap
from .reports import _fmt, _write_rows
from .scenario import compare_strategies, load_scenario, run_scenario


def _apply_overrides(config, args):
    updates = {}
    if args.output_dir is not None:
        updates["output_dir"] = args.output_dir
    if getattr(args, "preset", None) is not None:
        updates["preset"] = args.preset
    opt_updates = {}
    if getattr(args, "max_iterations", None) is not None:
        opt_updates["max_iterations"] = args.max_iterations
    if getattr(args, "threads", None) is not None:
        opt_updates["threads"] = args.threads
    if opt_updates:
        updates["optimizer"] = replace(config.optimizer, **opt_updates)
    return replace(config, **updates) if updates else config


def _cmd_run(args) -> int:
    config = _apply_overrides(load_scenario(args.config), args)
    result = run_scenario(config)
    for key in (
        "strategy",
        "final_error_m",
        "total_power_squared_J2",
        "final_com_squared_m2",
        "total_energy_J",
        "termination",
        "iterations",
    ):
        print(f"{key}: {result.summary[key]}")
    print(f"wall_time_s: {result.opt.wall_time_s:.3f}")
    if config.output_dir:
        print(f"outputs: {config.output_dir}")
    return 0


def _cmd_compare(args) -> int:
    config = _apply_overrides(load_scenario(args.config), args)
    strategies = (
        tuple(s.strip() for s in args.strategies.split(","))
        if args.strategies
        else cost_mod.STRATEGIES
    )
    targets = (
        tuple(float(v) for v in args.targets.split(","))
        if args.targets
        else (15.0, 30.0, 60.0)
    )
    report = compare_strategies(config, strategies=strategies, trunk_flexions=targets)
    for row in report["rows"]:
        print(
            f"flexion={row['trunk_flexion_deg']:g} strategy={row['strategy']} "
            f"status={row['status']}"
        )
    if config.output_dir:
        print(f"outputs: {config.output_dir}")
    return 0


def _cmd_ingest(args) -> int:
    model = load_model(args.model) if args.model else default_model()
    series, output = ingest_mocap(model, args.input, window=args.window, order=args.order)
    energy = float(_trapz(output.total_abs_power, output.times))
    print(f"samples: {series.times.size}")
    print(f"rate_hz: {series.rate_hz:.6g}")
    print(f"total_energy_J: {energy:.6g}")
    print(f"final_com_squared_m2: {output.final_com_squared:.6g}")
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        names = model.dof_names()
        header = (
            ["time_s"]
            + [f"tau_{n}_Nm" for n in names]
            + ["total_abs_power_W", "com_x_m", "com_y_m", "com_z_m"]
        )
        rows = []
        for i, t in enumerate(output.times):
            rows.append(
                [_fmt(t)]
                + [_fmt(v) for v in output.torque[i]]
                + [_fmt(output.total_abs_power[i])]
                + [_fmt(v) for v in output.com[i]]
            )
        _write_rows(os.path.join(args.output_dir, "mocap_dynamics.csv"), header, rows)
        print(f"outputs: {args.output_dir}")
    return 0


def _cmd_calibrate(args) -> int:
    config = _apply_overrides(load_scenario(args.config), args)
    primary = run_scenario(
        replace(
            config,
            strategy=cost_mod.MIN_ERROR,
            lambda0_power=0.0,
            lambda0_com=0.0,
            output_dir=None,
        )
    )
    power_integral = primary.dynamics.power_squared_integral
    com_integral = primary.dynamics.com_displacement_squared_integral
    print(f"primary_final_error_m: {primary.summary['final_error_m']:.6g}")
    print(f"power_integral: {power_integral:.9g}")
    print(f"com_integral: {com_integral:.9g}")
    if power_integral > 0:
        print(f"lambda0_power: {1.0 / power_integral:.9g}")
    if com_integral > 0:
        print(f"lambda0_com: {1.0 / com_integral:.9g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachopt",
        description="Full-body reaching movement synthesis and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--output-dir")
    run_p.add_argument("--preset")
    run_p.add_argument("--max-iterations", type=int)
    run_p.add_argument("--threads", type=int)
    run_p.set_defaults(func=_cmd_run)

    cmp_p = sub.add_parser("compare", help="strategy-by-target grid")
    cmp_p.add_argument("--config", required=True)
    cmp_p.add_argument("--strategies", help="comma-separated strategy names")
    cmp_p.add_argument("--targets", help="comma-separated trunk flexions, deg")
    cmp_p.add_argument("--output-dir")
    cmp_p.add_argument("--preset")
    cmp_p.add_argument("--max-iterations", type=int)
    cmp_p.add_argument("--threads", type=int)
    cmp_p.set_defaults(func=_cmd_compare)

    ing_p = sub.add_parser("ingest", help="analyze a motion recording")
    ing_p.add_argument("--input", required=True)
    ing_p.add_argument("--model", help="model file; default model if omitted")
    ing_p.add_argument("--window", type=int, default=61)
    ing_p.add_argument("--order", type=int, default=4)
    ing_p.add_argument("--output-dir")
    ing_p.set_defaults(func=_cmd_ingest)

    cal_p = sub.add_parser("calibrate", help="auto-calibrate cost weights")
    cal_p.add_argument("--config", required=True)
    cal_p.add_argument("--output-dir")
    cal_p.add_argument("--preset")
    cal_p.add_argument("--max-iterations", type=int)
    cal_p.add_argument("--threads", type=int)
    cal_p.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
