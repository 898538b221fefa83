"""Command-line entry point.

Exit codes: 0 success, 1 bad input or usage, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import files
from .experiment import SELECTIONS, run_thought_experiment
from .metrology import (
    CalibrationReference,
    ConductivityExperiment,
    comparative_conductivity,
    format_result,
    parse_readings,
    spread_stats,
    two_point_calibration,
)
from .network import GridSpec, assemble_network, rasterize_power, write_matrix_market
from .package import ValidationError, grid_shape_for, make_grid_floorplan, parse_floorplan, parse_power_map
from .solver import SolverError, energy_balance, solve_steady

log = logging.getLogger("spreadsim")

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _num(x: float) -> str:
    return f"{x:.6g}"


def cmd_simulate(args) -> int:
    cfg = files.load_config(args.config)
    pkg = cfg.package
    fp = parse_floorplan(_read_text(args.floorplan), pkg.die.extent)
    pm = parse_power_map(_read_text(args.power))
    grid = GridSpec.for_package(pkg, args.grid)
    net = assemble_network(pkg, grid)
    p = rasterize_power(pm, fp, grid, pkg)
    field, rep = solve_steady(net, p, pkg.ambient_temperature, args.tol)
    print(f"total power {_num(pm.total)} W")
    print(f"iterations {rep.iterations} residual {rep.residual:.3e}")
    print(f"energy imbalance {energy_balance(net, field, p):.3e}")
    for name in field.layer_names:
        t = field.layer(name)
        print(f"{name}: min {t.min():.3f} max {t.max():.3f} degC")
    if args.out_csv:
        files.write_temperature_csv(field, args.out_csv)
    if args.out_pgm:
        files.write_heatmap_pgm(field, args.layer, args.out_pgm)
    if args.out_mtx:
        write_matrix_market(net, args.out_mtx)
    return EXIT_OK


def cmd_thought_experiment(args) -> int:
    cfg = files.load_config(args.config)
    spec = cfg.experiment_spec(
        n_cores=args.cores, grid_n=args.grid, selection=args.selection, seed=args.seed, trials=args.trials
    )
    rows, cols = grid_shape_for(spec.n_cores)
    fp = make_grid_floorplan(rows, cols, cfg.package.die.extent)
    result = run_thought_experiment(spec, cfg.package, fp, cfg.mttf)
    files.write_experiment_csv(result, args.out)
    for r in result:
        if r.mean_inactive_rise is None:
            print(f"{r.n_active:4d} active: no inactive cores")
        else:
            print(
                f"{r.n_active:4d} active: inactive rise {r.mean_inactive_rise:.3f} K, "
                f"MTTF em {r.r_em:.3f} tc {r.r_tc:.3f} sm {r.r_sm:.3f}"
            )
    return EXIT_OK


def cmd_conductivity(args) -> int:
    exp = ConductivityExperiment.load(args.experiment)
    print(format_result(comparative_conductivity(exp)))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    ref = CalibrationReference(boiling_point=args.boiling_point)
    curve = two_point_calibration(args.raw_ice, args.raw_boil, ref)
    print(f"gain {_num(curve.gain)}")
    print(f"offset {_num(curve.offset)}")
    return EXIT_OK


def cmd_spread_stats(args) -> int:
    sets = parse_readings(_read_text(args.readings))
    if not sets:
        raise ValidationError(f"{args.readings}: no readings")
    overall = 0.0
    for rs in sets:
        st = spread_stats(rs)
        overall = max(overall, st.max_pair_diff)
        print(f"{rs.label}: max diff {_num(st.max_pair_diff)} K, mean {_num(st.mean)} degC")
    print(f"max gradient {_num(overall)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spreadsim", description="Chip package and heat spreader thermal toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="steady-state temperatures for a floorplan and power map")
    s.add_argument("--config")
    s.add_argument("--floorplan", required=True)
    s.add_argument("--power", required=True)
    s.add_argument("--grid", type=int, default=32)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out-csv")
    s.add_argument("--out-pgm")
    s.add_argument("--layer", default="spreader")
    s.add_argument("--out-mtx", help="dump the conductance matrix in Matrix Market format")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("thought-experiment", help="inactive-core heating sweep")
    t.add_argument("--config")
    t.add_argument("--cores", type=int)
    t.add_argument("--grid", type=int)
    t.add_argument("--selection", choices=SELECTIONS)
    t.add_argument("--seed", type=int)
    t.add_argument("--trials", type=int)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_thought_experiment)

    c = sub.add_parser("conductivity", help="comparative-method conductivity from an experiment JSON")
    c.add_argument("--experiment", required=True)
    c.set_defaults(func=cmd_conductivity)

    k = sub.add_parser("calibrate", help="two-point ice/boiling thermocouple calibration")
    k.add_argument("--raw-ice", type=float, required=True)
    k.add_argument("--raw-boil", type=float, required=True)
    k.add_argument("--boiling-point", type=float, default=99.304)
    k.set_defaults(func=cmd_calibrate)

    r = sub.add_parser("spread-stats", help="pairwise spreader surface differences")
    r.add_argument("--readings", required=True)
    r.set_defaults(func=cmd_spread_stats)
    return parser


def cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValidationError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
