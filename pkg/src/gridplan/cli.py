"""Command line entry point: plan, bench, perceive, verify-field.

Exit codes: 0 success, 1 planning failure (or field inconsistency), 2 bad
configuration or input.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import bench, perception
from .gridworld import (
    ScenarioError,
    local_consistency_violation,
    parse_field,
    read_scenario,
    serialize_scenario,
    ScenarioConfig,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _scenario(path) -> ScenarioConfig:
    try:
        return read_scenario(path)
    except ScenarioError as exc:
        raise bench.ConfigError(f"{path}:{exc.lineno}: {exc}") from None
    except OSError as exc:
        raise bench.ConfigError(str(exc)) from None


def _write(path, text: str):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise bench.ConfigError(f"cannot write {path}: {exc}") from None


def cmd_plan(args) -> int:
    cfg = _scenario(args.map)
    params = bench.build_params(args.algo, bench.parse_overrides(args.params))
    res = bench.run_trial(args.algo, cfg, args.seed, params)
    _write(args.out, bench.trials_csv([res], walltime=not args.no_walltime))
    if args.trace:
        trace = res.trace
        if trace is None or not hasattr(trace, "to_csv"):
            _write(args.trace, "")
        else:
            _write(args.trace, trace.to_csv())
    if args.field_out and args.algo == "consensus":
        _write(args.field_out, bench.render_map(cfg.map, res.trace))
    if args.render:
        sys.stdout.write(bench.render_map(cfg.map, path=res.path if res.success else ()))
    return EXIT_OK if res.success else EXIT_FAIL


def cmd_bench(args) -> int:
    files = bench.suite_files(args.suite) if args.suite else bench.suite_files(bench.default_suite_dir())
    algos = tuple(a.strip() for a in args.algos.split(",") if a.strip())
    overrides: dict[str, dict] = {}
    for item in args.params or ():
        algo, sep, rest = item.partition(":")
        if not sep:
            raise bench.ConfigError(f"--params expects algo:k=v,..., got {item!r}")
        overrides.setdefault(algo.strip(), {}).update(bench.parse_overrides(rest))
    cfg = bench.BenchConfig(tuple(bench.load_suite(files)), algos, args.trials, args.seed,
                            overrides, args.workers)
    table = bench.run_suite(cfg)
    walltime = not args.no_walltime
    _write(args.out, bench.trials_csv(table.trials, walltime))
    if args.summary:
        _write(args.summary, bench.summary_csv(table, walltime))
    if walltime and "bso" in algos and "aco" in algos:
        ratio = table.wall_time_ratio("bso", "aco")
        print(f"bso/aco mean wall-time ratio: {ratio:.4f} ({100 * ratio:.2f}%)", file=sys.stderr)
    return EXIT_OK


def cmd_perceive(args) -> int:
    try:
        frame = perception.read_pgm(args.frame)
    except (OSError, ValueError) as exc:
        raise bench.ConfigError(f"{args.frame}: {exc}") from None
    try:
        threshold = perception._check_threshold(args.threshold)
        report = perception.quality_report(frame, args.order)
    except ValueError as exc:
        raise bench.ConfigError(str(exc)) from None
    _write(args.out, report.CSV_HEADER + "\n" + report.csv_row() + "\n")
    if args.grid_out:
        try:
            m = perception.frame_to_grid(frame, threshold, args.cell,
                                         white_is_obstacle=not args.black_is_obstacle)
        except ValueError as exc:
            raise bench.ConfigError(str(exc)) from None
        _write(args.grid_out, serialize_scenario(ScenarioConfig(m)))
    return EXIT_OK


def cmd_verify_field(args) -> int:
    cfg = _scenario(args.map)
    try:
        d, mask = parse_field(Path(args.field).read_text())
    except (OSError, ValueError) as exc:
        raise bench.ConfigError(f"{args.field}: {exc}") from None
    m = cfg.map
    if d.shape != m.shape:
        raise bench.ConfigError(f"field is {d.shape[0]}x{d.shape[1]}, map is {m.rows}x{m.cols}")
    if not np.array_equal(mask, m.blocked):
        r, c = np.argwhere(mask != m.blocked)[0]
        print(f"obstacle mismatch at ({r},{c})")
        return EXIT_FAIL
    bad = local_consistency_violation(d, m, cfg.neighborhood)
    if bad is not None:
        v = d[bad]
        print(f"inconsistent at ({bad.row},{bad.col}): value {v:g}"
              if math.isfinite(v) else f"inconsistent at ({bad.row},{bad.col}): value inf")
        return EXIT_FAIL
    print("consistent")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridplan", description="Grid path planners and benchmark harness.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="run one planner on one scenario")
    p.add_argument("--algo", required=True, choices=bench.ALGOS)
    p.add_argument("--map", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--params", help="overrides k=v,k=v")
    p.add_argument("--out", help="trial CSV (default stdout)")
    p.add_argument("--render", action="store_true", help="print the map with the path")
    p.add_argument("--no-walltime", action="store_true")
    p.add_argument("--trace", help="per-iteration trace CSV (optimizers) or trajectory CSV (apf)")
    p.add_argument("--field-out", help="distance tabulation (consensus)")
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="seeded suite comparison")
    b.add_argument("--suite", help="directory of .map files (default: bundled suite)")
    b.add_argument("--algos", default="aco,bso")
    b.add_argument("--trials", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--summary", help="per (algo, map) aggregate CSV")
    b.add_argument("--no-walltime", action="store_true")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--params", action="append", help="algo:k=v,k=v (repeatable)")
    b.set_defaults(func=cmd_bench)

    q = sub.add_parser("perceive", help="quality report of a PGM frame")
    q.add_argument("--frame", required=True)
    q.add_argument("--threshold", type=float, required=True)
    q.add_argument("--order", type=int, default=2)
    q.add_argument("--out", help="CSV (default stdout)")
    q.add_argument("--grid-out", help="write the occupancy scenario here")
    q.add_argument("--cell", type=int, default=1)
    q.add_argument("--black-is-obstacle", action="store_true")
    q.set_defaults(func=cmd_perceive)

    v = sub.add_parser("verify-field", help="check a distance dump for local consistency")
    v.add_argument("--map", required=True)
    v.add_argument("--field", required=True)
    v.set_defaults(func=cmd_verify_field)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except bench.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
