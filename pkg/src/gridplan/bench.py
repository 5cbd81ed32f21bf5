"""Seeded head-to-head runs of the planners, aggregation, CSV and ASCII output."""
from __future__ import annotations

import dataclasses
import io
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import consensus, shunting
from .gridworld import (
    Coord,
    GridMap,
    ScenarioConfig,
    ScenarioError,
    format_field,
    path_length,
    read_scenario,
)
from .metaheuristics.aco import ACOParams, run_aco
from .metaheuristics.bso import BSOParams, run_bso
from .metaheuristics.common import FitnessParams
from .metaheuristics.ga import GAParams, run_ga
from .potential_field import APFParams, simulate_scenario
from .results import TrialResult

ALGOS = ("shunting", "consensus", "apf", "ga", "aco", "bso")

CSV_COLUMNS = ("algo", "map", "seed", "success", "path_len", "iterations_to_best",
               "wall_ms", "collisions")
SUMMARY_COLUMNS = ("algo", "map", "trials", "success_rate", "mean_path_len",
                   "median_path_len", "mean_iterations", "mean_wall_ms")


class ConfigError(ValueError):
    """Bad algorithm name, parameter override, or suite definition."""


# ---------------------------------------------------------------- parameters

_PARAM_CLASSES = {
    "shunting": (shunting.ShuntingParams,),
    "consensus": (),
    "apf": (APFParams,),
    "ga": (GAParams, FitnessParams),
    "aco": (ACOParams,),
    "bso": (BSOParams, FitnessParams),
}


def parse_overrides(text: str | None) -> dict[str, str]:
    """``"a=1,b=2"`` -> ``{"a": "1", "b": "2"}``."""
    out: dict[str, str] = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"malformed override {item!r}, expected key=value")
        out[key.strip()] = value.strip()
    return out


def _coerce(value, default):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        s = str(value).lower()
        if s in ("1", "true", "yes"):
            return True
        if s in ("0", "false", "no"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return type(default)(value)


def build_params(algo: str, overrides: Mapping | None = None) -> tuple:
    """Instantiate the parameter dataclasses of ``algo`` with overrides applied.

    Every key must belong to one of the algorithm's parameter classes; values
    are coerced to the type of the field's default.
    """
    if algo not in _PARAM_CLASSES:
        raise ConfigError(f"unknown algo {algo!r}; choose from {', '.join(ALGOS)}")
    overrides = dict(overrides or {})
    built = []
    for cls in _PARAM_CLASSES[algo]:
        kwargs = {}
        for f in dataclasses.fields(cls):
            if f.name in overrides:
                try:
                    kwargs[f.name] = _coerce(overrides.pop(f.name), f.default)
                except ValueError as exc:
                    raise ConfigError(f"{algo}: bad value for {f.name}: {exc}") from None
        try:
            built.append(cls(**kwargs))
        except ValueError as exc:
            raise ConfigError(f"{algo}: {exc}") from None
    if overrides:
        raise ConfigError(f"{algo}: unknown parameter(s) {', '.join(sorted(overrides))}")
    return tuple(built)


# ---------------------------------------------------------------- single trial

def _plan(algo: str, cfg: ScenarioConfig, seed: int, params: tuple) -> TrialResult:
    m = cfg.map
    if algo == "consensus":
        path, fld = consensus.plan(m, cfg.neighborhood)
        ok = path is not None
        return TrialResult("consensus", cfg.name, seed, ok, path_length(path) if ok else math.inf,
                           fld.sweeps, 0.0, trace=fld, path=path)
    if algo == "shunting":
        path, ok, act = shunting.plan(m, params[0])
        return TrialResult("shunting", cfg.name, seed, ok, path_length(path) if ok else math.inf,
                           act.iteration, 0.0, trace=act, path=path)
    if algo == "apf":
        traj, res = simulate_scenario(cfg, params[0])
        return dataclasses.replace(res, map=cfg.name, seed=seed, trace=traj,
                                   path=_trajectory_cells(traj, m))
    if algo == "ga":
        return run_ga(cfg, params[0], params[1], seed=seed)
    if algo == "aco":
        return run_aco(cfg, params[0], seed=seed)
    return run_bso(cfg, params[0], params[1], seed=seed)


def _trajectory_cells(traj, m: GridMap) -> tuple:
    cells = []
    for x, y in traj.positions:
        c = Coord(int(round(y)), int(round(x)))
        if m.in_bounds(c) and (not cells or cells[-1] != c):
            cells.append(c)
    return tuple(cells)


def run_trial(algo: str, scenario: ScenarioConfig, seed: int = 0,
              params: Mapping | tuple | None = None) -> TrialResult:
    """One planner run; ``wall_ms`` covers the planning call only.

    ``params`` is either a mapping of overrides or the tuple returned by
    :func:`build_params`. Everything except ``wall_ms`` is a pure function of
    the arguments.
    """
    if not isinstance(params, tuple):
        params = build_params(algo, params)
    t0 = time.perf_counter()
    res = _plan(algo, scenario, int(seed), params)
    wall = (time.perf_counter() - t0) * 1000.0
    return dataclasses.replace(res, map=scenario.name, seed=int(seed), wall_ms=wall)


# ---------------------------------------------------------------- suites

def default_suite_dir() -> Path:
    return Path(str(resources.files("gridplan") / "data" / "suite"))


def suite_files(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise ConfigError(f"suite directory {d} does not exist")
    files = sorted(d.glob("*.map"))
    if not files:
        raise ConfigError(f"suite directory {d} holds no .map files")
    return files


def load_suite(paths: Iterable) -> list[ScenarioConfig]:
    out = []
    for p in paths:
        try:
            out.append(read_scenario(p))
        except ScenarioError as exc:
            raise ConfigError(f"{p}:{exc.lineno}: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"{p}: {exc}") from None
    return out


@dataclass(frozen=True)
class BenchConfig:
    suite: tuple
    algos: tuple = ("aco", "bso")
    trials: int = 20
    base_seed: int = 0
    overrides: Mapping = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        if not self.algos:
            raise ConfigError("algo list is empty")
        for a in self.algos:
            if a not in ALGOS:
                raise ConfigError(f"unknown algo {a!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for a in self.overrides:
            if a not in self.algos:
                raise ConfigError(f"overrides given for {a!r}, which is not benchmarked")


@dataclass(frozen=True)
class Aggregate:
    algo: str
    map: str
    trials: int
    success_rate: float
    mean_path_len: float
    median_path_len: float
    mean_iterations: float
    mean_wall_ms: float


def aggregate(trials: Sequence[TrialResult]) -> list[Aggregate]:
    """Per (algo, map) summary; path statistics use successful trials only."""
    groups: dict[tuple[str, str], list[TrialResult]] = {}
    for t in trials:
        groups.setdefault((t.algo, t.map), []).append(t)
    out = []
    for (algo, name), ts in sorted(groups.items()):
        lens = [t.path_len for t in ts if t.success]
        out.append(Aggregate(
            algo, name, len(ts),
            len(lens) / len(ts),
            statistics.fmean(lens) if lens else math.inf,
            statistics.median(lens) if lens else math.inf,
            statistics.fmean(t.iterations_to_best for t in ts),
            statistics.fmean(t.wall_ms for t in ts),
        ))
    return out


@dataclass(frozen=True)
class MetricsTable:
    trials: tuple
    aggregates: tuple

    @classmethod
    def from_trials(cls, trials: Iterable[TrialResult]) -> "MetricsTable":
        ts = tuple(sorted(trials, key=_sort_key))
        return cls(ts, tuple(aggregate(ts)))

    def mean_wall_ms(self, algo: str) -> float:
        w = [t.wall_ms for t in self.trials if t.algo == algo]
        return statistics.fmean(w) if w else math.nan

    def wall_time_ratio(self, num: str = "bso", den: str = "aco") -> float:
        """Mean wall time of ``num`` over that of ``den`` across all trials."""
        a, b = self.mean_wall_ms(num), self.mean_wall_ms(den)
        if math.isnan(a) or math.isnan(b) or b == 0:
            return math.nan
        return a / b


def _trial_job(job):
    algo, cfg, seed, params = job
    return run_trial(algo, cfg, seed, params)


def run_suite(cfg: BenchConfig) -> MetricsTable:
    """Cross product algos x scenarios x trials with seeds ``base_seed + i``.

    All scenarios load and all parameters validate before the first trial.
    Results do not depend on ``workers`` or on execution order.
    """
    scenarios = cfg.suite
    if not scenarios:
        raise ConfigError("suite is empty")
    if not isinstance(scenarios[0], ScenarioConfig):
        scenarios = load_suite(scenarios)
    params = {a: build_params(a, cfg.overrides.get(a)) for a in cfg.algos}
    jobs = [(a, sc, cfg.base_seed + i, params[a])
            for a in cfg.algos for sc in scenarios for i in range(cfg.trials)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_trial_job, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        results = [_trial_job(j) for j in jobs]
    return MetricsTable.from_trials(results)


# ---------------------------------------------------------------- CSV

def _sort_key(t: TrialResult):
    return (t.algo, t.map, t.seed)


def _num(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.6g}"


def trials_csv(trials: Iterable[TrialResult], walltime: bool = True) -> str:
    cols = [c for c in CSV_COLUMNS if walltime or c != "wall_ms"]
    lines = [",".join(cols)]
    for t in sorted(trials, key=_sort_key):
        row = {
            "algo": t.algo, "map": t.map, "seed": str(t.seed),
            "success": "true" if t.success else "false",
            "path_len": _num(t.path_len if t.success else math.inf),
            "iterations_to_best": str(t.iterations_to_best),
            "wall_ms": _num(t.wall_ms), "collisions": str(t.collisions),
        }
        lines.append(",".join(row[c] for c in cols))
    return "\n".join(lines) + "\n"


def summary_csv(table: MetricsTable, walltime: bool = True) -> str:
    cols = [c for c in SUMMARY_COLUMNS if walltime or c != "mean_wall_ms"]
    lines = [",".join(cols)]
    for a in table.aggregates:
        vals = dataclasses.asdict(a)
        lines.append(",".join(v if isinstance(v, str) else str(v) if isinstance(v, int)
                              else _num(v) for v in (vals[c] for c in cols)))
    return "\n".join(lines) + "\n"


def emit_csv(results, destination=None, walltime: bool = True) -> str:
    """Write trial rows as CSV to ``destination`` (path or text stream).

    ``results`` is a :class:`MetricsTable` or an iterable of trials. Returns
    the text. With ``walltime=False`` the ``wall_ms`` column is dropped so that
    repeated seeded runs give identical bytes.
    """
    trials = results.trials if isinstance(results, MetricsTable) else results
    text = trials_csv(trials, walltime)
    if destination is None:
        return text
    if isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(os.fspath(destination), "w", newline="") as fh:
            fh.write(text)
    return text


def parse_csv(text: str) -> list[TrialResult]:
    """Inverse of :func:`emit_csv`; a missing ``wall_ms`` column reads as 0."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty CSV")
    header = lines[0].split(",")
    required = [c for c in CSV_COLUMNS if c != "wall_ms"]
    missing = [c for c in required if c not in header]
    if missing:
        raise ValueError(f"CSV lacks columns {missing}")
    out = []
    for lineno, ln in enumerate(lines[1:], start=2):
        vals = ln.split(",")
        if len(vals) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(vals)}")
        row = dict(zip(header, vals))
        out.append(TrialResult(
            row["algo"], row["map"], int(row["seed"]), row["success"] == "true",
            float(row["path_len"]), int(row["iterations_to_best"]),
            float(row.get("wall_ms", 0.0)), int(row["collisions"]),
        ))
    return out


def canonical(t: TrialResult) -> TrialResult:
    """``t`` with floats rounded the way the CSV writes them."""
    return dataclasses.replace(t, path_len=float(_num(t.path_len)), wall_ms=float(_num(t.wall_ms)),
                               trace=None, path=None)


# ---------------------------------------------------------------- rendering

def render_map(m: GridMap, fld=None, path: Sequence | None = None) -> str:
    """ASCII map (``#`` obstacle, ``*`` path, ``S``/``T``; T beats S beats *).

    With ``fld`` (array or :class:`DistanceField`) the distance tabulation is
    returned instead, obstacles as ``-1``.
    """
    if fld is not None:
        d = np.asarray(getattr(fld, "d", fld), dtype=float)
        if d.shape != m.shape:
            raise ValueError(f"field shape {d.shape} does not match map {m.shape}")
        return format_field(d, m.blocked)
    grid = np.where(m.blocked, "#", ".").astype("<U1")
    for p in path or ():
        if not m.in_bounds(p):
            raise ValueError(f"path cell {tuple(p)} outside the {m.rows}x{m.cols} map")
        grid[p[0], p[1]] = "*"
    grid[m.start] = "S"
    grid[m.target] = "T"
    return "\n".join("".join(row) for row in grid) + "\n"
