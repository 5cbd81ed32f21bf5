"""Beetle swarm optimization over continuous waypoint vectors.

Each beetle carries a PSO position/velocity. At every step it sniffs the
fitness at two antenna tips along a direction ``b`` and blends the PSO
velocity with a fixed-length step toward the better tip. The direction comes
from a chemotaxis policy: beetles in the top 20% head for the global best, the
rest for the swarm centroid; a move that fails to improve switches to a random
direction, and a second consecutive failure reverses the previous one.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..gridworld import Coord, GridMap, ScenarioConfig
from ..results import TrialResult
from .common import (
    INFEASIBLE_PENALTY,
    FitnessParams,
    GridGraph,
    LineOfSight,
    OptimizerTrace,
    dedupe,
    pad_route,
    path_fitness,
    polyline_length,
    random_feasible_route,
    substream,
)


@dataclass(frozen=True)
class BSOParams:
    swarm: int = 8
    waypoints: int = 6
    w: float = 0.5
    c1: float = 1.0
    c2: float = 1.0
    lambda_b: float = 0.4
    d0: float = 2.0
    delta: float = 2.0
    gamma: float = 0.95
    elite_quantile: float = 0.8
    iterations: int = 40
    candidates: int = 4

    def __post_init__(self):
        if self.swarm < 1 or self.iterations < 0 or self.waypoints < 0:
            raise ValueError("swarm >= 1, iterations >= 0, waypoints >= 0 required")
        if min(self.w, self.c1, self.c2) < 0:
            raise ValueError("PSO gains must be nonnegative")
        if not 0 <= self.lambda_b <= 1:
            raise ValueError("lambda_b must be in [0, 1]")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not (self.d0 > 0 and self.delta > 0):
            raise ValueError("d0 and delta must be positive")


@dataclass(frozen=True, eq=False)
class Beetle:
    x: np.ndarray
    v: np.ndarray
    pbest: np.ndarray
    pbest_f: float
    f: float
    d0: float
    delta: float
    last_dir: np.ndarray | None = None
    fails: int = 0


def random_direction(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vector with a uniformly distributed orientation in R^n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    while True:
        b = rng.standard_normal(n)
        norm = math.sqrt(float(b @ b))
        if norm > 0:
            return b / norm


def _unit(v: np.ndarray) -> np.ndarray | None:
    norm = math.sqrt(float(v @ v))
    return v / norm if norm > 1e-12 else None


def antennae_step(beetle: Beetle, f: Callable[[np.ndarray], float], params: BSOParams,
                  rng: np.random.Generator, gbest: np.ndarray | None = None,
                  direction: np.ndarray | None = None,
                  bounds: tuple[np.ndarray, np.ndarray] | None = None) -> Beetle:
    """One BSO update of a single beetle (maximizing ``f``)."""
    x = beetle.x
    b = direction if direction is not None else random_direction(len(x), rng)
    half = 0.5 * beetle.d0
    xi = beetle.delta * b * np.sign(f(x + half * b) - f(x - half * b))
    gbest = beetle.pbest if gbest is None else gbest
    r1, r2 = rng.random(), rng.random()
    v = (params.w * beetle.v + params.c1 * r1 * (beetle.pbest - x)
         + params.c2 * r2 * (gbest - x))
    x_new = x + params.lambda_b * v + (1.0 - params.lambda_b) * xi
    if bounds is not None:
        x_new = np.clip(x_new, *bounds)
    f_new = f(x_new)
    improved = f_new > beetle.f
    if f_new > beetle.pbest_f:
        pbest, pbest_f = x_new, f_new
    else:
        pbest, pbest_f = beetle.pbest, beetle.pbest_f
    return Beetle(x_new, v, pbest, pbest_f, f_new, beetle.d0, params.gamma * beetle.delta,
                  b, 0 if improved else beetle.fails + 1)


def chemotaxis_direction(beetle: Beetle, fitnesses: np.ndarray, gbest: np.ndarray,
                         centroid: np.ndarray, rng: np.random.Generator,
                         quantile: float = 0.8) -> np.ndarray:
    """Direction policy gated by fitness rank and the beetle's failure streak.

    No failure: toward ``gbest`` when the beetle's fitness is at or above the
    swarm's ``quantile`` fitness, else toward ``centroid``. After one failed
    move a fresh random direction; after two in a row the previous direction
    reversed (the streak alternates random / reverse while it lasts).
    """
    n = len(beetle.x)
    if beetle.fails >= 2 and beetle.fails % 2 == 0 and beetle.last_dir is not None:
        return -beetle.last_dir
    if beetle.fails >= 1:
        return random_direction(n, rng)
    if beetle.f >= np.quantile(fitnesses, quantile):
        d = _unit(gbest - beetle.x)
    else:
        d = _unit(centroid - beetle.x)
    return d if d is not None else random_direction(n, rng)


class PathDecoder:
    """Maps a flat waypoint vector to a grid path and its fitness."""

    def __init__(self, m: GridMap, fp: FitnessParams = FitnessParams(), los: LineOfSight | None = None):
        self.map = m
        self.fp = fp
        self.los = los or LineOfSight(m)
        self.evaluations = 0
        self.lo = np.zeros(2)
        self.hi = np.array([m.rows - 1, m.cols - 1], dtype=float)

    def path(self, x: np.ndarray) -> list[Coord]:
        pts = np.clip(np.rint(np.asarray(x).reshape(-1, 2)), self.lo, self.hi).astype(int)
        return dedupe([self.map.start, *map(tuple, pts), self.map.target])

    def feasible(self, x: np.ndarray) -> bool:
        return self.los.path_clear(self.path(x))

    def __call__(self, x: np.ndarray) -> float:
        self.evaluations += 1
        pts = self.path(x)
        value = path_fitness(polyline_length(pts), len(pts), self.fp.R_term)
        return value if self.los.path_clear(pts) else value * INFEASIBLE_PENALTY


def run_bso(cfg: ScenarioConfig, params: BSOParams = BSOParams(),
            fp: FitnessParams = FitnessParams(), seed: int = 0) -> TrialResult:
    """Swarm loop with chemotaxis-steered antennae steps; best path is decoded
    by snapping waypoints to cells."""
    t0 = time.perf_counter()
    m = cfg.map
    if m.start == m.target:
        return TrialResult("bso", cfg.name, seed, True, 0.0, 0, _ms(t0), path=(m.start,))
    los = LineOfSight(m)
    graph = GridGraph(m)
    decode = PathDecoder(m, fp, los)
    k = params.waypoints
    dim = 2 * k
    lo = np.zeros(dim)
    hi = np.tile(decode.hi, k)

    swarm = []
    for i in range(params.swarm):
        rng = substream(seed, 0, i)
        best_x, best_f = None, -math.inf
        for _ in range(params.candidates):
            route = random_feasible_route(m, graph, los, rng, k)
            if route is None:
                ends = np.array([m.start, m.target], dtype=float)
                x = np.linspace(ends[0], ends[1], k + 2)[1:-1].ravel()
            else:
                x = np.asarray(pad_route(route, k, los), dtype=float).ravel()
            fx = decode(x)
            if fx > best_f:
                best_x, best_f = x, fx
        swarm.append(Beetle(best_x, np.zeros(dim), best_x, best_f, best_f, params.d0, params.delta))

    g = max(range(len(swarm)), key=lambda j: swarm[j].pbest_f)
    gbest, gbest_f, best_it = swarm[g].pbest, swarm[g].pbest_f, 0
    trace = OptimizerTrace()
    trace.add(polyline_length(decode.path(gbest)), _mean_len(decode, swarm), decode.evaluations)
    for it in range(1, params.iterations + 1 if dim else 1):
        fitnesses = np.array([b.f for b in swarm])
        centroid = np.mean([b.x for b in swarm], axis=0)
        nxt = []
        for i, beetle in enumerate(swarm):
            rng = substream(seed, it, i)
            direction = chemotaxis_direction(beetle, fitnesses, gbest, centroid, rng,
                                             params.elite_quantile)
            nxt.append(antennae_step(beetle, decode, params, rng, gbest, direction, (lo, hi)))
        swarm = nxt
        g = max(range(len(swarm)), key=lambda j: swarm[j].pbest_f)
        if swarm[g].pbest_f > gbest_f:
            gbest, gbest_f, best_it = swarm[g].pbest, swarm[g].pbest_f, it
        trace.add(polyline_length(decode.path(gbest)), _mean_len(decode, swarm), decode.evaluations)

    path = tuple(decode.path(gbest))
    ok = los.path_clear(path)
    return TrialResult("bso", cfg.name, seed, ok, polyline_length(path) if ok else math.inf,
                       best_it, _ms(t0), trace=trace, path=path)


def _mean_len(decode: PathDecoder, swarm) -> float:
    return float(np.mean([polyline_length(decode.path(b.x)) for b in swarm]))


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0
