"""Ant colony optimization on the 8-connected grid graph.

Pheromone lives on undirected edges between adjacent free cells. Each
iteration evaporates by ``beta_e`` and adds ant-cycle deposits ``Q / L_k``
for every tour plus an elitist deposit on the best tour found so far.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..consensus import init_net, solve
from ..gridworld import OFFSETS_EIGHT, Coord, GridMap, Neighborhood, ScenarioConfig, path_length
from ..results import TrialResult
from .common import OptimizerTrace, substream

_DIR = {d: k for k, d in enumerate(OFFSETS_EIGHT)}
_OPPOSITE = [_DIR[(-dr, -dc)] for dr, dc in OFFSETS_EIGHT]
_STEP = np.array([math.hypot(dr, dc) for dr, dc in OFFSETS_EIGHT])


@dataclass(frozen=True)
class ACOParams:
    ants: int = 12
    alpha_ph: float = 1.0
    beta_h: float = 16.0
    beta_e: float = 0.2
    Q: float = 1.0
    tau0: float = 0.1
    elitist_bonus: float = 6.0
    iterations: int = 40
    patience: int = 15
    heuristic: str = "geodesic"

    def __post_init__(self):
        if self.ants < 1 or self.iterations < 0:
            raise ValueError("ants >= 1 and iterations >= 0 required")
        if self.alpha_ph < 0 or self.beta_h < 0 or self.elitist_bonus < 0:
            raise ValueError("exponents and elitist bonus must be nonnegative")
        if not 0 < self.beta_e < 1:
            raise ValueError("evaporation beta_e must be in (0, 1)")
        if not self.Q > 0:
            raise ValueError("Q must be positive")

    @property
    def tau_min(self) -> float:
        return 1e-4 * self.Q


@dataclass(frozen=True, eq=False)
class PheromoneMatrix:
    """``tau[r, c, k]`` is the level on the edge from (r, c) along offset k."""

    tau: np.ndarray
    beta_e: float = 0.2
    Q: float = 1.0

    @property
    def tau_min(self) -> float:
        return 1e-4 * self.Q

    @classmethod
    def uniform(cls, shape, level: float, beta_e: float = 0.2, Q: float = 1.0) -> "PheromoneMatrix":
        return cls(np.full((*shape, 8), float(level)), beta_e, Q)

    def get(self, p, q) -> float:
        return float(self.tau[p[0], p[1], _DIR[(q[0] - p[0], q[1] - p[1])]])


def tour_edges(path: Sequence) -> list[tuple[Coord, Coord]]:
    return [(Coord(*a), Coord(*b)) for a, b in zip(path, path[1:])]


def update_pheromone(ph: PheromoneMatrix, tours: Iterable[tuple[Sequence, float]] = (),
                     best: tuple[Sequence, float] | None = None,
                     elitist_bonus: float = 0.0) -> PheromoneMatrix:
    """Evaporate, then add the summed deposits; floor at ``tau_min``.

    ``tours`` holds ``(edges, cost)`` pairs; each ant lays ``Q / cost`` on its
    edges. ``best`` receives an extra ``elitist_bonus * Q / cost``.
    """
    delta = np.zeros_like(ph.tau)
    tours = list(tours)
    if best is not None and elitist_bonus > 0:
        tours.append((best[0], best[1] / elitist_bonus))
    for edges, cost in tours:
        if not cost > 0:
            raise ValueError("tour costs must be positive")
        amount = ph.Q / cost
        for p, q in edges:
            k = _DIR[(q[0] - p[0], q[1] - p[1])]
            delta[p[0], p[1], k] += amount
            delta[q[0], q[1], _OPPOSITE[k]] += amount
    tau = np.maximum((1.0 - ph.beta_e) * ph.tau + delta, ph.tau_min)
    return PheromoneMatrix(tau, ph.beta_e, ph.Q)


def heuristic_distance(m: GridMap, kind: str = "geodesic") -> np.ndarray:
    """Per-cell distance-to-target estimate used by the transition rule.

    ``geodesic`` is the 8-connected wavefront field (obstacle-aware);
    ``euclidean`` is the straight-line distance.
    """
    if kind == "euclidean":
        rr, cc = np.indices(m.shape)
        return np.hypot(rr - m.target[0], cc - m.target[1])
    if kind == "geodesic":
        return solve(init_net(m, Neighborhood.EIGHT)).d
    raise ValueError(f"unknown heuristic {kind!r}")


def _heuristic(m: GridMap, params: "ACOParams") -> np.ndarray:
    h = heuristic_distance(m, params.heuristic)
    ok = np.isfinite(h) & (h > 0)
    return np.where(ok, 1.0 / np.where(ok, h, 1.0), 0.0) ** params.beta_h


def construct_tour(ph: PheromoneMatrix, m: GridMap, params: ACOParams,
                   rng: np.random.Generator, eta: np.ndarray | None = None):
    """One ant walk from start to target over unvisited free neighbors.

    Returns ``(path, cost)``; a trapped ant or one exceeding ``4*rows*cols``
    steps returns ``(None, inf)``.
    """
    if eta is None:
        eta = _heuristic(m, params)
    rows, cols = m.shape
    blocked = m.blocked
    target = m.target
    cur = m.start
    path = [cur]
    visited = {cur}
    cost = 0.0
    for _ in range(4 * rows * cols):
        if cur == target:
            return tuple(path), cost
        r, c = cur
        cand, weights = [], []
        for k, (dr, dc) in enumerate(OFFSETS_EIGHT):
            a, b = r + dr, c + dc
            if 0 <= a < rows and 0 <= b < cols and not blocked[a, b] and (a, b) not in visited:
                if (a, b) == target:
                    cand, weights = [k], [1.0]
                    break
                cand.append(k)
                weights.append(ph.tau[r, c, k] ** params.alpha_ph * eta[a, b])
        if not cand:
            return None, math.inf
        total = sum(weights)
        pick = len(cand) - 1
        if total > 0:
            u = rng.random() * total
            acc = 0.0
            for idx, w in enumerate(weights):
                acc += w
                if u < acc:
                    pick = idx
                    break
        else:
            pick = int(rng.integers(len(cand)))
        k = cand[pick]
        dr, dc = OFFSETS_EIGHT[k]
        cur = Coord(r + dr, c + dc)
        path.append(cur)
        visited.add(cur)
        cost += _STEP[k]
    return None, math.inf


def run_aco(cfg: ScenarioConfig, params: ACOParams = ACOParams(), seed: int = 0) -> TrialResult:
    """Iterate colonies and pheromone updates; returns the best tour found."""
    t0 = time.perf_counter()
    m = cfg.map
    ph = PheromoneMatrix.uniform(m.shape, params.tau0, params.beta_e, params.Q)
    eta = _heuristic(m, params)
    best_path, best_cost, best_it = None, math.inf, 0
    trace = OptimizerTrace()
    evals = 0
    for it in range(params.iterations):
        tours = []
        for k in range(params.ants):
            path, cost = construct_tour(ph, m, params, substream(seed, it, k), eta)
            evals += 1
            if path is not None:
                tours.append((path, cost))
        for path, cost in tours:
            if cost < best_cost - 1e-12:
                best_path, best_cost, best_it = path, cost, it
        ph = update_pheromone(
            ph, [(tour_edges(p), c) for p, c in tours if c > 0],
            (tour_edges(best_path), best_cost) if best_path is not None and best_cost > 0 else None,
            params.elitist_bonus,
        )
        mean = float(np.mean([c for _, c in tours])) if tours else math.inf
        trace.add(best_cost, mean, evals)
        if best_path is not None and it - best_it >= params.patience:
            break
    ok = best_path is not None
    return TrialResult("aco", cfg.name, seed, ok, path_length(best_path) if ok else math.inf,
                       best_it, (time.perf_counter() - t0) * 1000.0,
                       trace=trace, path=best_path)
