"""Shared pieces for the path optimizers: fitness, line of sight, grid graph."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from ..gridworld import OFFSETS_EIGHT, Coord, GridMap, step_cost

INFEASIBLE_PENALTY = 1e-3


class DegenerateChromosomeError(ValueError):
    pass


def substream(seed: int, *counters: int) -> np.random.Generator:
    """Independent generator for ``(seed, counters...)``.

    Streams depend only on the counters, so work split by individual or ant
    gives the same draws in any execution order.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *counters])


def path_fitness(d: float, n: int, R: float = 0.0) -> float:
    """``(1/d) * (1 + 1/sqrt(n - 1) + R)`` for path length d over n waypoints."""
    if n < 2 or not d > 0:
        raise DegenerateChromosomeError(f"need n >= 2 and d > 0 (n={n}, d={d})")
    if R < 0:
        raise ValueError("R must be nonnegative")
    return (1.0 / d) * (1.0 + 1.0 / math.sqrt(n - 1) + R)


@dataclass(frozen=True)
class FitnessParams:
    R_term: float = 0.0

    def __post_init__(self):
        if self.R_term < 0:
            raise ValueError("R_term must be nonnegative")


def polyline_length(points: Sequence) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(points, points[1:]))


def dedupe(points: Sequence) -> list[Coord]:
    """Drop repeated waypoints; a revisited cell cuts out the loop between visits."""
    out: list[Coord] = []
    index: dict[Coord, int] = {}
    for p in points:
        p = Coord(int(p[0]), int(p[1]))
        if p in index:
            cut = index[p]
            for q in out[cut + 1:]:
                del index[q]
            del out[cut + 1:]
            continue
        index[p] = len(out)
        out.append(p)
    return out


class LineOfSight:
    """Cached straight-segment checks between cell centers.

    A segment is blocked when it passes through the interior of an obstacle
    cell; grazing a corner is allowed, matching diagonal grid moves.
    """

    def __init__(self, m: GridMap):
        self.map = m
        self._cache: dict[tuple, bool] = {}

    def clear(self, a, b) -> bool:
        key = (a[0], a[1], b[0], b[1]) if tuple(a) <= tuple(b) else (b[0], b[1], a[0], a[1])
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = self._compute(key)
        return hit

    def _compute(self, key) -> bool:
        r0, c0, r1, c1 = key
        m = self.map
        if not (m.is_free((r0, c0)) and m.is_free((r1, c1))):
            return False
        lo_r, hi_r = min(r0, r1), max(r0, r1)
        lo_c, hi_c = min(c0, c1), max(c0, c1)
        box = m.blocked[lo_r:hi_r + 1, lo_c:hi_c + 1]
        if not box.any():
            return True
        cells = np.argwhere(box) + (lo_r, lo_c)
        dr, dc = r1 - r0, c1 - c0
        t_in = np.zeros(len(cells))
        t_out = np.ones(len(cells))
        for start, delta, centers in ((r0, dr, cells[:, 0]), (c0, dc, cells[:, 1])):
            lo = centers - 0.5 - start
            hi = centers + 0.5 - start
            if delta == 0:
                inside = (lo < 0) & (hi > 0)
                t_out = np.where(inside, t_out, -1.0)
                continue
            ta, tb = lo / delta, hi / delta
            t_in = np.maximum(t_in, np.minimum(ta, tb))
            t_out = np.minimum(t_out, np.maximum(ta, tb))
        return not np.any(t_out - t_in > 1e-9)

    def path_clear(self, points: Sequence) -> bool:
        return all(self.clear(a, b) for a, b in zip(points, points[1:]))


class GridGraph:
    """8-connected free-cell graph with cached single-source Dijkstra trees."""

    def __init__(self, m: GridMap):
        self.map = m
        rows, cols = m.shape
        ids = np.full(m.shape, -1)
        free = np.argwhere(~m.blocked)
        ids[tuple(free.T)] = np.arange(len(free))
        self.ids = ids
        self.cells = [Coord(int(r), int(c)) for r, c in free]
        src, dst, w = [], [], []
        for (r, c), i in zip(free, range(len(free))):
            for dr, dc in OFFSETS_EIGHT:
                a, b = r + dr, c + dc
                if 0 <= a < rows and 0 <= b < cols and ids[a, b] >= 0:
                    src.append(i)
                    dst.append(ids[a, b])
                    w.append(step_cost(dr, dc))
        n = len(free)
        self.graph = csr_matrix((w, (src, dst)), shape=(n, n))
        self._trees: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def _tree(self, target: int):
        tree = self._trees.get(target)
        if tree is None:
            dist, pred = dijkstra(self.graph, directed=False, indices=target,
                                  return_predecessors=True)
            tree = self._trees[target] = (dist, pred)
        return tree

    def distance(self, a, b) -> float:
        return float(self._tree(self.ids[tuple(b)])[0][self.ids[tuple(a)]])

    def shortest(self, a, b) -> list[Coord] | None:
        """Cells of a shortest 8-connected path from ``a`` to ``b``."""
        ia, ib = self.ids[tuple(a)], self.ids[tuple(b)]
        if ia < 0 or ib < 0:
            return None
        dist, pred = self._tree(ib)
        if not math.isfinite(dist[ia]):
            return None
        out = [self.cells[ia]]
        i = ia
        while i != ib:
            i = pred[i]
            out.append(self.cells[i])
        return out


def string_pull(cells: Sequence, los: LineOfSight) -> list[Coord]:
    """Greedy line-of-sight shortcutting of a connected cell path."""
    cells = list(cells)
    if len(cells) <= 2:
        return [Coord(*c) for c in cells]
    out = [Coord(*cells[0])]
    i = 0
    while i < len(cells) - 1:
        j = len(cells) - 1
        while j > i + 1 and not los.clear(cells[i], cells[j]):
            j -= 1
        out.append(Coord(*cells[j]))
        i = j
    return out


def random_feasible_route(m: GridMap, graph: GridGraph, los: LineOfSight,
                          rng: np.random.Generator, slots: int) -> list[Coord] | None:
    """Start -> random free via cell -> target, stitched with shortest paths and
    string-pulled; ``None`` if it needs more than ``slots`` interior waypoints."""
    via = graph.cells[int(rng.integers(len(graph.cells)))]
    first = graph.shortest(m.start, via)
    second = graph.shortest(via, m.target)
    if first is None or second is None:
        return None
    route = string_pull(dedupe(first + second[1:]), los)
    if len(route) - 2 > slots:
        return None
    return route


def pad_route(route: Sequence, slots: int, los: LineOfSight | None = None) -> list[Coord]:
    """Interior genes of length ``slots``: the longest gap is split at its
    midpoint cell (when both halves stay clear), otherwise a waypoint repeats."""
    interior = [Coord(*p) for p in route[1:-1]]
    while len(interior) < slots:
        pts = [Coord(*route[0]), *interior, Coord(*route[-1])]
        gaps = [polyline_length([a, b]) for a, b in zip(pts, pts[1:])]
        k = int(np.argmax(gaps))
        a, b = pts[k], pts[k + 1]
        mid = Coord(int(round((a[0] + b[0]) / 2)), int(round((a[1] + b[1]) / 2)))
        ok = los is not None and mid not in (a, b) and los.clear(a, mid) and los.clear(mid, b)
        interior.insert(k, mid if ok else a)
    return interior


@dataclass
class OptimizerTrace:
    best_cost: list = field(default_factory=list)
    mean_cost: list = field(default_factory=list)
    evaluations: list = field(default_factory=list)

    def add(self, best: float, mean: float, evals: int):
        self.best_cost.append(best)
        self.mean_cost.append(mean)
        self.evaluations.append(evals)

    def to_csv(self) -> str:
        lines = ["iter,best_cost,mean_cost,evaluations"]
        for i, (b, mu, e) in enumerate(zip(self.best_cost, self.mean_cost, self.evaluations)):
            lines.append(f"{i},{b:.6g},{mu:.6g},{e}")
        return "\n".join(lines) + "\n"
