"""Biased min-consensus wavefront planner.

Leader cells (targets) hold state 0. Every follower repeatedly takes
``min over neighbors q of (s_q + D_pq)`` from the previous sweep's states.
Starting from +inf, the fixed point is the shortest-path distance field and is
reached in finitely many synchronous sweeps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .gridworld import (
    UNREACHABLE,
    Coord,
    GridMap,
    Neighborhood,
    offsets,
    step_cost,
)


class CorruptFieldError(ValueError):
    """Backtracking found no strictly smaller neighbor before reaching a leader."""


@dataclass(frozen=True, eq=False)
class ConsensusNet:
    map: GridMap
    neighborhood: Neighborhood
    leaders: frozenset
    state: np.ndarray
    sweeps: int = 0

    @property
    def followers(self) -> frozenset:
        free = {Coord(int(r), int(c)) for r, c in np.argwhere(~self.map.blocked)}
        return frozenset(free - self.leaders)

    def edges(self) -> dict[tuple[Coord, Coord], float]:
        """Undirected free-free edges with their bias ``D_pq``, each listed once."""
        out = {}
        m = self.map
        for p in m.free_cells():
            for dr, dc in offsets(self.neighborhood):
                q = Coord(p.row + dr, p.col + dc)
                if m.is_free(q) and p < q:
                    out[(p, q)] = step_cost(dr, dc)
        return out


@dataclass(frozen=True, eq=False)
class DistanceField:
    d: np.ndarray
    blocked: np.ndarray
    sweeps: int = 0
    converged: bool = True

    def __getitem__(self, c):
        return self.d[tuple(c)]


def init_net(m: GridMap, nb: Neighborhood = Neighborhood.FOUR,
             leaders: Iterable | None = None) -> ConsensusNet:
    nb = Neighborhood.parse(nb)
    leaders = frozenset(Coord(*c) for c in (leaders if leaders is not None else [m.target]))
    for c in leaders:
        if not m.is_free(c):
            raise ValueError(f"leader {tuple(c)} is not a free cell")
    s = np.full(m.shape, UNREACHABLE)
    for c in leaders:
        s[c] = 0.0
    s.setflags(write=False)
    return ConsensusNet(m, nb, leaders, s)


def _neighbor_min(s: np.ndarray, blocked: np.ndarray, nb: Neighborhood) -> np.ndarray:
    rows, cols = s.shape
    padded = np.full((rows + 2, cols + 2), UNREACHABLE)
    padded[1:-1, 1:-1] = np.where(blocked, UNREACHABLE, s)
    best = np.full(s.shape, UNREACHABLE)
    for dr, dc in offsets(nb):
        shifted = padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
        np.minimum(best, shifted + step_cost(dr, dc), out=best)
    return best


def sweep(net: ConsensusNet) -> tuple[ConsensusNet, float]:
    """One synchronous sweep; returns the new net and the largest follower change.

    A follower moving from +inf to a finite value counts as an infinite change.
    """
    blocked = net.map.blocked
    new = _neighbor_min(net.state, blocked, net.neighborhood)
    new[blocked] = UNREACHABLE
    for c in net.leaders:
        new[c] = 0.0
    old = net.state
    changed = new != old
    if changed.any():
        both_finite = np.isfinite(old) & np.isfinite(new)
        if np.any(changed & ~both_finite):
            max_change = math.inf
        else:
            max_change = float(np.max(np.abs(new[changed] - old[changed])))
    else:
        max_change = 0.0
    new.setflags(write=False)
    return replace(net, state=new, sweeps=net.sweeps + 1), max_change


def solve(net: ConsensusNet, max_sweeps: int | None = None) -> DistanceField:
    """Sweep until nothing changes.

    ``max_sweeps`` defaults to the cell count, which bounds the number of
    sweeps needed on any grid. A smaller cap may return an unconverged field.
    """
    if max_sweeps is None:
        max_sweeps = net.map.rows * net.map.cols
    converged = False
    for _ in range(max_sweeps + 1):
        net, change = sweep(net)
        if change == 0.0:
            converged = True
            break
    return DistanceField(net.state, net.map.blocked, net.sweeps, converged)


def backtrack(field: DistanceField, m: GridMap, start,
              nb: Neighborhood = Neighborhood.FOUR) -> tuple[Coord, ...]:
    """Steepest descent from ``start`` to a zero-distance cell.

    Each step moves to the neighbor with the smallest value, which must be
    strictly below the current one; ties go to the first in canonical order.
    """
    d = field.d
    cur = Coord(*start)
    if not m.is_free(cur) or not math.isfinite(d[cur]):
        raise CorruptFieldError(f"no finite distance at {tuple(cur)}")
    path = [cur]
    visited = {cur}
    while d[cur] != 0:
        best = None
        for dr, dc in offsets(nb):
            q = Coord(cur.row + dr, cur.col + dc)
            if m.is_free(q) and q not in visited and d[q] < d[cur]:
                if best is None or d[q] < d[best]:
                    best = q
        if best is None:
            raise CorruptFieldError(f"stuck at {tuple(cur)} with d={d[cur]}")
        path.append(best)
        visited.add(best)
        cur = best
    return tuple(path)


def plan(m: GridMap, nb: Neighborhood = Neighborhood.FOUR):
    """Solve from the target and descend from the start; ``(path | None, field)``."""
    field = solve(init_net(m, nb))
    if not math.isfinite(field.d[m.start]):
        return None, field
    return backtrack(field, m, m.start, nb), field
