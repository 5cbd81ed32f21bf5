"""Shunting neural-field planner.

One neuron per grid cell, integrated with explicit Euler:

    dx/dt = -A x + (B - x) ([I]+ + sum_j w_j [x_j]+) - (D + x) [I]-

The target receives input +E and obstacles -E. Lateral weights are
``mu / d`` for neighbors at Euclidean distance ``0 < d <= r0``. Paths climb the
settled activity landscape greedily over the 8-neighborhood.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .gridworld import OFFSETS_EIGHT, Coord, GridMap


@dataclass(frozen=True)
class ShuntingParams:
    A: float = 10.0
    B: float = 1.0
    D: float = 1.0
    E: float = 100.0
    mu: float = 1.0
    r0: float = 1.5
    dt: float = 0.005
    tol: float = 1e-6
    max_iters: int = 20000

    def __post_init__(self):
        for name in ("A", "B", "D", "E", "mu", "r0", "dt", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        # lateral drive is at most mu * (#neighbors) * B since every w <= mu
        bound = self.dt * (self.A + self.E + self.mu * len(self.kernel()) * max(self.B, 1.0))
        if bound >= 1.0:
            raise ValueError(f"explicit Euler stability guard violated (dt*rate = {bound:.3g} >= 1)")

    def kernel(self) -> list[tuple[int, int, float]]:
        """``(dr, dc, weight)`` for every offset inside the receptive radius."""
        reach = int(math.floor(self.r0))
        out = []
        for dr in range(-reach, reach + 1):
            for dc in range(-reach, reach + 1):
                dist = math.hypot(dr, dc)
                if 0 < dist <= self.r0 + 1e-12:
                    out.append((dr, dc, self.mu / dist))
        return out


@dataclass(frozen=True, eq=False)
class ActivityField:
    x: np.ndarray
    iteration: int = 0
    converged: bool = False


def _lateral(xpos: np.ndarray, kernel) -> np.ndarray:
    rows, cols = xpos.shape
    reach = max((max(abs(dr), abs(dc)) for dr, dc, _ in kernel), default=0)
    padded = np.zeros((rows + 2 * reach, cols + 2 * reach))
    padded[reach:reach + rows, reach:reach + cols] = xpos
    total = np.zeros_like(xpos)
    for dr, dc, w in kernel:
        total += w * padded[reach + dr:reach + dr + rows, reach + dc:reach + dc + cols]
    return total


def external_input(m: GridMap, p: ShuntingParams = ShuntingParams()) -> np.ndarray:
    inp = np.where(m.blocked, -p.E, 0.0)
    inp[m.target] = p.E
    return inp


def rhs(x: np.ndarray, inp: np.ndarray, p: ShuntingParams) -> np.ndarray:
    """Right-hand side of the shunting dynamics for every cell."""
    excite = np.maximum(inp, 0.0) + _lateral(np.maximum(x, 0.0), p.kernel())
    inhibit = np.maximum(-inp, 0.0)
    return -p.A * x + (p.B - x) * excite - (p.D + x) * inhibit


def step(field: ActivityField, inp: np.ndarray, p: ShuntingParams) -> ActivityField:
    x = field.x + p.dt * rhs(field.x, inp, p)
    return ActivityField(x, field.iteration + 1, False)


def settle(m: GridMap, p: ShuntingParams = ShuntingParams()) -> ActivityField:
    """Iterate from zero activity until the largest change drops below ``tol``.

    Hitting ``max_iters`` first returns the last field with ``converged=False``.
    """
    inp = external_input(m, p)
    field = ActivityField(np.zeros(m.shape), 0, False)
    for _ in range(p.max_iters):
        nxt = step(field, inp, p)
        if np.max(np.abs(nxt.x - field.x)) < p.tol:
            return ActivityField(nxt.x, nxt.iteration, True)
        field = nxt
    return field


def extract_path(field: ActivityField, m: GridMap, start=None, max_steps: int | None = None):
    """Greedy ascent; returns ``(path, reached_target)``.

    Moves to the free 8-neighbor with the highest activity as long as it is
    strictly above the current cell. Stops at the target or on a stall.
    """
    x = field.x
    cur = Coord(*(start if start is not None else m.start))
    if max_steps is None:
        max_steps = 4 * m.rows * m.cols
    path = [cur]
    for _ in range(max_steps):
        if cur == m.target:
            break
        best = None
        for dr, dc in OFFSETS_EIGHT:
            q = Coord(cur.row + dr, cur.col + dc)
            if m.is_free(q) and x[q] > x[cur] and (best is None or x[q] > x[best]):
                best = q
        if best is None:
            break
        path.append(best)
        cur = best
    return tuple(path), cur == m.target


def plan(m: GridMap, p: ShuntingParams = ShuntingParams()):
    field = settle(m, p)
    path, ok = extract_path(field, m)
    return path, ok, field


# ---------------------------------------------------------------- scene-switched variant

class Scene(enum.Enum):
    SCENE1 = 1
    SCENE2 = 2


@dataclass(frozen=True)
class SceneParams:
    gain: float = 1.0
    drive: float = 0.0
    scene: Scene = Scene.SCENE1
    output: str = "linear"

    def __post_init__(self):
        if self.output not in ("linear", "logistic"):
            raise ValueError("output must be 'linear' or 'logistic'")


def output_fn(s: np.ndarray, sp: SceneParams, p: ShuntingParams) -> np.ndarray:
    if sp.output == "logistic":
        return 1.0 / (1.0 + np.exp(-s))
    return np.clip(s, 0.0, p.B)


def step_scene(field: ActivityField, sp: SceneParams, p: ShuntingParams) -> ActivityField:
    """One Euler step of ``dx/dt = -A x + gain * g(sum_j w_j x_j) [+ drive]``."""
    y = output_fn(_lateral(field.x, p.kernel()), sp, p)
    dx = -p.A * field.x + sp.gain * y
    if sp.scene is Scene.SCENE2:
        dx = dx + sp.drive
    return ActivityField(field.x + p.dt * dx, field.iteration + 1, False)
