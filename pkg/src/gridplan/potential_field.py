"""Artificial potential field tracker for static and moving targets.

Positions are continuous ``(x, y)`` in cell units (``x = col``, ``y = row``).
The attractive force acts on relative position, velocity and acceleration;
repulsion is inverse-distance (active inside ``rho0``) scaled by the distance to
the goal, so it vanishes at the goal itself. The robot is a unit-mass particle.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .gridworld import ScenarioConfig, TrackSample
from .results import TrialResult


class PenetrationError(RuntimeError):
    """The robot is inside an obstacle disc."""


def _vec(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise ValueError("state components must be finite")
    return a


@dataclass(frozen=True, eq=False)
class RobotState:
    X: np.ndarray
    V: np.ndarray = field(default_factory=lambda: np.zeros(2))
    a: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        for name in ("X", "V", "a"):
            object.__setattr__(self, name, _vec(getattr(self, name)))


@dataclass(frozen=True, eq=False)
class TargetState:
    Xg: np.ndarray
    Vg: np.ndarray = field(default_factory=lambda: np.zeros(2))
    ag: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        for name in ("Xg", "Vg", "ag"):
            object.__setattr__(self, name, _vec(getattr(self, name)))


@dataclass(frozen=True)
class APFParams:
    alpha: float = 1.0
    beta: float = 2.0
    lam: float = 0.0
    eta: float = 1.0
    rho0: float = 2.0
    d_safe: float = 0.25
    dt: float = 0.02
    v_max: float = 2.0
    goal_eps: float = 0.1
    max_steps: int = 5000
    stall_speed: float = 1e-3

    def __post_init__(self):
        if min(self.alpha, self.beta, self.lam, self.eta) < 0:
            raise ValueError("gains must be nonnegative")
        for name in ("rho0", "d_safe", "dt", "v_max", "goal_eps", "stall_speed"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.d_safe >= self.rho0:
            raise ValueError("d_safe must be smaller than rho0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


class ObstacleSet:
    """Discs with constant velocities; ``at(t)`` gives the centers at time t."""

    def __init__(self, centers=(), radii=(), velocities=None):
        self.centers = np.asarray(centers, dtype=float).reshape(-1, 2)
        self.radii = np.asarray(radii, dtype=float).reshape(-1)
        if velocities is None:
            velocities = np.zeros_like(self.centers)
        self.velocities = np.asarray(velocities, dtype=float).reshape(-1, 2)
        if not (len(self.centers) == len(self.radii) == len(self.velocities)):
            raise ValueError("centers, radii and velocities must have equal length")
        if np.any(self.radii < 0):
            raise ValueError("radii must be nonnegative")

    def __len__(self):
        return len(self.radii)

    def at(self, t: float) -> "ObstacleSet":
        if not np.any(self.velocities):
            return self
        return ObstacleSet(self.centers + t * self.velocities, self.radii, self.velocities)

    def clearances(self, X) -> np.ndarray:
        if not len(self):
            return np.empty(0)
        return np.hypot(*(np.asarray(X) - self.centers).T) - self.radii

    @classmethod
    def from_grid(cls, blocked: np.ndarray, radius: float = 0.5) -> "ObstacleSet":
        rc = np.argwhere(blocked)
        return cls(rc[:, ::-1].astype(float), np.full(len(rc), radius))


# ---------------------------------------------------------------- targets

class StaticTarget:
    moving = False

    def __init__(self, position):
        self._state = TargetState(position)

    def state(self, t: float) -> TargetState:
        return self._state


class ConstantVelocityTarget:
    moving = True

    def __init__(self, position, velocity):
        self.p0 = _vec(position)
        self.v = _vec(velocity)

    def state(self, t: float) -> TargetState:
        return TargetState(self.p0 + t * self.v, self.v)


class TrackTarget:
    """Piecewise-linear track; held at the last sample after it ends.

    Velocity is the segment slope and acceleration a finite difference of it.
    """

    moving = True

    def __init__(self, samples: Sequence[TrackSample], h: float = 1e-3):
        if not samples:
            raise ValueError("track needs at least one sample")
        self.t = np.array([s.t for s in samples])
        self.xy = np.array([[s.x, s.y] for s in samples], dtype=float)
        self.h = h

    def _pos(self, t):
        return np.array([np.interp(t, self.t, self.xy[:, 0]), np.interp(t, self.t, self.xy[:, 1])])

    def _vel(self, t):
        if len(self.t) < 2 or t >= self.t[-1] or t < self.t[0]:
            return np.zeros(2)
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        return (self.xy[i + 1] - self.xy[i]) / (self.t[i + 1] - self.t[i])

    def state(self, t: float) -> TargetState:
        v = self._vel(t)
        return TargetState(self._pos(t), v, (self._vel(t + self.h) - v) / self.h)


# ---------------------------------------------------------------- forces

def attractive_force(r: RobotState, t: TargetState, p: APFParams) -> np.ndarray:
    return p.alpha * (t.Xg - r.X) + p.beta * (t.Vg - r.V) + p.lam * (t.ag - r.a)


def repulsive_force(r: RobotState, t: TargetState, obs: ObstacleSet, p: APFParams) -> np.ndarray:
    """Sum over discs with clearance below ``rho0`` of
    ``eta * (1/rho - 1/rho0) / rho**2 * |X - Xg|`` along the outward normal."""
    if not len(obs):
        return np.zeros(2)
    diff = r.X - obs.centers
    dist = np.hypot(diff[:, 0], diff[:, 1])
    rho = dist - obs.radii
    if np.any(rho <= 0):
        raise PenetrationError(f"robot at {r.X} is inside an obstacle")
    near = rho < p.rho0
    if not np.any(near):
        return np.zeros(2)
    rho, diff, dist = rho[near], diff[near], dist[near]
    goal_dist = float(np.hypot(*(r.X - t.Xg)))
    mag = p.eta * (1.0 / rho - 1.0 / p.rho0) / rho**2 * goal_dist
    return (mag[:, None] * diff / dist[:, None]).sum(axis=0)


def collision_check(r: RobotState, obs: ObstacleSet, d_safe: float) -> str:
    """``"emergency"`` when any clearance is strictly below ``d_safe``."""
    c = obs.clearances(r.X)
    return "emergency" if c.size and c.min() < d_safe else "clear"


# ---------------------------------------------------------------- simulation

@dataclass
class Trajectory:
    rows: list = field(default_factory=list)

    COLUMNS = ("t", "x", "y", "vx", "vy", "fx", "fy", "min_clearance", "event")

    @property
    def positions(self) -> np.ndarray:
        return np.array([[r[1], r[2]] for r in self.rows]).reshape(-1, 2)

    def length(self) -> float:
        pts = self.positions
        return float(np.hypot(*np.diff(pts, axis=0).T).sum()) if len(pts) > 1 else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows:
            w.writerow([f"{v:.6g}" if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def _as_target(target):
    if hasattr(target, "state"):
        return target
    if isinstance(target, TargetState):
        return StaticTarget(target.Xg)
    return StaticTarget(target)


def simulate(robot: RobotState, target, obstacles: ObstacleSet | None, p: APFParams,
             stop_on_arrival: bool = True):
    """Run the closed loop; returns ``(Trajectory, TrialResult)``.

    Each step: force -> acceleration, velocity update, emergency handling when
    clearance drops below ``d_safe`` (velocity toward the nearest disc is
    removed and a unit counter-clockwise lateral impulse added), the same
    impulse when the robot stalls within ``rho0`` of an obstacle, speed clamp,
    position update. Ends on arrival, penetration, or ``max_steps``.
    """
    target = _as_target(target)
    obstacles = obstacles if obstacles is not None else ObstacleSet()
    X, V, a = robot.X.copy(), robot.V.copy(), robot.a.copy()
    traj = Trajectory()
    collisions = 0
    success = False
    steps = 0
    t = 0.0
    tgt = target.state(t)
    obs = obstacles.at(t)
    clear = obs.clearances(X)
    min_clear = float(clear.min()) if clear.size else math.inf
    traj.rows.append((0.0, X[0], X[1], V[0], V[1], 0.0, 0.0, min_clear, "start"))
    while True:
        if min_clear <= 0:
            collisions += 1
            traj.rows[-1] = traj.rows[-1][:-1] + ("penetration",)
            break
        arrived = np.hypot(*(X - tgt.Xg)) < p.goal_eps
        if target.moving:
            arrived = arrived and np.hypot(*(V - tgt.Vg)) < p.goal_eps
        if arrived:
            success = True
            if stop_on_arrival:
                break
        if steps >= p.max_steps:
            break
        state = RobotState(X, V, a)
        F = attractive_force(state, tgt, p) + repulsive_force(state, tgt, obs, p)
        a = F
        V = V + a * p.dt
        event = ""
        if min_clear < p.d_safe:
            k = int(np.argmin(clear))
            n = X - obs.centers[k]
            n = n / np.hypot(*n)
            toward = V @ n
            if toward < 0:
                V = V - toward * n
            V = V + np.array([-n[1], n[0]])
            collisions += 1
            event = "emergency"
        elif min_clear < p.rho0 and np.hypot(*V) < p.stall_speed:
            # balanced attraction and repulsion: same sidestep, not a collision
            k = int(np.argmin(clear))
            n = X - obs.centers[k]
            n = n / np.hypot(*n)
            V = V + np.array([-n[1], n[0]])
            event = "escape"
        speed = np.hypot(*V)
        if speed > p.v_max:
            V = V * (p.v_max / speed)
        X = X + V * p.dt
        steps += 1
        t = steps * p.dt
        tgt = target.state(t)
        obs = obstacles.at(t)
        clear = obs.clearances(X)
        min_clear = float(clear.min()) if clear.size else math.inf
        traj.rows.append((t, X[0], X[1], V[0], V[1], F[0], F[1], min_clear, event))
    if not stop_on_arrival:
        success = bool(np.hypot(*(X - tgt.Xg)) < p.goal_eps)
    result = TrialResult(
        algo="apf", map="", seed=0, success=success,
        path_len=traj.length() if success else math.inf,
        iterations_to_best=steps, wall_ms=0.0, collisions=collisions,
    )
    return traj, result


def tracking_error(traj: Trajectory, target, dt: float, tail: float = 0.1) -> float:
    """Mean robot-target distance over the last ``tail`` fraction of samples."""
    target = _as_target(target)
    rows = traj.rows
    n = max(1, int(math.ceil(len(rows) * tail)))
    errs = [np.hypot(*(np.array([r[1], r[2]]) - target.state(r[0]).Xg)) for r in rows[-n:]]
    return float(np.mean(errs))


def simulate_scenario(cfg: ScenarioConfig, p: APFParams = APFParams(), radius: float = 0.5):
    """Grid scenario: obstacle cells become discs, start/target cell centers
    become robot and goal; a track (if any) drives the goal."""
    m = cfg.map
    robot = RobotState([m.start.col, m.start.row])
    if cfg.moving_target_track:
        target = TrackTarget(cfg.moving_target_track)
    else:
        target = StaticTarget([m.target.col, m.target.row])
    return simulate(robot, target, ObstacleSet.from_grid(m.blocked, radius), p)
