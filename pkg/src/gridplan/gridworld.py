"""Occupancy-grid world model, scenario text I/O and the shortest-path oracle.

Coordinates are 0-based ``(row, col)``. Continuous quantities (tracks, the
potential-field simulator) use ``x = col`` and ``y = row`` in cell units, with
cell centers at integer positions.
"""
from __future__ import annotations

import enum
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

SQRT2 = math.sqrt(2.0)
UNREACHABLE = math.inf


class Coord(NamedTuple):
    row: int
    col: int


class Neighborhood(enum.Enum):
    FOUR = 4
    EIGHT = 8

    @classmethod
    def parse(cls, value) -> "Neighborhood":
        if isinstance(value, Neighborhood):
            return value
        text = str(value).strip().lower()
        if text in ("4", "four"):
            return cls.FOUR
        if text in ("8", "eight"):
            return cls.EIGHT
        raise ValueError(f"unknown neighborhood {value!r}")


# N, E, S, W, then NE, SE, SW, NW
OFFSETS_FOUR = ((-1, 0), (0, 1), (1, 0), (0, -1))
OFFSETS_EIGHT = OFFSETS_FOUR + ((-1, 1), (1, 1), (1, -1), (-1, -1))


def offsets(nb: Neighborhood) -> tuple[tuple[int, int], ...]:
    return OFFSETS_FOUR if Neighborhood.parse(nb) is Neighborhood.FOUR else OFFSETS_EIGHT


def step_cost(dr: int, dc: int) -> float:
    return SQRT2 if dr and dc else 1.0


class ScenarioError(ValueError):
    """Malformed scenario text; ``lineno`` is 1-based (0 when not line-specific)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno else message)


@dataclass(frozen=True, eq=False)
class GridMap:
    """Rectangular occupancy grid with a start and a target cell.

    ``blocked`` is a read-only boolean matrix, ``True`` for obstacle cells.
    """

    blocked: np.ndarray
    start: Coord
    target: Coord

    def __post_init__(self):
        blocked = np.array(self.blocked, dtype=bool)
        if blocked.ndim != 2 or blocked.shape[0] < 1 or blocked.shape[1] < 1:
            raise ValueError("occupancy matrix must be 2-D and non-empty")
        blocked.setflags(write=False)
        object.__setattr__(self, "blocked", blocked)
        for name in ("start", "target"):
            r, c = getattr(self, name)
            object.__setattr__(self, name, Coord(int(r), int(c)))
        for name in ("start", "target"):
            c = getattr(self, name)
            if not self.in_bounds(c):
                raise ValueError(f"{name} {tuple(c)} out of bounds")
            if blocked[c]:
                raise ValueError(f"{name} {tuple(c)} is an obstacle")

    @property
    def rows(self) -> int:
        return self.blocked.shape[0]

    @property
    def cols(self) -> int:
        return self.blocked.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.blocked.shape

    def in_bounds(self, c) -> bool:
        return 0 <= c[0] < self.blocked.shape[0] and 0 <= c[1] < self.blocked.shape[1]

    def is_free(self, c) -> bool:
        return self.in_bounds(c) and not self.blocked[c[0], c[1]]

    def free_cells(self) -> list[Coord]:
        return [Coord(int(r), int(c)) for r, c in np.argwhere(~self.blocked)]

    def with_endpoints(self, start=None, target=None) -> "GridMap":
        return GridMap(self.blocked, start if start is not None else self.start,
                       target if target is not None else self.target)

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (self.start == other.start and self.target == other.target
                and np.array_equal(self.blocked, other.blocked))

    def __hash__(self):
        return hash((self.start, self.target, self.blocked.tobytes(), self.shape))

    @classmethod
    def from_strings(cls, lines: Sequence[str]) -> "GridMap":
        """Build from rows of ``.#ST`` characters (no header)."""
        header = f"{len(lines)} {len(lines[0]) if lines else 0}"
        return load_scenario("\n".join([header, *lines])).map


@dataclass(frozen=True)
class TrackSample:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class ScenarioConfig:
    map: GridMap
    neighborhood: Neighborhood = Neighborhood.FOUR
    moving_target_track: tuple[TrackSample, ...] | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "neighborhood", Neighborhood.parse(self.neighborhood))
        track = self.moving_target_track
        if track is not None:
            track = tuple(s if isinstance(s, TrackSample) else TrackSample(*s) for s in track)
            if not track:
                raise ValueError("moving-target track is empty")
            times = [s.t for s in track]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("track timestamps must be strictly increasing")
            object.__setattr__(self, "moving_target_track", track)


# ---------------------------------------------------------------- scenario I/O

_CELL_CHARS = frozenset(".#ST")


def load_scenario(text: str, name: str = "") -> ScenarioConfig:
    """Parse scenario text.

    Format: optional ``#`` comment lines, a ``rows cols`` header, ``rows`` grid
    lines over ``.#ST``, then optional ``track: x,y,t; ...`` and
    ``neighborhood: four|eight`` lines.
    """
    lines = text.splitlines()
    i = 0
    while i < len(lines) and (not lines[i].strip() or lines[i].lstrip().startswith("#")):
        i += 1
    if i == len(lines):
        raise ScenarioError("missing 'rows cols' header")
    parts = lines[i].split()
    try:
        rows, cols = (int(p) for p in parts)
    except ValueError:
        raise ScenarioError(f"bad header {lines[i]!r}, expected 'rows cols'", i + 1) from None
    if rows < 1 or cols < 1:
        raise ScenarioError("dimensions must be positive", i + 1)

    blocked = np.zeros((rows, cols), dtype=bool)
    start = target = None
    for r in range(rows):
        lineno = i + 2 + r
        if lineno > len(lines):
            raise ScenarioError(f"expected {rows} grid lines, found {r}", lineno)
        line = lines[lineno - 1].rstrip("\r\n")
        if len(line) != cols:
            raise ScenarioError(f"grid line has {len(line)} cells, expected {cols}", lineno)
        bad = set(line) - _CELL_CHARS
        if bad:
            raise ScenarioError(f"invalid cell character(s) {''.join(sorted(bad))!r}", lineno)
        for c, ch in enumerate(line):
            if ch == "#":
                blocked[r, c] = True
            elif ch == "S":
                if start is not None:
                    raise ScenarioError("duplicate start 'S'", lineno)
                start = Coord(r, c)
            elif ch == "T":
                if target is not None:
                    raise ScenarioError("duplicate target 'T'", lineno)
                target = Coord(r, c)
    if start is None:
        raise ScenarioError("missing start 'S'")
    if target is None:
        raise ScenarioError("missing target 'T'")

    track = None
    nb = Neighborhood.FOUR
    for lineno in range(i + rows + 2, len(lines) + 1):
        line = lines[lineno - 1].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip().lower()
        if not sep or key not in ("track", "neighborhood"):
            raise ScenarioError(f"unexpected trailing line {line!r}", lineno)
        if key == "neighborhood":
            try:
                nb = Neighborhood.parse(rest)
            except ValueError as exc:
                raise ScenarioError(str(exc), lineno) from None
            continue
        samples = []
        for item in filter(None, (s.strip() for s in rest.split(";"))):
            try:
                x, y, t = (float(v) for v in item.split(","))
            except ValueError:
                raise ScenarioError(f"bad track sample {item!r}", lineno) from None
            samples.append(TrackSample(x, y, t))
        try:
            track = ScenarioConfig(GridMap(blocked, start, target), nb, samples).moving_target_track
        except ValueError as exc:
            raise ScenarioError(str(exc), lineno) from None
    return ScenarioConfig(GridMap(blocked, start, target), nb, track, name=name)


def serialize_scenario(cfg: ScenarioConfig) -> str:
    m = cfg.map
    if m.start == m.target:
        raise ValueError("start and target share a cell; the text format cannot express that")
    grid = np.where(m.blocked, "#", ".").astype("<U1")
    grid[m.start] = "S"
    grid[m.target] = "T"
    out = [f"{m.rows} {m.cols}", *("".join(row) for row in grid)]
    if cfg.neighborhood is not Neighborhood.FOUR:
        out.append(f"neighborhood: {cfg.neighborhood.name.lower()}")
    if cfg.moving_target_track:
        out.append("track: " + "; ".join(f"{s.x!r},{s.y!r},{s.t!r}"
                                         for s in cfg.moving_target_track))
    return "\n".join(out) + "\n"


def read_scenario(path) -> ScenarioConfig:
    from pathlib import Path

    p = Path(path)
    return load_scenario(p.read_text(), name=p.stem)


# ---------------------------------------------------------------- field text format

def format_field(d: np.ndarray, blocked: np.ndarray | None = None) -> str:
    """Matrix dump: obstacles as ``-1``, unreachable as ``inf``.

    Values are written as integers when every finite value is integral,
    otherwise at 6 significant digits.
    """
    d = np.asarray(d, dtype=float)
    if blocked is None:
        blocked = np.zeros(d.shape, dtype=bool)
    finite = d[np.isfinite(d) & ~blocked]
    integral = bool(np.all(finite == np.round(finite)))

    def fmt(v, obst):
        if obst:
            return "-1"
        if not math.isfinite(v):
            return "inf"
        return str(int(round(v))) if integral else f"{v:.6g}"

    return "\n".join(" ".join(fmt(v, o) for v, o in zip(row, orow))
                     for row, orow in zip(d, blocked)) + "\n"


def parse_field(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`format_field`; returns ``(distances, obstacle_mask)``."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError("field rows are empty or ragged")
    d = np.array([[float(v) for v in r] for r in rows])
    mask = d == -1
    d[mask] = np.nan
    return d, mask


# ---------------------------------------------------------------- geometry

def neighbors(m: GridMap, c, nb: Neighborhood = Neighborhood.FOUR) -> list[Coord]:
    """In-bounds neighbors of ``c`` in canonical order N, E, S, W, NE, SE, SW, NW."""
    r, q = c
    if not m.in_bounds(c):
        raise ValueError(f"{tuple(c)} out of bounds")
    rows, cols = m.shape
    return [Coord(r + dr, q + dc) for dr, dc in offsets(nb)
            if 0 <= r + dr < rows and 0 <= q + dc < cols]


def path_length(path: Sequence, nb: Neighborhood = Neighborhood.EIGHT) -> float:
    """Sum of step costs, 1 per orthogonal and sqrt(2) per diagonal step."""
    allowed = set(offsets(nb))
    total = 0.0
    for a, b in zip(path, path[1:]):
        d = (b[0] - a[0], b[1] - a[1])
        if d not in allowed:
            raise ValueError(f"waypoints {tuple(a)} -> {tuple(b)} are not adjacent")
        total += step_cost(*d)
    return total


def validate_path(m: GridMap, path: Sequence, nb: Neighborhood) -> bool:
    """True when every waypoint is free and consecutive waypoints are adjacent."""
    allowed = set(offsets(nb))
    if not path or not all(m.is_free(p) for p in path):
        return False
    return all((b[0] - a[0], b[1] - a[1]) in allowed for a, b in zip(path, path[1:]))


# ---------------------------------------------------------------- oracle

def shortest_path_oracle(m: GridMap, nb: Neighborhood = Neighborhood.FOUR, source=None):
    """Exact distances to ``source`` (default: the target) and a path from start.

    BFS with unit steps for FOUR; Dijkstra with sqrt(2) diagonals for EIGHT.
    Returns ``(dist, path)``; ``path`` is ``None`` when the start is unreachable.
    """
    nb = Neighborhood.parse(nb)
    source = Coord(*(source if source is not None else m.target))
    rows, cols = m.shape
    blocked = m.blocked
    dist = np.full((rows, cols), UNREACHABLE)
    dist[source] = 0.0
    if nb is Neighborhood.FOUR:
        queue = deque([source])
        while queue:
            r, c = queue.popleft()
            nd = dist[r, c] + 1.0
            for dr, dc in OFFSETS_FOUR:
                a, b = r + dr, c + dc
                if 0 <= a < rows and 0 <= b < cols and not blocked[a, b] and dist[a, b] == UNREACHABLE:
                    dist[a, b] = nd
                    queue.append((a, b))
    else:
        heap = [(0.0, source)]
        done = np.zeros((rows, cols), dtype=bool)
        while heap:
            du, (r, c) = heapq.heappop(heap)
            if done[r, c]:
                continue
            done[r, c] = True
            for dr, dc in OFFSETS_EIGHT:
                a, b = r + dr, c + dc
                if 0 <= a < rows and 0 <= b < cols and not blocked[a, b]:
                    nd = du + step_cost(dr, dc)
                    if nd < dist[a, b]:
                        dist[a, b] = nd
                        heapq.heappush(heap, (nd, (a, b)))

    if not math.isfinite(dist[m.start]):
        return dist, None
    path = [m.start]
    cur = m.start
    while cur != source:
        best = None
        for dr, dc in offsets(nb):
            a, b = cur[0] + dr, cur[1] + dc
            if 0 <= a < rows and 0 <= b < cols and not blocked[a, b]:
                val = dist[a, b] + step_cost(dr, dc)
                if abs(val - dist[cur]) <= 1e-9 and (best is None or dist[a, b] < dist[best]):
                    best = Coord(a, b)
        path.append(best)
        cur = best
    return dist, tuple(path)


def local_consistency_violation(d: np.ndarray, m: GridMap, nb: Neighborhood,
                                sources=None, atol: float = 1e-9):
    """First free cell whose value differs from min over neighbors of (d + step).

    Source cells must hold 0. Returns ``None`` when the field is consistent.
    """
    sources = {Coord(*s) for s in (sources if sources is not None else [m.target])}
    rows, cols = m.shape
    for r in range(rows):
        for c in range(cols):
            if m.blocked[r, c]:
                continue
            if (r, c) in sources:
                if d[r, c] != 0:
                    return Coord(r, c)
                continue
            best = UNREACHABLE
            for dr, dc in offsets(nb):
                a, b = r + dr, c + dc
                if 0 <= a < rows and 0 <= b < cols and not m.blocked[a, b]:
                    best = min(best, d[a, b] + step_cost(dr, dc))
            v = d[r, c]
            if math.isinf(best) and math.isinf(v):
                continue
            if not (abs(v - best) <= atol):
                return Coord(r, c)
    return None
