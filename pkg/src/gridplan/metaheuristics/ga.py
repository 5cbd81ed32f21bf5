"""Genetic algorithm over waypoint paths.

Chromosomes are either bit strings or fixed-length waypoint sequences
(start, interior genes, target). Repeated interior genes collapse when the
path is decoded, so the effective waypoint count can shrink.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

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
    string_pull,
    substream,
)

BINARY = "binary"
WAYPOINT = "waypoint"


@dataclass(frozen=True)
class Chromosome:
    genes: tuple
    encoding: str = WAYPOINT
    fitness: float | None = None
    feasible: bool = True

    def __len__(self):
        return len(self.genes)

    def decoded(self) -> list[Coord]:
        if self.encoding != WAYPOINT:
            raise TypeError("only waypoint chromosomes decode to paths")
        return dedupe(self.genes)


@dataclass(frozen=True)
class GAParams:
    population: int = 30
    generations: int = 200
    waypoints: int = 6
    crossover_rate: float = 0.8
    mutation_rate: float = 0.3
    resample_radius: int = 3
    patience: int = 40

    def __post_init__(self):
        if self.population < 1 or self.generations < 0 or self.waypoints < 0:
            raise ValueError("population >= 1, generations >= 0, waypoints >= 0 required")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")


def fitness(c: Chromosome, fp: FitnessParams = FitnessParams(),
            los: LineOfSight | None = None) -> float:
    """Path fitness of a waypoint chromosome; infeasible paths are scaled by
    ``INFEASIBLE_PENALTY``."""
    pts = c.decoded()
    value = path_fitness(polyline_length(pts), len(pts), fp.R_term)
    if los is not None and not los.path_clear(pts):
        value *= INFEASIBLE_PENALTY
    return value


def evaluate(c: Chromosome, fp: FitnessParams, los: LineOfSight) -> Chromosome:
    if c.fitness is not None:
        return c
    pts = c.decoded()
    feasible = los.path_clear(pts)
    value = path_fitness(polyline_length(pts), len(pts), fp.R_term)
    return replace(c, fitness=value if feasible else value * INFEASIBLE_PENALTY, feasible=feasible)


def select(pop: Sequence[Chromosome], rng: np.random.Generator,
           draws: Sequence[float] | None = None) -> list[Chromosome]:
    """Keep individuals whose max-normalized fitness beats a fresh uniform draw.

    The best individual is always kept; the population is refilled to its
    original size with uniformly chosen clones of the kept ones.
    """
    if not pop:
        raise ValueError("empty population")
    f = np.array([c.fitness for c in pop], dtype=float)
    if np.any(np.isnan(f)):
        raise ValueError("population has unevaluated individuals")
    top = f.max()
    norm = f / top if top > 0 else np.ones_like(f)
    r = rng.random(len(pop)) if draws is None else np.asarray(draws, dtype=float)
    keep = norm > r
    keep[int(np.argmax(f))] = True
    kept = [c for c, k in zip(pop, keep) if k]
    refill = rng.integers(len(kept), size=len(pop) - len(kept))
    return kept + [kept[i] for i in refill]


def crossover(a: Chromosome, b: Chromosome, rng: np.random.Generator,
              segment: tuple[int, int] | None = None,
              los: LineOfSight | None = None) -> tuple[Chromosome, Chromosome]:
    """Swap one contiguous gene segment ``[i, j)`` between two parents."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if segment is None:
        i, j = sorted(int(v) for v in rng.integers(0, len(a) + 1, size=2))
    else:
        i, j = segment
    ga, gb = list(a.genes), list(b.genes)
    ga[i:j], gb[i:j] = gb[i:j], ga[i:j]
    kids = []
    for genes, parent in ((ga, a), (gb, b)):
        child = Chromosome(tuple(genes), parent.encoding)
        if los is not None and child.encoding == WAYPOINT:
            child = replace(child, feasible=los.path_clear(child.decoded()))
        kids.append(child)
    return kids[0], kids[1]


def _resample(m: GridMap, around: Coord, anchor: Coord, los: LineOfSight,
              rng: np.random.Generator, radius: int, tries: int = 30) -> Coord | None:
    """Random free cell within ``radius`` of ``around`` that ``anchor`` can see."""
    r0, c0 = around
    for _ in range(tries):
        r = int(np.clip(r0 + rng.integers(-radius, radius + 1), 0, m.rows - 1))
        c = int(np.clip(c0 + rng.integers(-radius, radius + 1), 0, m.cols - 1))
        if not m.blocked[r, c] and los.clear(anchor, (r, c)):
            return Coord(r, c)
    return None


def mutate(c: Chromosome, rate: float, rng: np.random.Generator, m: GridMap | None = None,
           graph: GridGraph | None = None, los: LineOfSight | None = None,
           radius: int = 3) -> Chromosome:
    """Bit flips (binary) or two-gene re-sampling with shortest-path repair.

    Waypoint repair: genes ``i < j`` (non-adjacent, interior) move to nearby
    free cells visible from their outer neighbors; the genes between them are
    replaced by the string-pulled shortest path. A repair that needs more
    slots than available leaves the chromosome unchanged.
    """
    if not 0 <= rate <= 1:
        raise ValueError("rate must be in [0, 1]")
    if c.encoding == BINARY:
        flips = rng.random(len(c)) < rate
        genes = tuple(int(g) ^ int(f) for g, f in zip(c.genes, flips))
        return Chromosome(genes, BINARY) if flips.any() else c
    if rate == 0 or rng.random() >= rate:
        return c
    if m is None:
        raise ValueError("waypoint mutation needs the map")
    graph = graph or GridGraph(m)
    los = los or LineOfSight(m)
    n = len(c)
    if n < 5:
        return c
    i = int(rng.integers(1, n - 3))
    j = int(rng.integers(i + 2, n - 1))
    genes = [Coord(*g) for g in c.genes]
    gi = _resample(m, genes[i], genes[i - 1], los, rng, radius)
    gj = _resample(m, genes[j], genes[j + 1], los, rng, radius)
    if gi is None or gj is None:
        return c
    link = graph.shortest(gi, gj)
    if link is None:
        return c
    pulled = string_pull(link, los)
    slots = j - i - 1
    if len(pulled) - 2 > slots:
        return c
    middle = pad_route(pulled, slots, los)
    new = genes[:i] + [gi] + middle + [gj] + genes[j + 1:]
    return Chromosome(tuple(new), WAYPOINT, feasible=los.path_clear(dedupe(new)))


def initial_population(m: GridMap, graph: GridGraph, los: LineOfSight, params: GAParams,
                       seed: int) -> list[Chromosome]:
    pop = []
    for k in range(params.population):
        rng = substream(seed, 0, k)
        route = None
        for _ in range(20):
            route = random_feasible_route(m, graph, los, rng, params.waypoints)
            if route is not None:
                break
        if route is None:
            # straight line between the endpoints; infeasible but keeps the slot
            t = np.linspace(0, 1, params.waypoints + 2)
            route = [Coord(int(round(m.start[0] + (m.target[0] - m.start[0]) * s)),
                           int(round(m.start[1] + (m.target[1] - m.start[1]) * s))) for s in t]
        genes = [m.start, *pad_route(route, params.waypoints, los), m.target]
        pop.append(Chromosome(tuple(genes), WAYPOINT))
    return pop


def run_ga(cfg: ScenarioConfig, params: GAParams = GAParams(),
           fp: FitnessParams = FitnessParams(), seed: int = 0) -> TrialResult:
    """Generational select -> crossover -> mutate loop with elitism."""
    t0 = time.perf_counter()
    m = cfg.map
    graph, los = GridGraph(m), LineOfSight(m)
    if m.start == m.target:
        return TrialResult("ga", cfg.name, seed, True, 0.0, 0, _ms(t0), path=(m.start,))
    pop = [evaluate(c, fp, los) for c in initial_population(m, graph, los, params, seed)]
    best = max(pop, key=lambda c: c.fitness)
    best_gen = 0
    trace = OptimizerTrace()
    evals = len(pop)
    trace.add(polyline_length(best.decoded()), _mean_cost(pop), evals)
    for gen in range(1, params.generations + 1):
        rng = substream(seed, gen)
        parents = select(pop, rng)
        children = []
        for k in range(0, len(parents) - 1, 2):
            a, b = parents[k], parents[k + 1]
            if rng.random() < params.crossover_rate:
                a, b = crossover(a, b, rng)
            children += [a, b]
        if len(parents) % 2:
            children.append(parents[-1])
        nxt = []
        for k, child in enumerate(children):
            child = mutate(child, params.mutation_rate, substream(seed, gen, k), m, graph, los,
                           params.resample_radius)
            if child.fitness is None:
                evals += 1
            nxt.append(evaluate(child, fp, los))
        worst = int(np.argmin([c.fitness for c in nxt]))
        nxt[worst] = best
        pop = nxt
        champion = max(pop, key=lambda c: c.fitness)
        if champion.fitness > best.fitness:
            best, best_gen = champion, gen
        trace.add(polyline_length(best.decoded()), _mean_cost(pop), evals)
        if gen - best_gen >= params.patience:
            break
    path = tuple(best.decoded())
    ok = best.feasible
    return TrialResult("ga", cfg.name, seed, ok, polyline_length(path) if ok else math.inf,
                       best_gen, _ms(t0), trace=trace, path=path)


def _mean_cost(pop) -> float:
    return float(np.mean([polyline_length(c.decoded()) for c in pop]))


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0
