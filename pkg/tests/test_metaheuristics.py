import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridplan.gridworld import GridMap, Neighborhood, ScenarioConfig, shortest_path_oracle
from gridplan.metaheuristics import (
    ACOParams,
    Beetle,
    BSOParams,
    Chromosome,
    FitnessParams,
    GAParams,
    LineOfSight,
    PheromoneMatrix,
    antennae_step,
    chemotaxis_direction,
    construct_tour,
    crossover,
    fitness,
    mutate,
    path_fitness,
    random_direction,
    run_aco,
    run_bso,
    run_ga,
    select,
    update_pheromone,
)
from gridplan.metaheuristics.common import (
    DegenerateChromosomeError,
    GridGraph,
    dedupe,
    pad_route,
    polyline_length,
    string_pull,
    substream,
)

from conftest import grid_maps

WALL = GridMap.from_strings([
    "S.........",
    "..........",
    "#######...",
    "..........",
    ".........T",
])


# ---------------------------------------------------------------- fitness

def test_fitness_closed_forms():
    assert path_fitness(1, 2, 0) == 2
    assert path_fitness(2, 5, 0) == 0.75
    assert path_fitness(2, 5, 1) == 1.25


@pytest.mark.parametrize("d, n", [(0, 3), (1, 1), (-1, 4)])
def test_fitness_degenerate(d, n):
    with pytest.raises(DegenerateChromosomeError):
        path_fitness(d, n)


def test_fitness_params():
    with pytest.raises(ValueError):
        FitnessParams(R_term=-1)


def test_chromosome_fitness_penalty():
    los = LineOfSight(WALL)
    straight = Chromosome(((0, 0), (4, 9)))
    assert fitness(straight) == path_fitness(math.hypot(4, 9), 2)
    assert fitness(straight, los=los) == pytest.approx(path_fitness(math.hypot(4, 9), 2) * 1e-3)


# ---------------------------------------------------------------- common helpers

def test_line_of_sight_corner_graze():
    m = GridMap.from_strings(["S#", "#T"])
    los = LineOfSight(m)
    assert los.clear((0, 0), (1, 1))
    assert not LineOfSight(WALL).clear((0, 0), (4, 0))
    assert LineOfSight(WALL).clear((0, 0), (2, 9))
    assert not LineOfSight(WALL).clear((0, 0), (3, 9))


def test_dedupe_cuts_loops():
    assert dedupe([(0, 0), (0, 1), (1, 1), (0, 1), (0, 2)]) == [(0, 0), (0, 1), (0, 2)]
    assert dedupe([(0, 0), (0, 0), (1, 1)]) == [(0, 0), (1, 1)]


def test_graph_matches_oracle():
    g = GridGraph(WALL)
    d, _ = shortest_path_oracle(WALL, Neighborhood.EIGHT)
    assert g.distance(WALL.start, WALL.target) == pytest.approx(d[WALL.start])
    path = g.shortest(WALL.start, WALL.target)
    assert path[0] == WALL.start and path[-1] == WALL.target


def test_string_pull_and_pad():
    los = LineOfSight(WALL)
    cells = GridGraph(WALL).shortest(WALL.start, WALL.target)
    pulled = string_pull(cells, los)
    assert los.path_clear(pulled)
    assert polyline_length(pulled) <= polyline_length(cells) + 1e-12
    genes = pad_route(pulled, 6, los)
    assert len(genes) == 6
    assert los.path_clear([WALL.start, *genes, WALL.target])


def test_substreams_independent_of_order():
    a = substream(5, 1, 2).random(3)
    substream(5, 9, 9).random(100)
    assert np.array_equal(substream(5, 1, 2).random(3), a)
    assert not np.array_equal(substream(5, 2, 1).random(3), a)


# ---------------------------------------------------------------- GA operators

def _pop(values):
    return [Chromosome(((0, 0), (0, i + 1)), fitness=v) for i, v in enumerate(values)]


def test_select_with_fixed_draws():
    pop = _pop([1.0, 0.5, 0.2])
    kept = select(pop, np.random.default_rng(0), draws=[0.99, 0.4, 0.9])
    assert kept[0] is pop[0] and kept[1] is pop[1]
    assert len(kept) == 3 and kept[2] in (pop[0], pop[1])


def test_select_always_keeps_best():
    pop = _pop([0.3, 0.9, 0.1])
    kept = select(pop, np.random.default_rng(0), draws=[1.0, 1.0, 1.0])
    assert all(c is pop[1] for c in kept)


def test_select_rejects_unevaluated():
    with pytest.raises(ValueError):
        select([Chromosome(((0, 0), (0, 1)))], np.random.default_rng(0))
    with pytest.raises(ValueError):
        select([], np.random.default_rng(0))


def test_crossover_segment_swap():
    a = Chromosome(tuple((0, i) for i in range(5)))
    b = Chromosome(tuple((1, i) for i in range(5)))
    c, d = crossover(a, b, np.random.default_rng(0), segment=(1, 3))
    assert c.genes == ((0, 0), (1, 1), (1, 2), (0, 3), (0, 4))
    assert d.genes == ((1, 0), (0, 1), (0, 2), (1, 3), (1, 4))
    with pytest.raises(ValueError, match="mismatch"):
        crossover(a, Chromosome(a.genes[:3]), np.random.default_rng(0))


def test_binary_mutation():
    c = Chromosome((0, 1, 0, 1), encoding="binary")
    assert mutate(c, 1.0, np.random.default_rng(0)).genes == (1, 0, 1, 0)
    assert mutate(c, 0.0, np.random.default_rng(0)) is c
    with pytest.raises(TypeError):
        c.decoded()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_waypoint_mutation_keeps_feasibility(seed):
    los, graph = LineOfSight(WALL), GridGraph(WALL)
    route = string_pull(graph.shortest(WALL.start, WALL.target), los)
    c = Chromosome((WALL.start, *pad_route(route, 6, los), WALL.target))
    out = mutate(c, 1.0, np.random.default_rng(seed), WALL, graph, los)
    assert len(out) == len(c)
    assert out.genes[0] == WALL.start and out.genes[-1] == WALL.target
    assert out is c or los.path_clear(out.decoded()) == out.feasible


# ---------------------------------------------------------------- pheromone

@pytest.mark.parametrize("beta", [0.5, 0.25])
def test_pheromone_pure_decay(beta):
    ph = PheromoneMatrix.uniform((2, 2), 1.0, beta)
    for k in range(1, 12):
        ph = update_pheromone(ph)
        assert np.all(ph.tau == (1 - beta) ** k)


def test_pheromone_floor():
    ph = PheromoneMatrix.uniform((1, 2), 1e-4, 0.5)
    assert np.all(update_pheromone(ph).tau == ph.tau_min)


def test_two_deposits_exact():
    ph = PheromoneMatrix.uniform((1, 3), 1.0, 0.1, 1.0)
    edge = [((0, 0), (0, 1))]
    out = update_pheromone(ph, [(edge, 5.0), (edge, 10 / 3)])
    assert out.get((0, 0), (0, 1)) == 1.4
    assert out.get((0, 1), (0, 0)) == 1.4
    assert out.get((0, 1), (0, 2)) == 0.9


def test_elitist_deposit():
    ph = PheromoneMatrix.uniform((1, 2), 1.0, 0.5, 1.0)
    edge = [((0, 0), (0, 1))]
    out = update_pheromone(ph, [], best=(edge, 4.0), elitist_bonus=2.0)
    assert out.get((0, 0), (0, 1)) == 0.5 + 2.0 / 4.0


def test_pheromone_rejects_bad_cost():
    with pytest.raises(ValueError):
        update_pheromone(PheromoneMatrix.uniform((1, 2), 1.0), [([((0, 0), (0, 1))], 0.0)])


def test_aco_params_validation():
    for kw in ({"beta_e": 0}, {"beta_e": 1}, {"ants": 0}, {"Q": 0}):
        with pytest.raises(ValueError):
            ACOParams(**kw)


def test_tour_is_valid_walk():
    p = ACOParams()
    ph = PheromoneMatrix.uniform(WALL.shape, p.tau0)
    path, cost = construct_tour(ph, WALL, p, np.random.default_rng(1))
    assert path[0] == WALL.start and path[-1] == WALL.target
    assert len(set(path)) == len(path)
    assert all(not WALL.blocked[c] for c in path)


def test_trapped_ant():
    m = GridMap.from_strings(["S#.", "##T"])
    ph = PheromoneMatrix.uniform(m.shape, 0.1)
    assert construct_tour(ph, m, ACOParams(), np.random.default_rng(0)) == (None, math.inf)


def test_aco_zero_iterations_fails():
    res = run_aco(ScenarioConfig(WALL), ACOParams(iterations=0))
    assert not res.success and math.isinf(res.path_len)


# ---------------------------------------------------------------- beetles

def test_direction_unit_norm():
    rng = np.random.default_rng(0)
    worst = max(abs(np.linalg.norm(random_direction(d, rng)) - 1) for d in (1, 2, 12) for _ in range(2000))
    assert worst <= 1e-12


def test_antennae_step_moves_uphill():
    f = lambda x: -float(x @ x)  # noqa: E731
    x0 = np.array([3.0, 0.0])
    b = Beetle(x0, np.zeros(2), x0, f(x0), f(x0), d0=1.0, delta=1.0)
    p = BSOParams(lambda_b=0.0, gamma=0.5)
    nb = antennae_step(b, f, p, np.random.default_rng(0), direction=np.array([1.0, 0.0]))
    assert nb.x.tolist() == [2.0, 0.0]
    assert nb.delta == 0.5 and nb.fails == 0
    stuck = antennae_step(nb, lambda x: -100.0, p, np.random.default_rng(0), direction=np.array([1.0, 0.0]))
    assert stuck.fails == 1


def test_chemotaxis_policy():
    rng = np.random.default_rng(0)
    fit = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    g, c = np.array([10.0, 0.0]), np.array([0.0, 10.0])
    top = Beetle(np.zeros(2), np.zeros(2), np.zeros(2), 5, 5, 1, 1)
    low = Beetle(np.zeros(2), np.zeros(2), np.zeros(2), 1, 1, 1, 1)
    assert chemotaxis_direction(top, fit, g, c, rng).tolist() == [1, 0]
    assert chemotaxis_direction(low, fit, g, c, rng).tolist() == [0, 1]
    last = np.array([0.6, 0.8])
    failed2 = Beetle(np.zeros(2), np.zeros(2), np.zeros(2), 1, 1, 1, 1, last, fails=2)
    assert chemotaxis_direction(failed2, fit, g, c, rng).tolist() == [-0.6, -0.8]
    failed1 = Beetle(np.zeros(2), np.zeros(2), np.zeros(2), 1, 1, 1, 1, last, fails=1)
    assert np.linalg.norm(chemotaxis_direction(failed1, fit, g, c, rng)) == pytest.approx(1)


def test_bso_params_validation():
    for kw in ({"gamma": 0}, {"lambda_b": 1.5}, {"swarm": 0}, {"d0": 0}):
        with pytest.raises(ValueError):
            BSOParams(**kw)


# ---------------------------------------------------------------- full runs

@pytest.mark.parametrize("run", [
    lambda cfg, s: run_ga(cfg, GAParams(population=12, generations=30), seed=s),
    lambda cfg, s: run_aco(cfg, ACOParams(iterations=15), seed=s),
    lambda cfg, s: run_bso(cfg, BSOParams(iterations=15), seed=s),
], ids=["ga", "aco", "bso"])
def test_runs_deterministic_and_feasible(run):
    cfg = ScenarioConfig(WALL, name="wall")
    a, b = run(cfg, 3), run(cfg, 3)
    assert a == b.__class__(**{**b.__dict__, "wall_ms": a.wall_ms})
    assert a.success
    assert LineOfSight(WALL).path_clear(a.path)
    assert len(a.trace.best_cost) >= 1
    assert a.trace.to_csv().startswith("iter,best_cost,mean_cost,evaluations\n")


@settings(max_examples=15, deadline=None)
@given(grid_maps(max_side=10, max_density=0.3), st.integers(0, 100))
def test_optimizers_never_cross_obstacles(m, seed):
    cfg = ScenarioConfig(m)
    los = LineOfSight(m)
    for res in (run_ga(cfg, GAParams(population=6, generations=5), seed=seed),
                run_aco(cfg, ACOParams(ants=4, iterations=5), seed=seed),
                run_bso(cfg, BSOParams(swarm=4, iterations=5), seed=seed)):
        if res.success:
            assert res.path[0] == m.start and res.path[-1] == m.target
            assert los.path_clear(res.path)
