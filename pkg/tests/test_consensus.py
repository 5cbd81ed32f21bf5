import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridplan.consensus import (
    CorruptFieldError,
    DistanceField,
    backtrack,
    init_net,
    plan,
    solve,
    sweep,
)
from gridplan.gridworld import (
    GridMap,
    Neighborhood,
    format_field,
    load_scenario,
    path_length,
    shortest_path_oracle,
    validate_path,
)

from conftest import DATA, grid_maps

FOUR, EIGHT = Neighborhood.FOUR, Neighborhood.EIGHT


def test_reference_field_matches_tabulation(reference_text, reference_field):
    m = load_scenario(reference_text).map
    fld = solve(init_net(m, FOUR))
    assert fld.converged
    got = np.where(m.blocked, -1, fld.d)
    np.testing.assert_array_equal(got, reference_field)
    assert format_field(fld.d, m.blocked) == (DATA / "reference_distance.txt").read_text()


def test_single_sweep_from_leader():
    m = GridMap.from_strings(["T..S"])
    net, change = sweep(init_net(m))
    assert net.state.tolist() == [[0, 1, math.inf, math.inf]]
    assert math.isinf(change)
    assert net.sweeps == 1


def test_converged_sweep_reports_zero_change():
    m = GridMap.from_strings(["T.S"])
    fld = solve(init_net(m))
    net = init_net(m)
    for _ in range(fld.sweeps):
        net, _ = sweep(net)
    _, change = sweep(net)
    assert change == 0.0


def test_truncated_solve_flags_unconverged():
    m = GridMap.from_strings(["T.....S"])
    fld = solve(init_net(m), max_sweeps=2)
    assert not fld.converged
    assert math.isinf(fld[m.start])


def test_multiple_leaders():
    m = GridMap.from_strings(["T...S"])
    fld = solve(init_net(m, FOUR, leaders=[(0, 0), (0, 4)]))
    assert fld.d.tolist() == [[0, 1, 2, 1, 0]]


def test_leader_on_obstacle_rejected():
    m = GridMap.from_strings(["T#S"])
    with pytest.raises(ValueError):
        init_net(m, FOUR, leaders=[(0, 1)])


def test_edges_biases():
    m = GridMap.from_strings(["T.", ".S"])
    e = init_net(m, EIGHT).edges()
    assert len(e) == 6
    assert e[((0, 0), (1, 1))] == pytest.approx(math.sqrt(2))
    assert init_net(m, FOUR).followers == {(0, 1), (1, 0), (1, 1)}


@settings(max_examples=80, deadline=None)
@given(grid_maps(max_side=15), st.sampled_from([FOUR, EIGHT]))
def test_solve_equals_oracle(m, nb):
    fld = solve(init_net(m, nb))
    ref, _ = shortest_path_oracle(m, nb)
    free = ~m.blocked
    assert fld.converged
    assert np.array_equal(np.isinf(fld.d[free]), np.isinf(ref[free]))
    finite = free & np.isfinite(ref)
    np.testing.assert_allclose(fld.d[finite], ref[finite], atol=1e-9, rtol=0)


@settings(max_examples=60, deadline=None)
@given(grid_maps(max_side=15), st.sampled_from([FOUR, EIGHT]))
def test_plan_is_optimal(m, nb):
    path, fld = plan(m, nb)
    if math.isinf(fld[m.start]):
        assert path is None
        return
    assert validate_path(m, path, nb)
    assert path[0] == m.start and path[-1] == m.target
    assert path_length(path, nb) == pytest.approx(fld[m.start], abs=1e-9)


def test_backtrack_corrupt_field():
    m = GridMap.from_strings(["T..S"])
    bad = DistanceField(np.array([[0.0, 5.0, 5.0, 4.0]]), m.blocked)
    with pytest.raises(CorruptFieldError):
        backtrack(bad, m, m.start)
    with pytest.raises(CorruptFieldError):
        backtrack(DistanceField(np.array([[0.0, 1, 2, np.inf]]), m.blocked), m, m.start)


def test_backtrack_tie_break_canonical():
    m = GridMap(np.zeros((2, 2), bool), (1, 1), (0, 0))
    fld = solve(init_net(m, FOUR))
    assert backtrack(fld, m, m.start) == ((1, 1), (0, 1), (0, 0))
