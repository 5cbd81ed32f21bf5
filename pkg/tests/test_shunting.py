import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridplan.gridworld import GridMap, load_scenario
from gridplan.shunting import (
    ActivityField,
    Scene,
    SceneParams,
    ShuntingParams,
    external_input,
    extract_path,
    plan,
    rhs,
    settle,
    step,
    step_scene,
)

from conftest import grid_maps


def isolated_equilibrium(I, A=10.0, B=1.0, D=1.0, dt=0.005, steps=20000):
    p = ShuntingParams(A=A, B=B, D=D, E=abs(I) + 1, dt=dt, max_iters=steps, tol=1e-13)
    # single neuron: no lateral neighbors on a 1x1 grid
    x = np.zeros((1, 1))
    inp = np.full((1, 1), float(I))
    f = ActivityField(x)
    for _ in range(steps):
        f = step(f, inp, p)
    return f.x[0, 0]


@pytest.mark.parametrize("I", [0.5, 5.0, 40.0])
def test_excitatory_equilibrium(I):
    assert isolated_equilibrium(I) == pytest.approx(1.0 * I / (10.0 + I), abs=1e-6)


@pytest.mark.parametrize("I", [-0.5, -5.0, -40.0])
def test_inhibitory_equilibrium(I):
    assert isolated_equilibrium(I) == pytest.approx(-1.0 * abs(I) / (10.0 + abs(I)), abs=1e-6)


def test_kernel_radius():
    assert len(ShuntingParams(r0=1.0).kernel()) == 4
    k = ShuntingParams().kernel()
    assert len(k) == 8
    assert sorted(w for *_, w in k)[0] == pytest.approx(1 / math.sqrt(2))


def test_stability_guard():
    with pytest.raises(ValueError, match="stability"):
        ShuntingParams(dt=0.05)
    with pytest.raises(ValueError):
        ShuntingParams(A=0)


def test_rhs_signs():
    m = GridMap.from_strings(["S.#T"])
    p = ShuntingParams()
    inp = external_input(m, p)
    d = rhs(np.zeros(m.shape), inp, p)
    assert d[0, 3] == pytest.approx(p.B * p.E)
    assert d[0, 2] == pytest.approx(-p.D * p.E)
    assert d[0, 0] == 0


@settings(max_examples=30, deadline=None)
@given(grid_maps(max_side=10), st.floats(1.0, 200.0), st.floats(0.2, 2.0))
def test_activity_bounded_every_step(m, E, B):
    p = ShuntingParams(E=E, B=B, dt=0.9 / (10 + E + 8 * max(B, 1)))
    inp = external_input(m, p)
    f = ActivityField(np.zeros(m.shape))
    for _ in range(150):
        f = step(f, inp, p)
        assert f.x.max() <= p.B + 1e-6
        assert f.x.min() >= -p.D - 1e-6


def test_settle_reports_convergence():
    m = GridMap.from_strings(["S....", ".###.", "....T"])
    f = settle(m)
    assert f.converged and f.iteration > 0
    capped = settle(m, ShuntingParams(max_iters=3))
    assert not capped.converged and capped.iteration == 3


def test_plan_open_corridor():
    m = GridMap.from_strings(["S.........T"])
    path, ok, _ = plan(m)
    assert ok
    assert path == tuple((0, c) for c in range(11))


def test_extract_path_stalls_on_flat_field():
    m = GridMap.from_strings(["S..T"])
    path, ok = extract_path(ActivityField(np.zeros(m.shape)), m)
    assert not ok and path == ((0, 0),)


def test_extract_path_never_enters_obstacles(reference_text):
    m = load_scenario(reference_text).map.with_endpoints(start=(19, 0))
    path, ok, _ = plan(m)
    assert ok
    assert all(not m.blocked[p] for p in path)


def test_scene_variant():
    p = ShuntingParams()
    f = ActivityField(np.zeros((3, 3)))
    still = step_scene(f, SceneParams(), p)
    assert np.all(still.x == 0)
    driven = step_scene(f, SceneParams(scene=Scene.SCENE2, drive=2.0), p)
    assert np.allclose(driven.x, p.dt * 2.0)
    logi = step_scene(f, SceneParams(output="logistic", gain=1.0), p)
    assert np.allclose(logi.x, p.dt * 0.5)
    with pytest.raises(ValueError):
        SceneParams(output="relu")
