import sys
from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from gridplan.gridworld import Coord, GridMap

DATA = Path(str(resources.files("gridplan") / "data"))


def random_map(rng: np.random.Generator, rows: int, cols: int, density: float) -> GridMap:
    blocked = rng.random((rows, cols)) < density
    free = np.argwhere(~blocked)
    if len(free) == 0:
        blocked[0, 0] = False
        free = np.array([[0, 0]])
    s = free[rng.integers(len(free))]
    t = free[rng.integers(len(free))]
    return GridMap(blocked, Coord(*s), Coord(*t))


@st.composite
def grid_maps(draw, max_side=12, max_density=0.4):
    rows = draw(st.integers(1, max_side))
    cols = draw(st.integers(1, max_side))
    density = draw(st.floats(0.0, max_density))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_map(np.random.default_rng(seed), rows, cols, density)


@pytest.fixture(scope="session")
def reference_text():
    return (DATA / "reference.map").read_text()


@pytest.fixture(scope="session")
def reference_field():
    return np.loadtxt(DATA / "reference_distance.txt")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
