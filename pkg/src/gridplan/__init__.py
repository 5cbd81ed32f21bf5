"""Grid path planners (shunting field, min-consensus wavefront, potential field,
GA, ACO, beetle swarm), frame pre-processing, and a seeded benchmark harness."""
from .gridworld import (
    Coord,
    GridMap,
    Neighborhood,
    ScenarioConfig,
    ScenarioError,
    TrackSample,
    load_scenario,
    neighbors,
    path_length,
    read_scenario,
    serialize_scenario,
    shortest_path_oracle,
)
from .results import TrialResult

__all__ = [
    "Coord",
    "GridMap",
    "Neighborhood",
    "ScenarioConfig",
    "ScenarioError",
    "TrackSample",
    "TrialResult",
    "load_scenario",
    "neighbors",
    "path_length",
    "read_scenario",
    "serialize_scenario",
    "shortest_path_oracle",
]
