"""Stochastic path optimizers: genetic algorithm, ant colony, beetle swarm."""
from .aco import ACOParams, PheromoneMatrix, construct_tour, run_aco, update_pheromone
from .bso import (
    Beetle,
    BSOParams,
    antennae_step,
    chemotaxis_direction,
    random_direction,
    run_bso,
)
from .common import FitnessParams, LineOfSight, path_fitness
from .ga import Chromosome, GAParams, crossover, fitness, mutate, run_ga, select

__all__ = [
    "ACOParams", "BSOParams", "Beetle", "Chromosome", "FitnessParams", "GAParams",
    "LineOfSight", "PheromoneMatrix", "antennae_step", "chemotaxis_direction",
    "construct_tour", "crossover", "fitness", "mutate", "path_fitness",
    "random_direction", "run_aco", "run_bso", "run_ga", "select", "update_pheromone",
]
