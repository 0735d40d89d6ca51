"""Multi-step mutation.

Each generation the elites are pushed through ``n`` extra rounds of crossover
and mutation. If the resulting population scores at least as well as the
current one it replaces it outright. Otherwise a regular offspring population is
bred from the elites, ranked by how far each member lies from the rejected
look-ahead population, and bred once more from the most distant members.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import seeding
from .errors import ConfigError, ShapeError
from .ga import (GAConfig, Evolution, Population, RunResult, breed, generate_population,
                 next_generation, select_elite)
from .lake import DEFAULT_MAP, LakeMap
from .network import DEFAULT_SHAPE, NetworkShape

ACCEPTED = "accepted"
REJECTED = "rejected"


@dataclass(frozen=True)
class MSMConfig:
    extra_steps: int = 10
    comparison: str = "mean"
    distance_aggregate: str = "mean_to_all"

    def __post_init__(self):
        if self.extra_steps < 1:
            raise ConfigError("extra_steps must be at least 1")
        if self.comparison not in ("mean", "max"):
            raise ConfigError("comparison must be 'mean' or 'max'")
        if self.distance_aggregate not in ("mean_to_all", "min_to_any"):
            raise ConfigError("distance_aggregate must be 'mean_to_all' or 'min_to_any'")

    def aggregate(self, fitness) -> float:
        return float(np.mean(fitness) if self.comparison == "mean" else np.max(fitness))


def multi_step_mutate(elites: np.ndarray, n: int, config: GAConfig, sigma: float,
                      rng: np.random.Generator) -> Population:
    """Apply ``breed`` ``n`` times starting from the elites.

    The first round expands the elites to a full population; later rounds draw
    parents from the whole current population since nothing is ranked mid-loop.
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    members = np.asarray(elites, dtype=np.float64)
    for _ in range(n):
        members = breed(members, config.population_size, sigma, rng)
    return Population(members)


def pairwise_distances(candidates: np.ndarray, reference: np.ndarray) -> np.ndarray:
    diff = candidates[:, None, :] - reference[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def distance_fitness(candidate, reference_pop, aggregate: str = "mean_to_all") -> float:
    """Euclidean distance from ``candidate`` to a reference population; larger is fitter."""
    return float(distance_fitness_many(np.asarray(candidate)[None], reference_pop, aggregate)[0])


def distance_fitness_many(candidates: np.ndarray, reference_pop, aggregate: str = "mean_to_all") -> np.ndarray:
    reference = reference_pop.members if isinstance(reference_pop, Population) else np.atleast_2d(reference_pop)
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if candidates.shape[1] != reference.shape[1]:
        raise ShapeError(f"candidate length {candidates.shape[1]} != reference length {reference.shape[1]}")
    d = pairwise_distances(candidates, reference)
    if aggregate == "mean_to_all":
        return d.mean(axis=1)
    if aggregate == "min_to_any":
        return d.min(axis=1)
    raise ConfigError(f"unknown distance aggregate {aggregate!r}")


def msm_generation(pop: Population, config: GAConfig, msm: MSMConfig, sigma: float,
                   evaluate: Callable[[np.ndarray], np.ndarray],
                   rng: np.random.Generator) -> tuple[Population, str]:
    """One MSM step. ``evaluate`` scores a member array in the environment."""
    elites = select_elite(pop, config)
    mutated = multi_step_mutate(elites, msm.extra_steps, config, sigma, rng)
    f_mutated = evaluate(mutated.members)
    if msm.aggregate(f_mutated) >= msm.aggregate(pop.fitness):
        mutated.generation_index = pop.generation_index + 1
        return mutated, ACCEPTED
    offspring = next_generation(pop, config, sigma, rng)
    novelty = distance_fitness_many(offspring.members, mutated, msm.distance_aggregate)
    nxt = next_generation(offspring.with_fitness(novelty), config, sigma, rng)
    nxt.generation_index = pop.generation_index + 1
    return nxt, REJECTED


def run_msm(config: GAConfig = GAConfig(), msm: MSMConfig = MSMConfig(), lake: LakeMap = DEFAULT_MAP,
            master_seed: int = 0, run: int = 0, shape: NetworkShape = DEFAULT_SHAPE,
            backend: str | None = None) -> RunResult:
    evo = Evolution(config, lake, master_seed, run, shape, backend)
    pop = generate_population(config, shape, evo.rng(0, seeding.INIT))

    def breeder(pop, generation, sigma):
        return msm_generation(pop, config, msm, sigma,
                              lambda members: evo.evaluate(members, generation, seeding.EVAL_MUTATED),
                              evo.rng(generation, seeding.BREED))

    return evo.run_loop(pop, breeder)
