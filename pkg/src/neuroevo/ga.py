"""Baseline genetic algorithm: elitist selection, uniform crossover, Gaussian mutation."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import seeding
from .errors import ConfigError, ShapeError, StateError
from .lake import DEFAULT_MAP, DEFAULT_STEP_CAP, SOLVE_THRESHOLD, LakeMap, evaluate_members
from .network import DEFAULT_SHAPE, NetworkShape
from .stats import GenerationLog


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 50
    elite_fraction: float = 0.10
    mutation_sigma0: float = 0.1
    mutation_decay: float = 0.999
    min_sigma: float = 0.01
    episodes_per_eval: int = 100
    max_generations: int = 500
    step_cap: int = DEFAULT_STEP_CAP
    solve_threshold: float = SOLVE_THRESHOLD

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be positive")
        if not 0.0 < self.elite_fraction <= 1.0:
            raise ConfigError("elite_fraction must lie in (0, 1]")
        if math.floor(self.elite_fraction * self.population_size) < 2:
            raise ConfigError("elite_fraction * population_size must leave at least two parents")
        if self.mutation_sigma0 <= 0 or self.min_sigma <= 0:
            raise ConfigError("mutation sigmas must be positive")
        if not 0.0 < self.mutation_decay <= 1.0:
            raise ConfigError("mutation_decay must lie in (0, 1]")
        if self.episodes_per_eval < 1 or self.max_generations < 1 or self.step_cap < 1:
            raise ConfigError("episodes_per_eval, max_generations and step_cap must be positive")

    @property
    def n_elite(self) -> int:
        return math.ceil(self.elite_fraction * self.population_size - 1e-9)

    def sigma(self, generation: int) -> float:
        return max(self.min_sigma, self.mutation_sigma0 * self.mutation_decay ** generation)


@dataclass
class Population:
    """``members`` is an ``(n, parameter_count)`` array; row order is member order."""

    members: np.ndarray
    fitness: np.ndarray | None = None
    generation_index: int = 0
    masks: np.ndarray | None = None

    def __post_init__(self):
        self.members = np.asarray(self.members, dtype=np.float64)
        if self.members.ndim != 2 or len(self.members) == 0:
            raise ShapeError("population needs a non-empty (n, parameter_count) member array")
        if self.fitness is not None:
            self.fitness = np.asarray(self.fitness, dtype=np.float64)
            if self.fitness.shape != (len(self.members),):
                raise ShapeError("fitness must have one entry per member")
        if self.masks is not None:
            self.masks = np.asarray(self.masks, dtype=bool)
            if self.masks.shape != self.members.shape:
                raise ShapeError("masks must match members")

    def __len__(self):
        return len(self.members)

    def with_fitness(self, fitness) -> "Population":
        return replace(self, fitness=np.asarray(fitness, dtype=np.float64))


@dataclass
class RunResult:
    logs: list[GenerationLog]
    champion: np.ndarray
    champion_mask: np.ndarray | None = None
    solved_generation: int | None = None


def generate_population(config: GAConfig, shape: NetworkShape, rng: np.random.Generator) -> Population:
    members = rng.standard_normal((config.population_size, shape.parameter_count))
    return Population(members)


def elite_indices(fitness: np.ndarray, n_elite: int) -> np.ndarray:
    """Indices of the ``n_elite`` fittest members, best first, ties to the lower index."""
    order = np.lexsort((np.arange(len(fitness)), -np.asarray(fitness)))
    return order[:n_elite]


def select_elite(pop: Population, config: GAConfig) -> np.ndarray:
    if pop.fitness is None:
        raise StateError("population has no fitness; evaluate it first")
    return pop.members[elite_indices(pop.fitness, config.n_elite)]


def uniform_crossover(parent_a, parent_b, rng: np.random.Generator) -> np.ndarray:
    parent_a = np.asarray(parent_a, dtype=np.float64)
    parent_b = np.asarray(parent_b, dtype=np.float64)
    if parent_a.shape != parent_b.shape:
        raise ShapeError(f"parent shapes differ: {parent_a.shape} vs {parent_b.shape}")
    take_a = rng.random(parent_a.shape) < 0.5
    return np.where(take_a, parent_a, parent_b)


def mutate(genome, sigma: float, rng: np.random.Generator) -> np.ndarray:
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    genome = np.asarray(genome, dtype=np.float64)
    return genome + rng.normal(0.0, sigma, genome.shape)


def parent_pairs(n_parents: int, n_children: int, rng: np.random.Generator) -> np.ndarray:
    """Two distinct parent indices per child, uniform over ordered pairs."""
    if n_parents < 2:
        raise ConfigError("crossover needs at least two parents")
    first = rng.integers(0, n_parents, n_children)
    second = rng.integers(0, n_parents - 1, n_children)
    second = second + (second >= first)
    return np.stack([first, second], axis=1)


def breed(parents: np.ndarray, n_children: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """``n_children`` offspring of ``mutate(uniform_crossover(a, b))`` over random parent pairs."""
    pairs = parent_pairs(len(parents), n_children, rng)
    children = np.empty((n_children, parents.shape[1]))
    for k, (i, j) in enumerate(pairs):
        children[k] = mutate(uniform_crossover(parents[i], parents[j], rng), sigma, rng)
    return children


def next_generation(pop: Population, config: GAConfig, sigma: float, rng: np.random.Generator) -> Population:
    elites = select_elite(pop, config)
    if len(elites) < 2:
        raise ConfigError("fewer than two elites")
    children = breed(elites, config.population_size - len(elites), sigma, rng)
    return Population(np.vstack([elites, children]), generation_index=pop.generation_index + 1)


class Evolution:
    """Shared generation loop: evaluate, log, check for a solve, breed.

    ``breeder(pop, fitness, generation, sigma)`` returns the next population and
    an optional branch label. Subclass-free: the three algorithms only differ
    in the breeder and in the initial population.
    """

    def __init__(self, config: GAConfig, lake: LakeMap, master_seed: int, run: int = 0,
                 shape: NetworkShape = DEFAULT_SHAPE, backend: str | None = None):
        self.config = config
        self.lake = lake
        self.master_seed = master_seed
        self.run = run
        self.shape = shape
        self.backend = backend
        self.episodes_used = 0

    def rng(self, generation: int, tag: int, member: int = seeding.NO_MEMBER) -> np.random.Generator:
        return seeding.stream(self.master_seed, self.run, generation, member, tag)

    def evaluate(self, members: np.ndarray, generation: int, tag: int = seeding.EVAL) -> np.ndarray:
        cfg = self.config
        rngs = [self.rng(generation, tag, i) for i in range(len(members))]
        self.episodes_used += len(members) * cfg.episodes_per_eval
        return evaluate_members(members, self.shape, self.lake, rngs, cfg.episodes_per_eval,
                                cfg.step_cap, self.backend)

    def run_loop(self, pop: Population, breeder) -> RunResult:
        cfg = self.config
        logs: list[GenerationLog] = []
        solved = None
        for g in range(cfg.max_generations):
            self.episodes_used = 0
            sigma = cfg.sigma(g)
            fitness = self.evaluate(pop.members, g)
            best = int(elite_indices(fitness, 1)[0])
            champion = pop.members[best]
            champion_mask = None if pop.masks is None else pop.masks[best]
            check = float(self.evaluate(champion[None], g, seeding.SOLVE_CHECK)[0])
            done = check >= cfg.solve_threshold * cfg.episodes_per_eval
            branch = None
            if not done and g + 1 < cfg.max_generations:
                pop, branch = breeder(pop.with_fitness(fitness), g, sigma)
            logs.append(GenerationLog(
                generation=g,
                top_score=float(fitness.max()),
                mean_score=float(fitness.mean()),
                sigma=sigma,
                branch=branch,
                env_episodes_used=self.episodes_used,
                solve_check=check,
            ))
            if done:
                solved = g
                break
        return RunResult(logs, champion.copy(), None if champion_mask is None else champion_mask.copy(), solved)


def run_baseline(config: GAConfig = GAConfig(), lake: LakeMap = DEFAULT_MAP, master_seed: int = 0,
                 run: int = 0, shape: NetworkShape = DEFAULT_SHAPE, backend: str | None = None) -> RunResult:
    evo = Evolution(config, lake, master_seed, run, shape, backend)
    pop = generate_population(config, shape, evo.rng(0, seeding.INIT))

    def breeder(pop, generation, sigma):
        return next_generation(pop, config, sigma, evo.rng(generation, seeding.BREED)), None

    return evo.run_loop(pop, breeder)
