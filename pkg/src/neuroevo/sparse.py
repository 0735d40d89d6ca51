"""Sparse genomes and directed crossover.

Genomes start from Erdos-Renyi connection masks. Crossover prunes the weakest
fraction ``zeta`` of each parent's active weights, keeps the larger-magnitude
parent value at every surviving position, then trims or regrows random Gaussian
connections so the child carries the rounded mean of its parents' budgets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .errors import ConfigError, ShapeError
from .ga import GAConfig, Evolution, Population, RunResult, elite_indices, parent_pairs
from .lake import DEFAULT_MAP, LakeMap
from .network import DEFAULT_SHAPE, NetworkShape


@dataclass(frozen=True)
class DirectedConfig:
    zeta: float = 0.3
    density: float = 0.5
    # Regrown weights are drawn like freshly initialized ones; None ties them to the mutation sigma.
    regrow_sigma: float | None = 1.0
    sparse_mutation: bool = True

    def __post_init__(self):
        if not 0.0 < self.zeta < 1.0:
            raise ConfigError("zeta must lie in (0, 1)")
        if not 0.0 < self.density <= 1.0:
            raise ConfigError("density must lie in (0, 1]")
        if self.regrow_sigma is not None and self.regrow_sigma <= 0:
            raise ConfigError("regrow_sigma must be positive")


@dataclass
class SparseGenome:
    weights: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.weights.shape != self.mask.shape or self.weights.ndim != 1:
            raise ShapeError("weights and mask must be 1-D arrays of equal length")

    @classmethod
    def from_weights(cls, weights) -> "SparseGenome":
        weights = np.asarray(weights, dtype=np.float64)
        return cls(weights, weights != 0)

    @property
    def nnz(self) -> int:
        return int(self.mask.sum())

    @property
    def density(self) -> float:
        return self.nnz / len(self.mask)

    def is_consistent(self) -> bool:
        return not np.any(self.weights[~self.mask])


def generate_sparsity_mask(shape: NetworkShape, density: float, rng: np.random.Generator) -> np.ndarray:
    """Keep every connection independently with probability ``density``."""
    if not 0.0 < density <= 1.0:
        raise ConfigError("density must lie in (0, 1]")
    return rng.random(shape.parameter_count) < density


def prune_smallest(weights: np.ndarray, mask: np.ndarray, zeta: float) -> np.ndarray:
    """Mask with the ``floor(zeta * nnz)`` smallest-magnitude active weights removed.

    Magnitude ties remove the lower index first.
    """
    active = np.flatnonzero(mask)
    k = int(np.floor(zeta * len(active) + 1e-9))
    pruned = mask.copy()
    if k:
        order = np.lexsort((active, np.abs(weights[active])))
        pruned[active[order[:k]]] = False
    return pruned


def directed_crossover(parent_a: SparseGenome, parent_b: SparseGenome, cfg: DirectedConfig,
                       rng: np.random.Generator, regrow_sigma: float | None = None) -> SparseGenome:
    if parent_a.weights.shape != parent_b.weights.shape:
        raise ShapeError("parents have different lengths")
    sigma = regrow_sigma if regrow_sigma is not None else cfg.regrow_sigma
    if sigma is None or sigma <= 0:
        raise ConfigError("a positive regrow sigma is required")

    keep_a = prune_smallest(parent_a.weights, parent_a.mask, cfg.zeta)
    keep_b = prune_smallest(parent_b.weights, parent_b.mask, cfg.zeta)
    wa = np.where(keep_a, parent_a.weights, 0.0)
    wb = np.where(keep_b, parent_b.weights, 0.0)
    # Equal magnitudes keep parent_a's value.
    child = np.where(np.abs(wb) > np.abs(wa), wb, wa)
    mask = keep_a | keep_b

    target = (parent_a.nnz + parent_b.nnz + 1) // 2
    surplus = int(mask.sum()) - target
    if surplus > 0:
        # Overlapping pruned parents can exceed the budget: drop the weakest survivors.
        active = np.flatnonzero(mask)
        order = np.lexsort((active, np.abs(child[active])))
        drop = active[order[:surplus]]
        mask[drop] = False
        child[drop] = 0.0
    elif surplus < 0:
        free = np.flatnonzero(~mask)
        grow = rng.choice(free, size=-surplus, replace=False)
        values = rng.normal(0.0, sigma, size=len(grow))
        # A draw of exactly zero would silently shrink the budget.
        values[values == 0.0] = sigma
        child[grow] = values
        mask[grow] = True
    return SparseGenome(child, mask)


def mutate_sparse(genome: SparseGenome, sigma: float, rng: np.random.Generator,
                  sparse: bool = True) -> SparseGenome:
    """Gaussian noise on active connections only, or on every weight when ``sparse`` is False."""
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    if not sparse:
        weights = genome.weights + rng.normal(0.0, sigma, genome.weights.shape)
        return SparseGenome(weights, np.ones_like(genome.mask))
    weights = genome.weights.copy()
    weights[genome.mask] += rng.normal(0.0, sigma, genome.nnz)
    return SparseGenome(weights, genome.mask.copy())


def generate_sparse_population(config: GAConfig, shape: NetworkShape, density: float,
                               rng: np.random.Generator) -> Population:
    dense = rng.standard_normal((config.population_size, shape.parameter_count))
    masks = np.stack([generate_sparsity_mask(shape, density, rng) for _ in range(config.population_size)])
    return Population(dense * masks, masks=masks)


def next_generation_directed(pop: Population, config: GAConfig, dcfg: DirectedConfig, sigma: float,
                             rng: np.random.Generator) -> Population:
    idx = elite_indices(pop.fitness, config.n_elite)
    elites_w, elites_m = pop.members[idx], pop.masks[idx]
    n_children = config.population_size - len(idx)
    pairs = parent_pairs(len(idx), n_children, rng)
    regrow = dcfg.regrow_sigma if dcfg.regrow_sigma is not None else sigma
    weights = np.empty((n_children, pop.members.shape[1]))
    masks = np.empty_like(weights, dtype=bool)
    for k, (i, j) in enumerate(pairs):
        child = directed_crossover(SparseGenome(elites_w[i], elites_m[i]),
                                   SparseGenome(elites_w[j], elites_m[j]), dcfg, rng, regrow)
        child = mutate_sparse(child, sigma, rng, dcfg.sparse_mutation)
        weights[k], masks[k] = child.weights, child.mask
    return Population(np.vstack([elites_w, weights]), generation_index=pop.generation_index + 1,
                      masks=np.vstack([elites_m, masks]))


def run_directed(config: GAConfig = GAConfig(), dcfg: DirectedConfig = DirectedConfig(),
                 lake: LakeMap = DEFAULT_MAP, master_seed: int = 0, run: int = 0,
                 shape: NetworkShape = DEFAULT_SHAPE, backend: str | None = None) -> RunResult:
    evo = Evolution(config, lake, master_seed, run, shape, backend)
    pop = generate_sparse_population(config, shape, dcfg.density, evo.rng(0, seeding.INIT))

    def breeder(pop, generation, sigma):
        return next_generation_directed(pop, config, dcfg, sigma, evo.rng(generation, seeding.BREED)), None

    return evo.run_loop(pop, breeder)
