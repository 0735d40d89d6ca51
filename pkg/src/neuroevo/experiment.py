"""Campaign execution: independent seeded runs of one algorithm."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from .config import ExperimentConfig
from .ga import RunResult, run_baseline
from .msm import run_msm
from .sparse import run_directed


def run_one(config: ExperimentConfig, run: int, backend: str | None = None) -> RunResult:
    lake = config.lake()
    common = dict(lake=lake, master_seed=config.master_seed, run=run, shape=config.network, backend=backend)
    if config.algorithm == "baseline":
        return run_baseline(config.ga, **common)
    if config.algorithm == "msm":
        return run_msm(config.ga, config.msm, **common)
    return run_directed(config.ga, config.directed, **common)


def _run_star(args):
    return run_one(*args)


def run_campaign(config: ExperimentConfig, jobs: int = 1, backend: str | None = None,
                 run_indices=None) -> list[RunResult]:
    """Results in run-index order; identical for any ``jobs``."""
    indices = list(range(config.runs)) if run_indices is None else list(run_indices)
    if jobs <= 1 or len(indices) <= 1:
        return [run_one(config, r, backend) for r in indices]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_star, [(config, r, backend) for r in indices]))
