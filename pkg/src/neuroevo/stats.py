"""Run logs, median curves across runs, and the Mann-Whitney U test."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError

LOG_FIELDS = ("generation", "top_score", "mean_score", "sigma", "branch", "env_episodes_used", "solve_check")
CURVE_FIELDS = ("top_score", "mean_score")
ALGORITHMS = ("baseline", "msm", "directed")


@dataclass(frozen=True)
class GenerationLog:
    generation: int
    top_score: float
    mean_score: float
    sigma: float
    branch: str | None = None  # "accepted" / "rejected" for MSM runs
    env_episodes_used: int = 0
    solve_check: float = float("nan")

    def as_row(self) -> dict:
        row = asdict(self)
        row["branch"] = self.branch or ""
        return row

    @classmethod
    def from_row(cls, row: dict) -> "GenerationLog":
        return cls(
            generation=int(row["generation"]),
            top_score=float(row["top_score"]),
            mean_score=float(row["mean_score"]),
            sigma=float(row["sigma"]),
            branch=row.get("branch") or None,
            env_episodes_used=int(row["env_episodes_used"]),
            solve_check=float(row["solve_check"]),
        )


@dataclass
class RunSet:
    """Logs of several runs of one algorithm.

    Runs that stopped early are padded to ``horizon`` generations by carrying
    their last logged values forward; ``padded[i]`` flags run ``i``.
    """

    algorithm: str
    runs: list[list[GenerationLog]]
    horizon: int | None = None
    padded: list[bool] = field(init=False)

    def __post_init__(self):
        if not self.runs or any(len(r) == 0 for r in self.runs):
            raise InputError("a run set needs at least one non-empty run")
        longest = max(len(r) for r in self.runs)
        if self.horizon is None:
            self.horizon = longest
        if self.horizon < longest:
            raise InputError(f"horizon {self.horizon} shorter than a logged run ({longest})")
        self.padded = [len(r) < self.horizon for r in self.runs]

    def values(self, field_name: str) -> np.ndarray:
        """``(n_runs, horizon)`` array of ``field_name`` with early stops padded."""
        if field_name not in CURVE_FIELDS:
            raise InputError(f"unknown curve field {field_name!r}")
        out = np.empty((len(self.runs), self.horizon))
        for i, run in enumerate(self.runs):
            vals = [getattr(log, field_name) for log in run]
            out[i, : len(vals)] = vals
            out[i, len(vals):] = vals[-1]
        return out

    def first_solve_generations(self, threshold: float = 78.0) -> list[float]:
        """First generation whose top score reaches ``threshold``; ``inf`` if none did."""
        out = []
        for run in self.runs:
            hit = next((log.generation for log in run if log.top_score >= threshold), math.inf)
            out.append(hit)
        return out


def median_curve(runset: RunSet, field_name: str) -> np.ndarray:
    return np.median(runset.values(field_name), axis=0)


def rankdata(values) -> np.ndarray:
    """Ranks starting at 1, tied values sharing the mean of their ranks."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(len(values))
    start = 0
    while start < len(values):
        stop = start
        while stop + 1 < len(values) and sorted_vals[stop + 1] == sorted_vals[start]:
            stop += 1
        ranks[order[start:stop + 1]] = (start + stop) / 2.0 + 1.0
        start = stop + 1
    return ranks


def _tie_counts(values) -> np.ndarray:
    _, counts = np.unique(np.asarray(values, dtype=np.float64), return_counts=True)
    return counts


def exact_rank_sum_pvalue(doubled_ranks: np.ndarray, n1: int, observed: int) -> float:
    """Two-sided permutation p-value of a rank sum.

    Counts, over every size-``n1`` subset of the pooled sample, the subsets
    whose doubled rank sum is at least as far from its mean as ``observed``.
    Subset-sum counting keeps this exact under ties.
    """
    doubled_ranks = np.asarray(doubled_ranks, dtype=np.int64)
    total_sum = int(doubled_ranks.sum())
    counts = np.zeros((n1 + 1, total_sum + 1), dtype=np.float64)
    counts[0, 0] = 1.0
    for r in doubled_ranks:
        r = int(r)
        counts[1:, r:] += counts[:-1, : total_sum + 1 - r].copy()
    dist = counts[n1]
    n = len(doubled_ranks)
    center = n1 * (n + 1)  # mean of the doubled rank sum, an integer
    sums = np.arange(total_sum + 1)
    extreme = np.abs(sums - center) >= abs(observed - center)
    return float(min(1.0, dist[extreme].sum() / dist.sum()))


def normal_approx_pvalue(u: float, n1: int, n2: int, tie_counts) -> float:
    """Two-sided normal approximation with tie-corrected variance and continuity correction."""
    n = n1 + n2
    mu = n1 * n2 / 2.0
    tie_term = float(np.sum(np.asarray(tie_counts, dtype=np.float64) ** 3 - tie_counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = (max(u, n1 * n2 - u) - mu - 0.5) / math.sqrt(var)
    return float(min(1.0, math.erfc(z / math.sqrt(2.0))))


EXACT_MAX_N = 20


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    method: str

    def __iter__(self):
        return iter((self.u, self.p_value))


def mann_whitney_u(sample_a, sample_b, method: str = "auto") -> MannWhitneyResult:
    """Mann-Whitney U of ``sample_a`` against ``sample_b`` with a two-sided p-value.

    ``method="auto"`` enumerates the exact permutation distribution when the
    combined size is at most 20 and uses the normal approximation otherwise.
    """
    a = np.asarray(sample_a, dtype=np.float64).ravel()
    b = np.asarray(sample_b, dtype=np.float64).ravel()
    if len(a) == 0 or len(b) == 0:
        raise InputError("both samples must be non-empty")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise InputError("samples must be finite")
    if method not in ("auto", "exact", "asymptotic"):
        raise InputError(f"unknown method {method!r}")
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    rank_sum = ranks[:n1].sum()
    u = rank_sum - n1 * (n1 + 1) / 2.0
    if method == "auto":
        method = "exact" if n1 + n2 <= EXACT_MAX_N else "asymptotic"
    if method == "exact":
        doubled = np.rint(2 * ranks).astype(np.int64)
        p = exact_rank_sum_pvalue(doubled, n1, int(doubled[:n1].sum()))
    else:
        p = normal_approx_pvalue(u, n1, n2, _tie_counts(pooled))
    return MannWhitneyResult(float(u), p, method)


@dataclass(frozen=True)
class SignificanceReport:
    field: str
    generation: int
    label_a: str
    label_b: str
    median_a: float
    median_b: float
    u: float
    p_value: float
    method: str
    alpha: float = 0.01

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha

    def to_dict(self) -> dict:
        d = asdict(self)
        d["significant"] = self.significant
        return d

    def to_text(self) -> str:
        verdict = "significant" if self.significant else "not significant"
        return "\n".join([
            f"[{self.label_a} vs {self.label_b}] {self.field} at generation {self.generation}",
            f"  median {self.label_a}: {self.median_a:.4g}",
            f"  median {self.label_b}: {self.median_b:.4g}",
            f"  U = {self.u:g}, p = {self.p_value:.4g} ({self.method})",
            f"  verdict at alpha={self.alpha:g}: {verdict}",
        ])


def compare_algorithms(a: RunSet, b: RunSet, field_name: str, at_generation: int | None = None,
                       alpha: float = 0.01) -> SignificanceReport:
    if at_generation is None:
        at_generation = min(a.horizon, b.horizon) - 1
    if not (0 <= at_generation < a.horizon and at_generation < b.horizon):
        raise InputError(f"generation {at_generation} outside the logged horizon")
    va = a.values(field_name)[:, at_generation]
    vb = b.values(field_name)[:, at_generation]
    res = mann_whitney_u(va, vb)
    return SignificanceReport(field_name, at_generation, a.algorithm, b.algorithm,
                              float(np.median(va)), float(np.median(vb)), res.u, res.p_value,
                              res.method, alpha)
