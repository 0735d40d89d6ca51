"""Slippery FrozenLake gridworld and fitness evaluation.

Actions are 0 Left, 1 Down, 2 Right, 3 Up. On a slippery cell the executed
direction is the intended one or one of its two perpendiculars, each with
probability 1/3. Walking into a wall leaves the agent in place. Holes end the
episode with reward 0, the goal ends it with reward 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import kernels
from .errors import InputError, UsageError
from .network import NetworkShape, policy_table

LEFT, DOWN, RIGHT, UP = range(4)
ACTION_NAMES = ("Left", "Down", "Right", "Up")
_MOVES = {LEFT: (0, -1), DOWN: (1, 0), RIGHT: (0, 1), UP: (-1, 0)}

FROZEN, START, HOLE, GOAL = range(4)
_CELL_KINDS = {"F": FROZEN, "S": START, "H": HOLE, "G": GOAL}

DEFAULT_ROWS = ("SFFF", "FHFH", "FFFH", "HFFG")
DEFAULT_STEP_CAP = 100
SOLVE_THRESHOLD = 0.78


@dataclass(frozen=True)
class LakeMap:
    rows: tuple[str, ...] = DEFAULT_ROWS
    slippery_start: bool = True
    kind: np.ndarray = field(init=False, repr=False, compare=False)
    next_state: np.ndarray = field(init=False, repr=False, compare=False)
    slippery: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rows = tuple(str(r).strip() for r in self.rows)
        if not rows or any(len(r) != len(rows[0]) for r in rows) or not rows[0]:
            raise InputError("lake map must be a non-empty rectangle")
        bad = {c for r in rows for c in r} - set(_CELL_KINDS)
        if bad:
            raise InputError(f"unknown map characters {sorted(bad)}")
        flat = "".join(rows)
        if flat.count("S") != 1 or flat.count("G") != 1:
            raise InputError("lake map needs exactly one S and exactly one G")
        object.__setattr__(self, "rows", rows)

        nrow, ncol = len(rows), len(rows[0])
        kind = np.array([_CELL_KINDS[c] for c in flat], dtype=np.uint8)
        next_state = np.empty((nrow * ncol, 4), dtype=np.int32)
        for s in range(nrow * ncol):
            r, c = divmod(s, ncol)
            for a, (dr, dc) in _MOVES.items():
                nr = min(max(r + dr, 0), nrow - 1)
                nc = min(max(c + dc, 0), ncol - 1)
                next_state[s, a] = nr * ncol + nc
        slippery = ((kind == FROZEN) | (kind == START)).astype(np.uint8)
        if not self.slippery_start:
            slippery[kind == START] = 0
        for name, arr in (("kind", kind), ("next_state", next_state), ("slippery", slippery)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "LakeMap":
        return cls(tuple(line.strip() for line in text.splitlines() if line.strip()), **kwargs)

    @classmethod
    def load(cls, path, **kwargs) -> "LakeMap":
        return cls.from_text(Path(path).read_text(), **kwargs)

    def to_text(self) -> str:
        return "\n".join(self.rows) + "\n"

    @property
    def n_states(self) -> int:
        return len(self.kind)

    @property
    def start(self) -> int:
        return int(np.flatnonzero(self.kind == START)[0])

    @property
    def goal(self) -> int:
        return int(np.flatnonzero(self.kind == GOAL)[0])

    def is_terminal(self, position: int) -> bool:
        return self.kind[position] in (HOLE, GOAL)

    def transition_matrix(self) -> np.ndarray:
        """``P[s, a, s']`` with terminal cells absorbing."""
        n = self.n_states
        P = np.zeros((n, 4, n))
        for s in range(n):
            for a in range(4):
                if self.is_terminal(s):
                    P[s, a, s] = 1.0
                elif self.slippery[s]:
                    for d in ((a - 1) % 4, a, (a + 1) % 4):
                        P[s, a, self.next_state[s, d]] += 1.0 / 3.0
                else:
                    P[s, a, self.next_state[s, a]] = 1.0
        return P


DEFAULT_MAP = LakeMap()


@dataclass(frozen=True)
class EnvState:
    position: int
    steps_taken: int = 0
    done: bool = False

    def advance(self, result: "StepResult", step_cap: int = DEFAULT_STEP_CAP) -> "EnvState":
        steps = self.steps_taken + 1
        return replace(self, position=result.next_position, steps_taken=steps,
                       done=result.terminal or steps >= step_cap)


@dataclass(frozen=True)
class StepResult:
    next_position: int
    reward: float
    terminal: bool
    executed: int


def reset(lake: LakeMap = DEFAULT_MAP) -> EnvState:
    return EnvState(position=lake.start)


def executed_direction(action: int, draw: int) -> int:
    """Direction actually taken for slip outcome ``draw`` in {0, 1, 2}."""
    return (action + draw + 3) % 4


def step(lake: LakeMap, state: EnvState, action: int, rng: np.random.Generator) -> StepResult:
    if state.done or lake.is_terminal(state.position):
        raise UsageError("cannot step a finished episode; call reset()")
    if action not in (LEFT, DOWN, RIGHT, UP):
        raise InputError(f"action must be in 0..3, got {action}")
    draw = int(rng.integers(0, 3))
    direction = executed_direction(action, draw) if lake.slippery[state.position] else action
    nxt = int(lake.next_state[state.position, direction])
    return StepResult(nxt, float(lake.kind[nxt] == GOAL), bool(lake.is_terminal(nxt)), direction)


def slip_draws(rng: np.random.Generator, episodes: int, step_cap: int) -> np.ndarray:
    """Slip outcomes for ``episodes`` episodes; row ``e`` drives episode ``e``."""
    return rng.integers(0, 3, size=(episodes, step_cap), dtype=np.uint8)


def rollout_policies(policies: np.ndarray, draws: np.ndarray, lake: LakeMap = DEFAULT_MAP,
                     backend: str | None = None) -> np.ndarray:
    """Goal arrivals per policy table; ``draws`` is ``(n, episodes, step_cap)``."""
    return kernels.rollout(policies, draws, lake.next_state, lake.kind, lake.slippery, lake.start, backend)


def run_episode(genome, shape: NetworkShape, lake: LakeMap, rng: np.random.Generator,
                step_cap: int = DEFAULT_STEP_CAP, backend: str | None = None) -> float:
    if step_cap < 1:
        raise InputError("step_cap must be at least 1")
    policy = policy_table(shape.check(genome), shape)
    draws = slip_draws(rng, 1, step_cap)[None]
    return float(rollout_policies(policy, draws, lake, backend)[0])


def evaluate_fitness(genome, shape: NetworkShape, lake: LakeMap, rng: np.random.Generator,
                     episodes: int = 100, step_cap: int = DEFAULT_STEP_CAP,
                     backend: str | None = None) -> float:
    """Accumulated reward over ``episodes`` episodes, in [0, episodes]."""
    return float(evaluate_members(shape.check(genome)[None], shape, lake, [rng], episodes, step_cap, backend)[0])


def evaluate_members(members: np.ndarray, shape: NetworkShape, lake: LakeMap, rngs,
                     episodes: int = 100, step_cap: int = DEFAULT_STEP_CAP,
                     backend: str | None = None) -> np.ndarray:
    """Fitness of every row of ``members``; row ``i`` draws its slips from ``rngs[i]``."""
    if episodes < 1:
        raise InputError("episodes must be at least 1")
    if step_cap < 1:
        raise InputError("step_cap must be at least 1")
    members = np.atleast_2d(members)
    if lake.n_states != shape.n_inputs or shape.n_outputs != 4:
        raise InputError(f"network {shape.layer_sizes} does not fit a {lake.n_states}-state lake with 4 actions")
    policies = policy_table(members, shape)
    draws = np.empty((len(members), episodes, step_cap), dtype=np.uint8)
    for i, rng in enumerate(rngs):
        draws[i] = slip_draws(rng, episodes, step_cap)
    return rollout_policies(policies, draws, lake, backend).astype(np.float64)


def tabular_policy_genome(policy, shape: NetworkShape) -> np.ndarray:
    """A genome whose greedy action in state ``s`` is ``policy[s]``.

    The first hidden layer uses one unit per action as an indicator, and each
    later layer passes those units straight through.
    """
    policy = np.asarray(policy, dtype=int)
    if len(policy) != shape.n_inputs:
        raise InputError("policy length must equal the number of network inputs")
    if any(size < 4 for size in shape.layer_sizes[1:]):
        raise InputError("every layer after the input needs at least four units")
    genome = np.zeros(shape.parameter_count)
    mats = [genome[shape.slice_of_layer(i)].reshape(n_out, n_in)
            for i, (n_in, n_out) in enumerate(zip(shape.layer_sizes[:-1], shape.layer_sizes[1:]))]
    mats[0][policy, np.arange(len(policy))] = 1.0
    for w in mats[1:]:
        w[np.arange(4), np.arange(4)] = 1.0
    return genome
