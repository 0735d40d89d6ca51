"""Pure numpy rollout kernel, used when the compiled extension is unavailable."""

import numpy as np

HOLE = 2
GOAL = 3


def rollout(policies, draws, next_state, kind, slippery, start):
    n, episodes, cap = draws.shape
    rows = np.arange(n)[:, None]
    pos = np.full((n, episodes), start, dtype=np.int64)
    alive = np.ones((n, episodes), dtype=bool)
    total = np.zeros((n, episodes), dtype=np.int64)
    for t in range(cap):
        if not alive.any():
            break
        action = policies[rows, pos]
        direction = np.where(slippery[pos] != 0, (action + draws[:, :, t] + 3) & 3, action)
        pos = np.where(alive, next_state[pos, direction], pos)
        k = kind[pos]
        total += alive & (k == GOAL)
        alive &= (k != HOLE) & (k != GOAL)
    return total.sum(axis=1)
