# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled FrozenLake rollout kernel.

Must stay bit-identical to ``_rollout_py.rollout``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef enum:
    HOLE = 2
    GOAL = 3


def rollout(const int[:, ::1] policies,
            const unsigned char[:, :, ::1] draws,
            const int[:, ::1] next_state,
            const unsigned char[::1] kind,
            const unsigned char[::1] slippery,
            int start):
    cdef Py_ssize_t n = policies.shape[0]
    cdef Py_ssize_t episodes = draws.shape[1]
    cdef Py_ssize_t cap = draws.shape[2]
    cdef Py_ssize_t i, e, t
    cdef int pos, action, direction
    cdef long long total
    out = np.zeros(n, dtype=np.int64)
    cdef long long[::1] out_view = out

    with nogil:
        for i in range(n):
            total = 0
            for e in range(episodes):
                pos = start
                for t in range(cap):
                    action = policies[i, pos]
                    if slippery[pos]:
                        direction = (action + draws[i, e, t] + 3) & 3
                    else:
                        direction = action
                    pos = next_state[pos, direction]
                    if kind[pos] == GOAL:
                        total += 1
                        break
                    if kind[pos] == HOLE:
                        break
            out_view[i] = total
    return out
