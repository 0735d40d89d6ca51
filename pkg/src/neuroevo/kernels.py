"""Rollout backend selection.

The compiled kernel is used when it imports; setting ``NEUROEVO_PURE_PYTHON=1``
forces the numpy fallback. Both produce identical results for identical inputs.
"""

import os

import numpy as np

from . import _rollout_py

BACKENDS = {"python": _rollout_py.rollout}

try:
    from . import _rollout as _compiled
except ImportError:  # extension not built
    _compiled = None
else:
    BACKENDS["compiled"] = _compiled.rollout

if _compiled is not None and not os.environ.get("NEUROEVO_PURE_PYTHON"):
    DEFAULT_BACKEND = "compiled"
else:
    DEFAULT_BACKEND = "python"


def rollout(policies, draws, next_state, kind, slippery, start, backend=None):
    """Total goal arrivals per policy over all episodes encoded in ``draws``.

    ``policies`` is ``(n, n_states)`` greedy actions, ``draws`` is
    ``(n, episodes, step_cap)`` slip outcomes in {0, 1, 2} where 0, 1, 2 execute
    the intended direction rotated by -1, 0, +1 quarter turns.
    """
    fn = BACKENDS[backend or DEFAULT_BACKEND]
    return fn(
        np.ascontiguousarray(policies, dtype=np.int32),
        np.ascontiguousarray(draws, dtype=np.uint8),
        next_state,
        kind,
        slippery,
        int(start),
    )
