import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neuroevo import kernels
from neuroevo.lake import DEFAULT_MAP, LakeMap, rollout_policies

needs_compiled = pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="extension not built")


def reference_rollout(policy, draws, lake):
    """One-episode-at-a-time loop, written independently of both kernels."""
    total = 0
    for episode in draws:
        pos = lake.start
        for draw in episode:
            a = int(policy[pos])
            d = (a + int(draw) - 1) % 4 if lake.slippery[pos] else a
            pos = int(lake.next_state[pos, d])
            if lake.is_terminal(pos):
                total += pos == lake.goal
                break
    return total


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), slippery_start=st.booleans(), cap=st.integers(1, 60))
def test_python_backend_matches_reference(seed, slippery_start, cap):
    rng = np.random.default_rng(seed)
    lake = LakeMap(slippery_start=slippery_start)
    policies = rng.integers(0, 4, (3, 16))
    draws = rng.integers(0, 3, (3, 20, cap), dtype=np.uint8)
    got = rollout_policies(policies, draws, lake, backend="python")
    assert got.tolist() == [reference_rollout(p, d, lake) for p, d in zip(policies, draws)]


@needs_compiled
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), slippery_start=st.booleans(), cap=st.integers(1, 120))
def test_backends_are_bit_identical(seed, slippery_start, cap):
    rng = np.random.default_rng(seed)
    lake = LakeMap(slippery_start=slippery_start)
    policies = rng.integers(0, 4, (8, 16))
    draws = rng.integers(0, 3, (8, 50, cap), dtype=np.uint8)
    a = rollout_policies(policies, draws, lake, backend="python")
    b = rollout_policies(policies, draws, lake, backend="compiled")
    assert a.tolist() == b.tolist()


@needs_compiled
def test_backends_agree_on_large_map():
    lake = LakeMap.from_text("SFFFFFFF\nFFFFFFFF\nFFFHFFFF\nFFFFFHFF\nFFFHFFFF\nFHHFFFHF\nFHFFHFHF\nFFFHFFFG\n")
    rng = np.random.default_rng(1)
    policies = rng.integers(0, 4, (5, 64))
    draws = rng.integers(0, 3, (5, 200, 200), dtype=np.uint8)
    assert (rollout_policies(policies, draws, lake, "python").tolist()
            == rollout_policies(policies, draws, lake, "compiled").tolist())


def test_default_backend_is_registered():
    assert kernels.DEFAULT_BACKEND in kernels.BACKENDS
