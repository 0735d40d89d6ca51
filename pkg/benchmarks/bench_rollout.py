"""Compare the compiled and numpy rollout kernels on a generation-sized workload.

    python3 benchmarks/bench_rollout.py [--members 50] [--episodes 100] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from neuroevo import kernels
from neuroevo.lake import DEFAULT_MAP, DEFAULT_STEP_CAP, rollout_policies
from neuroevo.network import DEFAULT_SHAPE, policy_table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--members", type=int, default=50)
    parser.add_argument("--episodes", type=int, default=100)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    members = rng.standard_normal((args.members, DEFAULT_SHAPE.parameter_count))
    policies = policy_table(members, DEFAULT_SHAPE)
    draws = rng.integers(0, 3, (args.members, args.episodes, DEFAULT_STEP_CAP), dtype=np.uint8)

    results, timings = {}, {}
    for name in sorted(kernels.BACKENDS):
        fn = lambda: rollout_policies(policies, draws, DEFAULT_MAP, backend=name)  # noqa: E731
        results[name] = fn()
        timings[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))

    reference = next(iter(results.values()))
    agree = all(np.array_equal(reference, r) for r in results.values())
    print(f"{args.members} members x {args.episodes} episodes, best of {args.repeat}")
    for name, t in timings.items():
        print(f"  {name:9s} {t * 1e3:9.2f} ms")
    if "compiled" in timings:
        print(f"  speedup   {timings['python'] / timings['compiled']:9.1f}x")
    else:
        print("  compiled backend not built; only the fallback was timed")
    print(f"  outputs identical: {agree}")


if __name__ == "__main__":
    main()
