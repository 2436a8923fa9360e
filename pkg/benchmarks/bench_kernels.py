"""Compare the compiled and pure-Python kernel paths.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--instances N]

Both paths run the same kernel source; the env flag only decides whether it is
compiled. Results from the two paths are checked for agreement before timing
is reported.
"""

import argparse
import os
import time

import numpy as np

from fogalloc._accel import ENV_FLAG, numba_available
from fogalloc.instance import Instance, ServerSpec, UserSpec
from fogalloc.solver import solve_bruteforce, solve_exact


def mid_instance(rng):
    n_users, n_servers = int(rng.integers(9, 13)), int(rng.integers(5, 7))
    users = tuple(UserSpec(int(rng.integers(1, 5)), 1e6, float(rng.choice([0.8, 0.9])))
                  for _ in range(n_users))
    servers = tuple(ServerSpec(float(rng.integers(1, 20)), int(rng.integers(6, 14)),
                               float(rng.uniform(0.6, 0.95)))
                    for _ in range(n_servers))
    return Instance(users, servers, 3)


def brute_instance(rng):
    users = tuple(UserSpec(int(rng.integers(1, 4)), 1e6, 0.75) for _ in range(4))
    servers = tuple(ServerSpec(float(rng.integers(1, 10)), 6, 0.5) for _ in range(4))
    return Instance(users, servers, 3)


def timed(fn, instances, repeat):
    best, results = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        results = [fn(inst) for inst in instances]
        best = min(best, time.perf_counter() - start)
    return best, results


def run_both(label, fn, instances, repeat):
    os.environ.pop(ENV_FLAG, None)
    fn(instances[0])  # compile outside the timed region
    fast, fast_res = timed(fn, instances, repeat)
    os.environ[ENV_FLAG] = "1"
    slow, slow_res = timed(fn, instances, repeat)
    os.environ.pop(ENV_FLAG, None)
    for a, b in zip(fast_res, slow_res):
        assert a.status == b.status and a.assignment == b.assignment, label
    nodes = sum(r.stats.nodes_explored for r in fast_res)
    print(f"{label:<12} numba {fast * 1e3:9.2f} ms   pure {slow * 1e3:9.2f} ms   "
          f"speedup {slow / fast:7.1f}x   nodes {nodes}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--instances", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not numba_available():
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)
    run_both("exact", solve_exact, [mid_instance(rng) for _ in range(args.instances)], args.repeat)
    run_both("bruteforce", solve_bruteforce,
             [brute_instance(rng) for _ in range(args.instances)], args.repeat)


if __name__ == "__main__":
    main()
