"""Benchmark the jitted kernels against the pure-numpy fallbacks.

Times contact detection and waypoint stepping over a range of fleet
sizes, printing per-call latency and the speedup of the jitted path.
Run from the repository root:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --sizes 100,1000,5000 --repeats 50
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from vanetsim import kernels


def time_call(fn, *args, repeats: int) -> float:
    """Best-of-run mean seconds per call after one warmup invocation."""
    fn(*args)
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(repeats):
            fn(*args)
        best = min(best, (time.perf_counter() - start) / repeats)
    return best


def fleet(n: int, arena: float, seed: int):
    rng = np.random.default_rng(seed)
    return rng.random(n) * arena, rng.random(n) * arena


def bench_contacts(sizes: list[int], repeats: int) -> None:
    print("\ncontact detection (radio range 100 m, density ~15 per 800x800)")
    header = f"{'n':>6}  {'numpy':>12}  {'numba':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        # keep the fleet density comparable to the reference scenario
        arena = 800.0 * (n / 15.0) ** 0.5
        x, y = fleet(n, arena, seed=n)
        t_np = time_call(kernels._contact_pairs_numpy, x, y, 100.0, repeats=repeats)
        if kernels.HAS_NUMBA:
            t_nb = time_call(kernels._contact_pairs_grid, x, y, 100.0, repeats=repeats)
            print(f"{n:>6}  {t_np * 1e3:>10.3f}ms  {t_nb * 1e3:>10.3f}ms  {t_np / t_nb:>7.1f}x")
        else:
            print(f"{n:>6}  {t_np * 1e3:>10.3f}ms  {'n/a':>12}  {'n/a':>8}")


def bench_waypoints(sizes: list[int], repeats: int) -> None:
    print("\nwaypoint stepping (one tick, pause 2 s)")
    header = f"{'n':>6}  {'numpy':>12}  {'numba':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        rng = np.random.default_rng(n)
        arena = 800.0
        state = lambda: (  # noqa: E731 - tiny local factory
            rng.random(n) * arena, rng.random(n) * arena,
            rng.random(n) * arena, rng.random(n) * arena,
            5.0 + rng.random(n) * 10.0, np.full(n, -np.inf),
            np.zeros(n), np.zeros(n),
        )
        cand = rng.random((n, 3))
        args_np = state()
        args_nb = tuple(a.copy() for a in args_np)
        common = (cand, 0.0, 1.0, arena, arena, 5.0, 15.0, 2.0)
        t_np = time_call(kernels._waypoint_step_numpy, *args_np, *common, repeats=repeats)
        if kernels.HAS_NUMBA:
            t_nb = time_call(kernels._waypoint_step_numba, *args_nb, *common, repeats=repeats)
            print(f"{n:>6}  {t_np * 1e6:>10.1f}us  {t_nb * 1e6:>10.1f}us  {t_np / t_nb:>7.1f}x")
        else:
            print(f"{n:>6}  {t_np * 1e6:>10.1f}us  {'n/a':>12}  {'n/a':>8}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--sizes", default="15,100,500,2000",
        help="comma-separated fleet sizes (default 15,100,500,2000)",
    )
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]

    if kernels.HAS_NUMBA:
        print("numba available: comparing jitted kernels against the numpy fallback")
    else:
        print("numba NOT available: timing the numpy fallback only")
    bench_contacts(sizes, args.repeats)
    bench_waypoints(sizes, args.repeats)


if __name__ == "__main__":
    main()
