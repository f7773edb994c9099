"""Benchmark: compiled band-sum kernel vs the numpy fallback.

Times the hot pair-interaction loop behind the Monte Carlo estimators
on a realistic path and reports throughput for both implementations
plus their agreement.  Run directly:

    python benchmarks/bench_pairsum.py [--steps 1000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from silt import _fallback
from silt._backend import backend_name, band_exp_sum


def _time_one(fn, x, inv_two_eps, repeats: int) -> tuple[float, float]:
    best = math.inf
    value = 0.0
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn(x, inv_two_eps, 1, False)
        best = min(best, time.perf_counter() - t0)
    return value, best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--eps", type=float, default=0.01)
    args = parser.parse_args()

    rng = np.random.Generator(
        np.random.Philox(key=np.array([7, 0], dtype=np.uint64))
    )
    dt = 1.0 / args.steps
    increments = rng.standard_normal((args.steps, args.dim)) * math.sqrt(dt)
    x = np.vstack([np.zeros((1, args.dim)), np.cumsum(increments, axis=0)])
    x = np.ascontiguousarray(x)
    inv_two_eps = 1.0 / (2.0 * args.eps)
    n_pairs = args.steps * (args.steps + 1) // 2

    print(f"path: {args.steps} steps, d={args.dim}, {n_pairs} pairs")
    print(f"active backend: {backend_name()}")

    rows = []
    v_active, t_active = _time_one(
        band_exp_sum, x, inv_two_eps, args.repeats
    )
    rows.append((backend_name(), v_active, t_active))
    if backend_name() != "python":
        v_py, t_py = _time_one(
            _fallback.band_exp_sum, x, inv_two_eps, args.repeats
        )
        rows.append(("python", v_py, t_py))

    for name, value, best in rows:
        rate = n_pairs / best / 1e6
        print(
            f"{name:>9}: {best * 1e3:8.2f} ms  "
            f"({rate:7.1f} Mpairs/s)  value={value:.12e}"
        )
    if len(rows) == 2:
        rel = abs(rows[0][1] - rows[1][1]) / abs(rows[1][1])
        print(f"speedup: {rows[1][2] / rows[0][2]:.1f}x   rel diff: {rel:.2e}")


if __name__ == "__main__":
    main()
