"""Compare the numba and numpy kernel backends on factor workloads.

Run with ``python3 benchmarks/bench_kernels.py``.  The first numba call
includes JIT compilation; a warm-up round is timed out of band so the
reported numbers reflect steady-state throughput.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from riskbn import catalog
from riskbn.exact import build_junction_tree, calibrate
from riskbn.kernels import multiply_tables, sum_out


def bench_raw_kernels(force: str, repeats: int = 50) -> dict[str, float]:
    """Time the two primitive kernels on a 12-variable ternary scope."""
    rng = np.random.default_rng(0)
    cards = np.full(12, 3, dtype=np.int64)
    size = int(np.prod(cards))
    a = rng.random(size // 27)
    b = rng.random(size // 81)
    a_pos = np.arange(9, dtype=np.int64)
    b_pos = np.arange(2, 10, dtype=np.int64)
    big = rng.random(size)
    keep = np.array([0, 3, 7, 11], dtype=np.int64)

    multiply_tables(a, b, cards, a_pos, b_pos, force=force)
    sum_out(big, cards, keep, force=force)

    t0 = time.perf_counter()
    for _ in range(repeats):
        multiply_tables(a, b, cards, a_pos, b_pos, force=force)
    t_mul = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    for _ in range(repeats):
        sum_out(big, cards, keep, force=force)
    t_sum = (time.perf_counter() - t0) / repeats
    return {"multiply_ms": t_mul * 1e3, "sum_out_ms": t_sum * 1e3}


def bench_calibration(force: str, repeats: int = 20) -> float:
    """Time full junction-tree calibration of the largest catalog network."""
    import os

    prior = os.environ.get("RISKBN_BACKEND")
    os.environ["RISKBN_BACKEND"] = force
    try:
        net = catalog.build("fig13_tree").net
        tree = build_junction_tree(net)
        calibrate(tree)
        t0 = time.perf_counter()
        for _ in range(repeats):
            calibrate(tree)
        return (time.perf_counter() - t0) / repeats * 1e3
    finally:
        if prior is None:
            del os.environ["RISKBN_BACKEND"]
        else:
            os.environ["RISKBN_BACKEND"] = prior


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    print(f"{'workload':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    raw = {f: bench_raw_kernels(f, args.repeats) for f in ("numpy", "numba")}
    for key in ("multiply_ms", "sum_out_ms"):
        np_t, nb_t = raw["numpy"][key], raw["numba"][key]
        print(f"{key:<28}{np_t:>10.3f}ms{nb_t:>10.3f}ms{np_t / nb_t:>9.2f}x")
    cal = {f: bench_calibration(f, max(args.repeats // 2, 5))
           for f in ("numpy", "numba")}
    print(f"{'calibrate fig13_tree':<28}{cal['numpy']:>10.3f}ms"
          f"{cal['numba']:>10.3f}ms{cal['numpy'] / cal['numba']:>9.2f}x")


if __name__ == "__main__":
    main()
