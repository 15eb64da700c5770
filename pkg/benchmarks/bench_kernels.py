#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy reference.

Runs the two hot kernels (iterative inpaint fill, square-element dilation)
on growing workloads and prints a speedup table. Both backends must agree
bit-for-bit; this is asserted on every measurement.

Usage: python benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from chatedit.kernels import _reference

try:
    from chatedit.kernels import _core
except ImportError:
    _core = None


def timed(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def inpaint_workload(size: int, hole_frac: float, rng) -> tuple[np.ndarray, np.ndarray]:
    values = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    hole = int(size * hole_frac)
    start = (size - hole) // 2
    unknown = np.zeros((size, size), dtype=bool)
    unknown[start : start + hole, start : start + hole] = True
    return values, unknown


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _core is None:
        print("compiled kernels not built; nothing to compare (pip install -e . builds them)")
        return

    rng = np.random.default_rng(7)
    print(f"{'kernel':<28} {'numpy ref':>12} {'compiled':>12} {'speedup':>9}")

    for size in (64, 128, 256, 512):
        values, unknown = inpaint_workload(size, 0.25, rng)
        ref_out, _ = _reference.inpaint_fill(values, unknown)
        core_out, _ = _core.inpaint_fill(values, unknown.astype(np.uint8))
        assert np.array_equal(ref_out, core_out), "backend outputs diverged"

        t_ref = timed(lambda: _reference.inpaint_fill(values, unknown), args.repeats)
        t_core = timed(
            lambda: _core.inpaint_fill(values, unknown.astype(np.uint8)), args.repeats
        )
        label = f"inpaint {size}x{size} (25% hole)"
        print(f"{label:<28} {t_ref * 1e3:>10.2f}ms {t_core * 1e3:>10.2f}ms {t_ref / t_core:>8.1f}x")

    for size, radius in ((256, 2), (512, 3), (1024, 5)):
        mask = rng.random((size, size)) < 0.05
        ref = _reference.dilate(mask, radius)
        core = _core.dilate(mask.astype(np.uint8), radius).astype(bool)
        assert np.array_equal(ref, core), "backend outputs diverged"

        t_ref = timed(lambda: _reference.dilate(mask, radius), args.repeats)
        t_core = timed(lambda: _core.dilate(mask.astype(np.uint8), radius), args.repeats)
        label = f"dilate {size}x{size} r={radius}"
        print(f"{label:<28} {t_ref * 1e3:>10.2f}ms {t_core * 1e3:>10.2f}ms {t_ref / t_core:>8.1f}x")


if __name__ == "__main__":
    main()
