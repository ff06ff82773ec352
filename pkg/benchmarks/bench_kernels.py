#!/usr/bin/env python3
"""Time the numba and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--repeat N] [--seed S]

Both backends are imported in one process through ``kernels.BACKENDS``;
the first numba call (compilation or cache load) is excluded from timings.
"""
import argparse
import time

import numpy as np

from kxsketch import kernels
from kxsketch._accel import backend
from kxsketch.patterns import synthetic_suite
from kxsketch.pipeline import analyze


def _bins(rng, n):
    b = rng.gamma(1.0, 10.0, size=(n, 16))
    b[rng.random((n, 16)) < 0.5] = 0.0
    b[~b.any(axis=1), 0] = 1.0
    return b


def _time(fn, repeat):
    fn()                                   # warm-up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    A, B = _bins(rng, 40), _bins(rng, 40)
    angles = rng.uniform(-180, 180, 5000)
    offsets = rng.uniform(-90, 90) + np.arange(-11, 12, dtype=float)
    xy = np.cumsum(rng.normal(size=(20000, 2)), axis=0)

    cases = [
        ("kx_pairwise 40x40", "kx_pairwise", (A, B)),
        ("sector_histograms 5000 pts x 23", "sector_histograms", (angles, offsets, 1)),
        ("turning_angles 20000 pts", "turning_angles", (xy, 4)),
    ]
    print(f"{'kernel':<34}{'numpy ms':>12}{'numba ms':>12}{'speed-up':>10}")
    for label, name, call_args in cases:
        t = {be: _time(lambda be=be: kernels.BACKENDS[be][name](*call_args), args.repeat)
             for be in ("numpy", "numba")}
        print(f"{label:<34}{1e3 * t['numpy']:>12.3f}{1e3 * t['numba']:>12.3f}{t['numpy'] / t['numba']:>9.1f}x")

    suite = synthetic_suite(seed=args.seed, per_class=4)
    t = _time(lambda: [analyze(s) for s in suite], 1)
    print(f"\nend-to-end analysis of {len(suite)} synthetic sketches ({backend()} active): {t:.2f} s")


if __name__ == "__main__":
    main()
