#!/usr/bin/env python3
"""Compare the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from seedmine.kernels import _fallback

try:
    from seedmine.kernels import _native
except ImportError:
    _native = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def run(repeat):
    rng = np.random.default_rng(0)
    rows = []

    for size, r in [(128, 3), (128, 9), (256, 15), (512, 31)]:
        mask = (rng.random((size, size)) < 0.1).astype(np.uint8)
        label = f"dilate {size}x{size} r={r}"
        fallback = best_of(lambda: _fallback.dilate_mask(mask, r), repeat)
        native = (
            best_of(lambda: _native.dilate_mask(mask, r), repeat) if _native else None
        )
        if _native:
            assert np.array_equal(
                np.asarray(_native.dilate_mask(mask, r)),
                np.asarray(_fallback.dilate_mask(mask, r)),
            )
        rows.append((label, native, fallback))

    for size in (256, 1024):
        alphabet = np.array([0, 1, 2, 3, 4, 5, 6, 255], dtype=np.uint8)
        gt = rng.choice(alphabet, size=(size, size))
        pred = rng.choice(alphabet, size=(size, size))
        label = f"confusion {size}x{size} C=6"
        fallback = best_of(lambda: _fallback.confusion_counts(gt, pred, 6), repeat)
        native = (
            best_of(lambda: _native.confusion_counts(gt, pred, 6), repeat)
            if _native
            else None
        )
        rows.append((label, native, fallback))

    print(f"{'kernel':<28}{'native':>12}{'numpy':>12}{'speedup':>10}")
    for label, native, fallback in rows:
        if native is None:
            print(f"{label:<28}{'n/a':>12}{fallback * 1e3:>10.3f}ms{'':>10}")
        else:
            print(
                f"{label:<28}{native * 1e3:>10.3f}ms{fallback * 1e3:>10.3f}ms"
                f"{fallback / native:>9.1f}x"
            )
    if _native is None:
        print("\ncompiled kernels not built; showing the numpy fallback only")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    run(parser.parse_args().repeat)
