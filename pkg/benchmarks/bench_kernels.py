"""Compare the numba kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--depth 12] [--repeat 5]

The first numba call includes compilation; it is reported separately.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cantor_forge import kernels
from cantor_forge.cantor import affine_image, build_middle_alpha


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    K = build_middle_alpha("1/4")
    K5 = affine_image(K, 1, "1/5")
    a = kernels.approximant_intervals(K, args.depth, use_numba=False)
    b = kernels.approximant_intervals(K5, args.depth, use_numba=False)
    small = kernels.approximant_intervals(K, min(args.depth, 10), use_numba=False)
    rng = np.random.default_rng(0)
    lo = rng.random((20000, 2))
    rects = np.column_stack([lo[:, 0], lo[:, 0] + 0.01, lo[:, 1], lo[:, 1] + 0.01])

    cases = {
        "approximant": lambda nb: kernels.approximant_intervals(K, args.depth, use_numba=nb),
        "union_thickness": lambda nb: kernels.union_thickness(small, 0.1, use_numba=nb),
        "intersect": lambda nb: kernels.intersect_intervals(a, b, use_numba=nb),
        "circle_hits": lambda nb: kernels.circle_rect_hits((0.5, 0.5), 0.3, rects, use_numba=nb),
    }
    print(f"{'kernel':<16} {'numpy s':>10} {'numba s':>10} {'compile s':>10} {'speedup':>8}")
    for name, fn in cases.items():
        t0 = time.perf_counter()
        fn(True)
        compile_s = time.perf_counter() - t0
        t_np = _time(lambda: fn(False), args.repeat)
        t_nb = _time(lambda: fn(True), args.repeat)
        print(f"{name:<16} {t_np:>10.5f} {t_nb:>10.5f} {compile_s:>10.3f} {t_np / t_nb:>8.1f}")


if __name__ == "__main__":
    main()
