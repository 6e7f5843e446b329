"""Time the compiled kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from rigiditylab import _kernels_py
from rigiditylab.nets import random_quaternions, super_fibonacci

try:
    from rigiditylab import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    probes = super_fibonacci(200_000)
    points = random_quaternions(2_000, np.random.default_rng(0))
    theta1 = np.array([0.1475836176504333])
    theta2 = np.array([0.1475836176504333, 0.7071067811865476])

    def inner(impl):
        best = np.full(len(probes), -2.0)
        impl.update_best_inner(probes, points, best)

    yield "covering radius, 2e5 probes x 2000 points", inner
    yield "torus scan, m=1, L=1e6", lambda impl: impl.torus_min_gap(theta1, 1_000_000, 4, 1e-12)
    yield "torus scan, m=2, L=300", lambda impl: impl.torus_min_gap(theta2, 300, 4, 1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the numpy fallback is timed")
    print(f"{'case':45s} {'cython [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s}")
    for name, fn in cases():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{name:45s} {'-':>11s} {t_py:11.4f} {'-':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat))
        print(f"{name:45s} {t_cy:11.4f} {t_py:11.4f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
