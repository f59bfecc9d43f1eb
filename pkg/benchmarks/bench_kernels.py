"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 3]

The numba functions are warmed up once so compile time is excluded.
"""

import argparse
import time

import numpy as np

from ccg import _kernels as K
from ccg import instances
from ccg.brute import _combos, _gain_rows
from ccg.deviations import presets


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    g = instances.random_marginal_instance(2, 2, 2, 0)
    W, owner = _gain_rows(g, presets(g, "CCE"))
    C = g.costs.reshape(-1, 4)
    obj = instances.social_welfare(g)
    yield "grid_scan k=120, 4 profiles", "grid_scan", (120, 4, W, owner, 2, C, obj, 1e-3, 1e-9, 0, 121)

    E = np.kron(np.eye(3), np.ones((1, 3)))
    G = np.vstack([-np.eye(9), rng.uniform(-1, 1, size=(2, 9))])
    h = np.concatenate([np.zeros(9), [0.2, 0.2]])
    yield ("max_over_vertices s=3, 2 rows", "max_over_vertices",
           (E, np.ones(3), G, h, rng.normal(size=9), _combos(11, 6), 1e-9))

    p = rng.normal(size=30)
    A = rng.uniform(-1, 1, size=(4, 30))
    yield "dykstra 10 blocks of 3, 4 rows", "dykstra", (p, 3, A, np.full(4, 0.1), 10_000, 1e-10)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for label, name, argv in cases():
        K.numba_impl[name](*argv)  # compile
        t_np = best_of(lambda: K.numpy_impl[name](*argv), args.repeat)
        t_nb = best_of(lambda: K.numba_impl[name](*argv), args.repeat)
        print(f"{label:40s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
