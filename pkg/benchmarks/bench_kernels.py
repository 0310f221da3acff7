"""Time the numba kernels against their numpy fallbacks.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--scale S]

The numba versions are compiled once before timing. With
DDDKIT_DISABLE_NUMBA=1 the ``*_jit`` functions run as plain Python, which is
mostly useful to see how slow the uncompiled loops are.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from dddkit import kernels
from dddkit._accel import HAS_NUMBA


def _cases(rng, scale):
    n = int(400 * scale)
    X = rng.standard_normal((n, 8))
    y = (X[:, 0] + 0.5 * rng.standard_normal(n) > 0).astype(np.float64)
    ys = 2.0 * y - 1.0
    m = int(300 * scale)
    Z = X[:m]
    K = np.exp(-0.1 * ((Z[:, None, :] - Z[None, :, :]) ** 2).sum(-1))
    W = rng.standard_normal((int(2000 * scale), 180))
    # a depth-6 complete tree for tree_apply
    nodes = 2 ** 7 - 1
    left = np.full(nodes, -1, dtype=np.int64)
    right = np.full(nodes, -1, dtype=np.int64)
    internal = np.arange(2 ** 6 - 1)
    left[internal] = 2 * internal + 1
    right[internal] = 2 * internal + 2
    feature = np.where(left >= 0, rng.integers(0, 8, nodes), -1).astype(np.int64)
    threshold = rng.standard_normal(nodes)
    Xa = rng.standard_normal((int(20000 * scale), 8))
    return {
        "best_split": (X, y, 1.0),
        "tree_apply": (Xa, feature, threshold, left, right),
        "smo_solve": (K, ys[:m], 1.0, 1e-3, 100000),
        "hist_entropy": (W, kernels.HIST_BINS),
        "crossings": (W - W.mean(axis=1, keepdims=True),),
    }


def _time(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    cases = _cases(np.random.default_rng(args.seed), args.scale)
    print(f"numba available: {HAS_NUMBA}")
    print(f"{'kernel':<14}{'numba (ms)':>12}{'numpy (ms)':>12}{'speedup':>10}")
    for name, call_args in cases.items():
        jit = getattr(kernels, f"{name}_jit")
        npf = getattr(kernels, f"{name}_np")
        jit(*call_args)  # compile
        tj = _time(jit, call_args, args.repeat)
        tn = _time(npf, call_args, args.repeat)
        print(f"{name:<14}{tj * 1e3:>12.2f}{tn * 1e3:>12.2f}{tn / tj:>10.1f}x")


if __name__ == "__main__":
    main()
