"""Timing the numba kernels against their pure-numpy twins.

Runs each of the three inner loops on a realistically sized workload,
warm (JIT cost excluded), and reports the best of five repeats.
Needs numba importable; VENUEREC_PURE_NUMPY must not be set.
"""

import time

import numpy as np

from venuerec import _kernels
from venuerec.features import N_FEATURES
from venuerec.ltr import fit_tree


def bench(fn, args, warmup=1, repeat=5):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def report(name, numpy_fn, numba_fn, args):
    t_np = bench(numpy_fn, args)
    t_nb = bench(numba_fn, args)
    print("%-14s numpy %8.2f ms   numba %8.2f ms   x%.1f"
          % (name, t_np * 1e3, t_nb * 1e3, t_np / t_nb))


if __name__ == "__main__":
    if _kernels.BACKEND != "numba":
        raise SystemExit("numba backend not active (BACKEND=%s)"
                         % _kernels.BACKEND)
    rng = np.random.default_rng(0)

    matrix = rng.normal(size=(50_000, 300))
    norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
    query = rng.normal(size=300)
    report("cosine_scores", _kernels.numpy_cosine_scores,
           _kernels.numba_cosine_scores, (matrix, norms, query))

    values = np.sort(rng.normal(size=200_000))
    targets = rng.normal(size=200_000)
    report("best_split", _kernels.numpy_best_split,
           _kernels.numba_best_split, (values, targets, 1))

    X = np.ascontiguousarray(rng.normal(size=(200_000, N_FEATURES)))
    y = rng.normal(size=200_000)
    tree = fit_tree(X, y, max_leaves=7, min_leaf=1)
    report("apply_tree", _kernels.numpy_apply_tree,
           _kernels.numba_apply_tree, tree.arrays() + (X,))
