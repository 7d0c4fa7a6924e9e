"""Time every hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]

Prints one row per kernel with the best wall time of each backend, the speedup
and whether the two backends returned identical results. Numba compile time is
excluded by a warm-up call on the same inputs.
"""
import argparse
import time

import numpy as np

from medfraud.classifiers import fit_model
from medfraud.features import LabeledDataset
from medfraud.kernels import best_split, best_stump, knn_search, tree_apply, welford


def best_time(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases(scale, rng):
    n_ref, n_q, d = int(20000 * scale), int(2000 * scale), 54
    R = rng.normal(size=(n_ref, d))
    Q = rng.normal(size=(n_q, d))
    yield "knn (k=5)", lambda b: knn_search(Q, R, 5, backend=b), True

    n = int(50000 * scale)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + rng.normal(size=n) > 0).astype(np.int64)
    w = np.ones(n)
    idx = np.arange(n, dtype=np.int64)
    feats = np.arange(d, dtype=np.int64)
    yield "best_split", lambda b: best_split(X, y, w, idx, feats, backend=b), True

    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"), dtype=np.int64)
    ypm = np.where(y == 1, 1.0, -1.0)
    wn = w / n
    yield "best_stump", lambda b: best_stump(X, order, ypm, wn, backend=b), True

    m = 5000
    ds = LabeledDataset(X[:m], y[:m], [f"x{j}" for j in range(d)], [f"c{i}" for i in range(m)],
                        [f"p{i % 50}" for i in range(m)], None)
    tree = fit_model("dt", ds).tree
    yield "tree_apply", lambda b: tree_apply(tree.feature, tree.threshold, tree.left, tree.right, X,
                                             backend=b), True

    x = rng.lognormal(3, 1.5, size=int(2_000_000 * scale))
    # the two backends sum in different orders, so agreement is to rounding only
    yield "welford", lambda b: welford(x, backend=b), False


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every problem size")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<12} {'numba s':>9} {'numpy s':>9} {'speedup':>8}  agree")
    for name, run, exact in cases(args.scale, rng):
        tn, a = best_time(lambda: run("numba"), args.repeat)
        tp, b = best_time(lambda: run("numpy"), args.repeat)
        if exact:
            agree = "exact" if same(a, b) else "DIFFERENT"
        else:
            agree = "close" if np.allclose(a, b, rtol=1e-9) else "DIFFERENT"
        print(f"{name:<12} {tn:9.4f} {tp:9.4f} {tp / tn:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
