"""Both kernel backends agree, and agree with plain oracles."""
import numpy as np
import pytest

from medfraud.kernels import best_split, best_stump, knn_search, tree_apply, welford


def brute_knn(Q, R, k, exclude_self=False):
    out = []
    for i, q in enumerate(Q):
        d = ((R - q) ** 2).sum(axis=1)
        cand = [(d[j], j) for j in range(len(R)) if not (exclude_self and j == i)]
        out.append([j for _, j in sorted(cand)[:k]])
    return np.array(out)


@pytest.mark.parametrize("seed", range(5))
def test_knn_backends_identical(seed):
    rng = np.random.default_rng(seed)
    R = rng.normal(size=(300, 6))
    Q = rng.normal(size=(40, 6))
    a = knn_search(Q, R, 7, backend="numba")
    b = knn_search(Q, R, 7, backend="numpy")
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])
    assert np.array_equal(a[0], brute_knn(Q, R, 7))


def test_knn_ties_prefer_lower_index():
    R = np.array([[1.0], [-1.0], [1.0], [0.0]])
    for backend in ("numba", "numpy"):
        idx, d = knn_search(np.array([[0.0]]), R, 3, backend=backend)
        assert idx.tolist() == [[3, 0, 1]]
        assert d.tolist() == [[0.0, 1.0, 1.0]]


def test_knn_exclude_self():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 3, size=(60, 2)).astype(float)  # many duplicates
    for backend in ("numba", "numpy"):
        idx, _ = knn_search(X, X, 4, exclude_self=True, backend=backend)
        assert not (idx == np.arange(60)[:, None]).any()
        assert np.array_equal(idx, brute_knn(X, X, 4, exclude_self=True))


def test_knn_rejects_bad_k():
    with pytest.raises(ValueError):
        knn_search(np.zeros((2, 2)), np.zeros((3, 2)), 4)
    with pytest.raises(ValueError):
        knn_search(np.zeros((3, 2)), np.zeros((3, 2)), 3, exclude_self=True)


def gini_split_oracle(X, y, w, idx, features):
    """Exhaustive weighted-Gini scan over midpoints."""
    best = (np.inf, -1, 0.0)
    for f in features:
        vals = np.unique(X[idx, f])
        for lo, hi in zip(vals[:-1], vals[1:]):
            t = lo + (hi - lo) / 2
            imp = 0.0
            for side in (X[idx, f] <= t, X[idx, f] > t):
                ws = w[idx][side]
                p = (ws * y[idx][side]).sum() / ws.sum()
                imp += ws.sum() * 2 * p * (1 - p)
            imp /= w[idx].sum()
            if imp < best[0] - 1e-12:
                best = (imp, f, t)
    return best


@pytest.mark.parametrize("seed", range(6))
def test_best_split_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(50, 4)).astype(float)
    y = (X[:, 1] + rng.normal(size=50) > 2.5).astype(np.int64)
    w = rng.integers(1, 3, size=50).astype(float)
    idx = np.arange(50, dtype=np.int64)
    feats = np.array([0, 1, 2, 3], dtype=np.int64)
    a = best_split(X, y, w, idx, feats, backend="numba")
    b = best_split(X, y, w, idx, feats, backend="numpy")
    assert a == b
    imp, f, t = gini_split_oracle(X, y, w, idx, feats)
    assert a[0] == f and a[1] == t
    assert a[2] == pytest.approx(imp, rel=1e-12, abs=1e-12)


def test_best_split_none_when_constant():
    X = np.ones((5, 2))
    y = np.array([0, 1, 0, 1, 0])
    for backend in ("numba", "numpy"):
        f, _, _ = best_split(X, y, np.ones(5), np.arange(5), np.array([0, 1]), backend=backend)
        assert f == -1


@pytest.mark.parametrize("seed", range(4))
def test_best_stump_backends_and_oracle(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 8, size=(70, 3)).astype(float)
    ypm = np.where(rng.random(70) < 0.4, 1.0, -1.0)
    w = rng.random(70)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"), dtype=np.int64)
    a = best_stump(X, order, ypm, w, backend="numba")
    b = best_stump(X, order, ypm, w, backend="numpy")
    assert a == b
    f, t, s, err = a
    pred = np.where(X[:, f] <= t, s, -s)
    assert err == pytest.approx(w[pred != ypm].sum(), rel=1e-12)
    # no threshold/polarity on any feature does better
    for g in range(3):
        for th in np.unique(X[:, g]):
            for pol in (1, -1):
                e = w[np.where(X[:, g] <= th, pol, -pol) != ypm].sum()
                assert err <= e + 1e-12


def test_tree_apply_backends():
    # root splits x0 <= 0.5; left leaf 1, right node splits x1 <= 2 into leaves 3, 4
    feature = np.array([0, -1, 1, -1, -1], dtype=np.int64)
    threshold = np.array([0.5, 0, 2.0, 0, 0])
    left = np.array([1, -1, 3, -1, -1], dtype=np.int64)
    right = np.array([2, -1, 4, -1, -1], dtype=np.int64)
    X = np.array([[0.0, 9.0], [1.0, 1.0], [1.0, 3.0], [0.5, 0.0]])
    for backend in ("numba", "numpy"):
        assert tree_apply(feature, threshold, left, right, X, backend=backend).tolist() == [1, 3, 4, 1]


@pytest.mark.parametrize("n", [1, 2, 17, 5000])
def test_welford_against_two_pass(n):
    x = np.random.default_rng(n).lognormal(3, 2, size=n)
    for backend in ("numba", "numpy"):
        cnt, mean, m2 = welford(x, backend=backend)
        assert cnt == n
        assert mean == pytest.approx(x.mean(), rel=1e-12)
        assert m2 == pytest.approx(((x - x.mean()) ** 2).sum(), rel=1e-9, abs=1e-9)


def test_best_stump_rejects_mismatched_order():
    X = np.zeros((5, 2))
    with pytest.raises(ValueError):
        best_stump(X, np.zeros((2, 5), dtype=np.int64), np.ones(5), np.ones(5))
