import numpy as np
import pytest

from medfraud.resample import (
    ResampleError, ResamplePlan, enn_clean, oversample_target, random_oversample,
    random_undersample, resample, smote,
)

from conftest import blobs, make_dataset


def knn_oracle(X, i, k):
    d = ((X - X[i]) ** 2).sum(axis=1)
    d[i] = np.inf
    return [j for _, j in sorted(zip(d, range(len(X))))[:k]]


def on_some_segment(s, base_rows, Xm, k):
    """True when ``s`` lies on a segment from some minority row to one of its k neighbours."""
    for i in base_rows:
        for j in knn_oracle(Xm, i, k):
            seg = Xm[j] - Xm[i]
            denom = seg @ seg
            if denom == 0:
                if np.allclose(s, Xm[i], atol=1e-12):
                    return True
                continue
            lam = (s - Xm[i]) @ seg / denom
            if -1e-12 <= lam <= 1 + 1e-12 and np.allclose(Xm[i] + lam * seg, s, atol=1e-9):
                return True
    return False


@pytest.mark.parametrize("seed", range(50))
def test_smote_segments_and_counts(seed):
    rng = np.random.default_rng(seed)
    n0, n1 = int(rng.integers(30, 90)), int(rng.integers(7, 25))
    k = int(rng.choice([1, 3, 5]))
    ratio = float(rng.choice([0.5, 0.8, 1.0]))
    X, y = blobs(rng, n0, n1, d=3)
    ds = make_dataset(X, y)
    out = smote(ds, ResamplePlan("smote", k_neighbors=k, target_ratio=ratio, seed=seed))
    n = len(ds)
    # originals preserved verbatim and first
    assert np.array_equal(out.X[:n], ds.X) and np.array_equal(out.y[:n], ds.y)
    assert (out.y == 1).sum() == max(n1, int(np.floor(ratio * n0 + 0.5)))
    assert (out.y == 0).sum() == n0
    Xm = X[y == 1]
    syn = out.X[n:]
    assert (out.y[n:] == 1).all()
    assert all(str(c).startswith("synthetic:") for c in out.claim_ids[n:])
    # inside the minority bounding box, and on a neighbour segment
    assert (syn >= Xm.min(axis=0) - 1e-12).all() and (syn <= Xm.max(axis=0) + 1e-12).all()
    for s in syn:
        assert on_some_segment(s, range(n1), Xm, k)


def test_smote_deterministic_and_seeded():
    rng = np.random.default_rng(0)
    ds = make_dataset(*blobs(rng, 60, 15))
    a = smote(ds, ResamplePlan("smote", seed=7))
    b = smote(ds, ResamplePlan("smote", seed=7))
    c = smote(ds, ResamplePlan("smote", seed=8))
    assert np.array_equal(a.X, b.X)
    assert not np.array_equal(a.X, c.X)


def test_smote_budget_spread_evenly():
    rng = np.random.default_rng(1)
    X, y = blobs(rng, 50, 10, d=2)
    out = smote(make_dataset(X, y), ResamplePlan("smote", k_neighbors=3, seed=0))
    # 40 synthetic rows over 10 minority rows: four each
    Xm = X[y == 1]
    syn = out.X[60:]
    assert len(syn) == 40
    for i in range(10):
        for s in syn[4 * i:4 * i + 4]:
            assert on_some_segment(s, [i], Xm, 3)


def test_smote_too_few_minority():
    ds = make_dataset(np.arange(12.0)[:, None], [0] * 9 + [1] * 3)
    with pytest.raises(ResampleError, match="at least 6"):
        smote(ds, ResamplePlan("smote", k_neighbors=5))


def test_already_balanced_is_unchanged():
    ds = make_dataset(np.arange(10.0)[:, None], [0, 1] * 5)
    assert resample(ds, ResamplePlan("smote")) is ds


def test_oversample_target_rounding():
    assert oversample_target(10, 25, 0.5) == 13  # 12.5 rounds up
    assert oversample_target(10, 25, 0.1) == 10  # never shrinks
    assert oversample_target(3, 7, 1.0) == 7


def test_enn_matches_oracle():
    rng = np.random.default_rng(4)
    X, y = blobs(rng, 40, 40, d=2, sep=1.0)
    ds = make_dataset(X, y)
    out = enn_clean(ds, k=3)
    keep = [i for i in range(len(X)) if 2 * sum(y[j] == y[i] for j in knn_oracle(X, i, 3)) >= 3]
    assert list(out.claim_ids) == [f"c{i}" for i in keep]
    assert len(out) < len(ds)


def test_enn_tie_keeps_row():
    # row 0's two neighbours split 1-1: a tie keeps it
    X = np.array([[0.0], [1.0], [-1.0], [5.0], [6.0]])
    y = np.array([0, 0, 1, 1, 1])
    out = enn_clean(make_dataset(X, y), k=2)
    assert "c0" in list(out.claim_ids)


def test_smote_enn_pipeline():
    rng = np.random.default_rng(5)
    ds = make_dataset(*blobs(rng, 80, 20, sep=2.0))
    out = resample(ds, ResamplePlan("smote-enn", k_neighbors=3, seed=1))
    assert len(out) < 160  # SMOTE adds 60, ENN removes some
    assert (out.y == 1).sum() > 20


def test_random_oversample_duplicates_minority():
    rng = np.random.default_rng(6)
    ds = make_dataset(*blobs(rng, 30, 10))
    out = random_oversample(ds, ResamplePlan("ros", seed=0))
    assert (out.y == 1).sum() == 30
    minority = {tuple(r) for r in ds.X[ds.y == 1]}
    assert all(tuple(r) in minority for r in out.X[len(ds):])


def test_random_undersample_counts():
    rng = np.random.default_rng(7)
    ds = make_dataset(*blobs(rng, 45, 10))
    out = random_undersample(ds, ResamplePlan("rus", target_ratio=0.4, seed=0))
    assert (out.y == 1).sum() == 10 and (out.y == 0).sum() == 25
    assert set(out.claim_ids) <= set(ds.claim_ids)


def test_plan_validation():
    with pytest.raises(ValueError):
        ResamplePlan("adasyn")
    with pytest.raises(ValueError):
        ResamplePlan("smote", target_ratio=0.0)
