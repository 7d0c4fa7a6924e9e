import io
import json

import numpy as np
import pytest

from medfraud.classifiers import (
    MODEL_KINDS, AdaBoostParams, DecisionTreeParams, KNNParams, LDAParams, RandomForestParams,
    SingularCovarianceError, fit_adaboost, fit_decision_tree, fit_knn, fit_lda, fit_model,
    fit_random_forest, load_model, loads_model, save_model,
)
from medfraud.errors import CorruptModelError, DataWarning, FingerprintMismatchError, VersionMismatchError

from conftest import blobs, make_dataset


def noisy(seed, n=300, d=5):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = ((X[:, 0] + 0.5 * X[:, 1] ** 2 + rng.normal(scale=0.7, size=n)) > 0.5).astype(int)
    return X, y


# -- decision tree / forest --------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_tree_fits_duplicate_free_data_exactly(seed):
    X, y = noisy(seed)
    model = fit_decision_tree(make_dataset(X, y))
    assert (model.predict(X) == y).mean() == 1.0


def test_tree_depth_limit():
    X, y = noisy(1)
    model = fit_decision_tree(make_dataset(X, y), DecisionTreeParams(max_depth=3))
    assert model.tree.depth() <= 3


def test_tree_leaf_values_are_fractions():
    X = np.array([[0.0], [0.0], [0.0], [1.0]])
    y = np.array([1, 0, 1, 0])
    model = fit_decision_tree(make_dataset(X, y))
    assert model.score(np.array([[0.0], [2.0]])).tolist() == [pytest.approx(2 / 3), 0.0]


@pytest.mark.parametrize("seed", range(4))
def test_forest_reduces_to_tree(seed):
    X, y = noisy(seed, d=6)
    ds = make_dataset(X, y)
    rf = fit_random_forest(ds, RandomForestParams(n_trees=1, bootstrap=False, features_per_split=6), seed)
    dt = fit_decision_tree(ds)
    t, u = rf.trees[0], dt.tree
    assert np.array_equal(t.feature, u.feature) and np.array_equal(t.threshold, u.threshold)
    Q = np.random.default_rng(99).normal(size=(200, 6))
    assert np.array_equal(rf.score(Q), dt.score(Q))


def test_forest_deterministic_and_seeded():
    X, y = noisy(3)
    ds = make_dataset(X, y)
    hp = RandomForestParams(n_trees=8)
    a, b, c = (fit_random_forest(ds, hp, s) for s in (1, 1, 2))
    Q = np.random.default_rng(0).normal(size=(50, 5))
    assert np.array_equal(a.score(Q), b.score(Q))
    assert not np.array_equal(a.score(Q), c.score(Q))
    assert a.tree_scores(Q).shape == (8, 50)


@pytest.mark.parametrize("fit", [fit_decision_tree, fit_adaboost])
def test_monotone_feature_transform_invariance(fit):
    X, y = noisy(7, n=200, d=3)
    Z = np.column_stack([np.exp(X[:, 0]), X[:, 1] ** 3, 2 * X[:, 2] + 5])
    a = fit(make_dataset(X, y)).predict(X)
    b = fit(make_dataset(Z, y)).predict(Z)
    assert np.array_equal(a, b)


# -- knn -----------------------------------------------------------------------

def brute_knn_scores(Xtr, ytr, Q, k):
    out = []
    for q in Q:
        d = ((Xtr - q) ** 2).sum(axis=1)
        nn = [j for _, j in sorted(zip(d, range(len(Xtr))))[:k]]
        out.append(ytr[nn].mean())
    return np.array(out)


@pytest.mark.parametrize("seed", range(50))
def test_knn_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 500))
    d = int(rng.integers(1, 6))
    X = rng.integers(-3, 4, size=(n, d)).astype(float)  # coarse grid forces distance ties
    y = rng.integers(0, 2, size=n)
    k = int(rng.choice([1, 3, 5, 7]))
    Q = rng.integers(-3, 4, size=(40, d)).astype(float)
    model = fit_knn(make_dataset(X, y), KNNParams(k=k))
    want = brute_knn_scores(X, y, Q, k)
    assert np.array_equal(model.score(Q), want)
    assert np.array_equal(model.predict(Q), (want >= 0.5).astype(int))


def test_knn_k_must_be_odd():
    with pytest.raises(ValueError):
        KNNParams(k=4)


# -- lda -------------------------------------------------------------------------

def test_lda_near_bayes_optimal():
    rng = np.random.default_rng(0)
    cov = np.array([[1.0, 0.6, 0.0], [0.6, 1.5, 0.3], [0.0, 0.3, 0.8]])
    mu0, mu1, p1 = np.zeros(3), np.array([1.2, -0.8, 0.9]), 0.35
    L = np.linalg.cholesky(cov)

    def draw(n):
        y = (rng.random(n) < p1).astype(int)
        X = rng.normal(size=(n, 3)) @ L.T + np.where(y[:, None] == 1, mu1, mu0)
        return X, y

    Xtr, ytr = draw(4000)
    Xte, yte = draw(200000)
    inv = np.linalg.inv(cov)
    bayes = (Xte @ inv @ (mu1 - mu0) - 0.5 * (mu1 @ inv @ mu1 - mu0 @ inv @ mu0)
             + np.log(p1 / (1 - p1))) >= 0
    bayes_acc = (bayes == yte).mean()
    model = fit_lda(make_dataset(Xtr, ytr))
    acc = (model.predict(Xte) == yte).mean()
    assert abs(acc - bayes_acc) <= 0.03


def test_lda_affine_invariance():
    rng = np.random.default_rng(2)
    X, y = blobs(rng, 150, 90, d=3, sep=2.0)
    A = np.array([[2.0, 0.5, 0.0], [0.0, 1.0, -1.0], [0.3, 0.0, 3.0]])
    b = np.array([5.0, -2.0, 1.0])
    hp = LDAParams(ridge=0.0)
    s1 = fit_lda(make_dataset(X, y), hp).score(X)
    s2 = fit_lda(make_dataset(X @ A + b, y), hp).score(X @ A + b)
    assert np.allclose(s1, s2, atol=1e-9)


def test_lda_singular_covariance():
    X = np.column_stack([np.arange(10.0), np.arange(10.0)])
    y = np.array([0, 1] * 5)
    with pytest.raises(SingularCovarianceError):
        fit_lda(make_dataset(X, y), LDAParams(ridge=0.0))
    fit_lda(make_dataset(X, y), LDAParams(ridge=1e-3))


# -- adaboost ------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_adaboost_round_errors_and_loss(seed):
    X, y = noisy(seed, n=250)
    model = fit_adaboost(make_dataset(X, y), AdaBoostParams(n_rounds=40))
    assert model.errors and all(e < 0.5 for e in model.errors)
    ypm = np.where(y == 1, 1.0, -1.0)
    losses = [np.mean(np.exp(-ypm * model.margin(X, t))) for t in range(len(model.stumps) + 1)]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_adaboost_stops_on_perfect_stump():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    model = fit_adaboost(make_dataset(X, y))
    assert len(model.stumps) == 1 and model.errors == [0.0]
    assert (model.predict(X) == y).all()


def test_adaboost_constant_model_when_no_stump():
    X = np.ones((6, 2))
    y = np.array([0, 1, 1, 0, 1, 1])
    with pytest.warns(DataWarning):
        model = fit_adaboost(make_dataset(X, y))
    assert np.allclose(model.score(X), 4 / 6)


# -- shared contract + persistence ---------------------------------------------

@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(5)
    X, y = blobs(rng, 120, 80, d=4, sep=2.0)
    ds = make_dataset(X, y, fingerprint="f" * 64)
    hp = {"rf": {"n_trees": 7}, "ada": {"n_rounds": 15}}
    return ds, {k: fit_model(k, ds, hp.get(k), seed=3) for k in MODEL_KINDS}


def test_scores_are_probabilities(trained):
    ds, models = trained
    for m in models.values():
        s = m.score(ds)
        assert s.shape == (len(ds),) and (s >= 0).all() and (s <= 1).all()
        assert np.array_equal(m.predict(ds), (s >= 0.5).astype(int))


def test_save_load_bit_identical(trained, tmp_path):
    ds, models = trained
    Q = np.random.default_rng(1).normal(size=(100, 4)) * 3
    for kind, m in models.items():
        p = tmp_path / f"{kind}.json"
        save_model(m, str(p))
        back = load_model(str(p), expected_fingerprint="f" * 64)
        assert type(back) is type(m)
        assert np.array_equal(back.score(Q), m.score(Q))
        buf = io.StringIO()
        save_model(back, buf)
        assert buf.getvalue() == p.read_text()


def test_load_errors(trained):
    _, models = trained
    buf = io.StringIO()
    save_model(models["lda"], buf)
    text = buf.getvalue()
    with pytest.raises(FingerprintMismatchError):
        loads_model(text, expected_fingerprint="0" * 64)
    doc = json.loads(text)
    doc["version"] = 99
    with pytest.raises(VersionMismatchError):
        loads_model(json.dumps(doc))
    with pytest.raises(CorruptModelError):
        loads_model(text[: len(text) // 2])
    del doc["params"]
    doc["version"] = 1
    with pytest.raises(CorruptModelError):
        loads_model(json.dumps(doc))


def test_scoring_checks_fingerprint_and_columns(trained):
    ds, models = trained
    other = make_dataset(ds.X, ds.y, fingerprint="e" * 64)
    with pytest.raises(FingerprintMismatchError):
        models["dt"].score(other)
    with pytest.raises(ValueError):
        models["dt"].score(np.zeros((3, 5)))


def test_unknown_kind_and_bad_hyperparams(trained):
    ds, _ = trained
    with pytest.raises(ValueError):
        fit_model("svm", ds)
    with pytest.raises((TypeError, ValueError)):
        fit_model("rf", ds, {"n_trees": 0})
