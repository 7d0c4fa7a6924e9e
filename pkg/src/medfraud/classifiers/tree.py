"""CART decision trees (Gini) and random forests built from them."""
from __future__ import annotations

import warnings

import numpy as np

from ..errors import DataWarning
from ..kernels import best_split, tree_apply
from .base import (
    DecisionTreeParams, RandomForestParams, TrainedModel, as_arrays, check_training,
)


class Tree:
    """Flat preorder node arrays; ``feature[i] < 0`` marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def score(self, X) -> np.ndarray:
        return self.value[tree_apply(self.feature, self.threshold, self.left, self.right, X)]

    def to_nested(self, i: int = 0) -> dict:
        if self.feature[i] < 0:
            return {"value": float(self.value[i])}
        return {
            "feature": int(self.feature[i]),
            "threshold": float(self.threshold[i]),
            "left": self.to_nested(int(self.left[i])),
            "right": self.to_nested(int(self.right[i])),
        }

    @classmethod
    def from_nested(cls, doc: dict) -> "Tree":
        feature, threshold, left, right, value = [], [], [], [], []
        stack = [(doc, -1, False)]
        while stack:
            node, parent, is_right = stack.pop()
            i = len(feature)
            if parent >= 0:
                (right if is_right else left)[parent] = i
            left.append(-1)
            right.append(-1)
            if "value" in node:
                feature.append(-1)
                threshold.append(0.0)
                value.append(float(node["value"]))
            else:
                feature.append(int(node["feature"]))
                threshold.append(float(node["threshold"]))
                value.append(float("nan"))
                stack.append((node["right"], i, True))
                stack.append((node["left"], i, False))
        return cls(feature, threshold, left, right, value)


def grow_tree(X, y, w, rows, max_depth=None, min_samples_split=2, n_features=None, rng=None) -> Tree:
    """Greedy CART growth over ``rows`` with per-row multiplicities ``w``.

    Nodes are emitted in preorder (left subtree first). A node becomes a leaf
    when it is pure, at ``max_depth``, holds fewer than ``min_samples_split``
    samples, or has no feature with two distinct values among the candidates.
    ``n_features < d`` draws a fresh uniform feature subset per node from ``rng``.
    """
    d = X.shape[1]
    all_features = np.arange(d, dtype=np.int64)
    subset = n_features is not None and n_features < d
    yf = y.astype(np.float64)
    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(np.asarray(rows, dtype=np.int64), 0, -1, False)]
    while stack:
        node_rows, depth, parent, is_right = stack.pop()
        i = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = i
        W = w[node_rows].sum()
        P = (w[node_rows] * yf[node_rows]).sum()
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(P / W)
        if P == 0 or P == W or W < min_samples_split or (max_depth is not None and depth >= max_depth):
            continue
        feats = np.sort(rng.choice(d, size=n_features, replace=False)) if subset else all_features
        f, t, _ = best_split(X, yf, w, node_rows, feats)
        if f < 0:
            continue
        feature[i] = f
        threshold[i] = t
        go_left = X[node_rows, f] <= t
        stack.append((node_rows[~go_left], depth + 1, i, True))
        stack.append((node_rows[go_left], depth + 1, i, False))
    return Tree(feature, threshold, left, right, value)


def _single_class_warning(y) -> bool:
    if y.min() == y.max():
        warnings.warn("training labels contain a single class; fitting a constant model",
                      DataWarning, stacklevel=3)
        return True
    return False


class DecisionTreeModel(TrainedModel):
    kind = "dt"

    def __init__(self, tree: Tree, hyperparams, seed, columns, fingerprint):
        super().__init__(hyperparams, seed, columns, fingerprint)
        self.tree = tree

    def _score(self, X):
        return self.tree.score(X)

    def params_dict(self):
        return {"tree": self.tree.to_nested()}

    @classmethod
    def from_params(cls, hyperparams, seed, columns, fingerprint, params):
        return cls(Tree.from_nested(params["tree"]), hyperparams, seed, columns, fingerprint)


class RandomForestModel(TrainedModel):
    kind = "rf"

    def __init__(self, trees, hyperparams, seed, columns, fingerprint):
        super().__init__(hyperparams, seed, columns, fingerprint)
        self.trees = list(trees)

    def tree_scores(self, X) -> np.ndarray:
        X = self._matrix(X)
        return np.vstack([t.score(X) for t in self.trees])

    def _score(self, X):
        total = np.zeros(X.shape[0])
        for t in self.trees:
            total += t.score(X)
        return total / len(self.trees)

    def params_dict(self):
        return {"trees": [t.to_nested() for t in self.trees]}

    @classmethod
    def from_params(cls, hyperparams, seed, columns, fingerprint, params):
        return cls([Tree.from_nested(t) for t in params["trees"]], hyperparams, seed, columns, fingerprint)


def fit_decision_tree(train, hp: DecisionTreeParams = DecisionTreeParams(), seed: int = 0) -> DecisionTreeModel:
    X, y, columns, fingerprint = as_arrays(train)
    check_training(y)
    _single_class_warning(y)
    X = np.ascontiguousarray(X, dtype=np.float64)
    w = np.ones(X.shape[0])
    tree = grow_tree(X, y, w, np.arange(X.shape[0]), hp.max_depth, hp.min_samples_split)
    return DecisionTreeModel(tree, hp, seed, columns, fingerprint)


def features_per_split(hp: RandomForestParams, d: int) -> int:
    m = hp.features_per_split if hp.features_per_split is not None else int(round(np.sqrt(d)))
    return max(1, min(d, m))


def fit_random_forest(train, hp: RandomForestParams = RandomForestParams(), seed: int = 0) -> RandomForestModel:
    """Bagged CART trees; tree ``t`` draws from a generator seeded by ``(seed, t)``."""
    X, y, columns, fingerprint = as_arrays(train)
    check_training(y)
    _single_class_warning(y)
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    m = features_per_split(hp, d)
    trees = []
    for t in range(hp.n_trees):
        rng = np.random.default_rng([seed, t])
        if hp.bootstrap:
            w = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
            rows = np.flatnonzero(w)
        else:
            w = np.ones(n)
            rows = np.arange(n)
        trees.append(grow_tree(X, y, w, rows, hp.max_depth, hp.min_samples_split, m, rng))
    return RandomForestModel(trees, hp, seed, columns, fingerprint)
