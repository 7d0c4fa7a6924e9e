"""Class-balancing operators for the training split.

All operators keep original rows first and in their original order; new rows
are appended. Randomness is derived from ``plan.seed`` (and the row index for
SMOTE), so results do not depend on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .features import LabeledDataset
from .kernels import knn_search

SMOTE = "smote"
SMOTE_ENN = "smote-enn"
ROS = "ros"
RUS = "rus"
NONE = "none"
METHODS = (SMOTE, SMOTE_ENN, ROS, RUS, NONE)

SYNTHETIC_PREFIX = "synthetic:"


@dataclass(frozen=True)
class ResamplePlan:
    method: str = SMOTE
    k_neighbors: int = 5
    target_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown resampling method {self.method!r}; expected one of {METHODS}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be positive")
        if not 0 < self.target_ratio <= 1:
            raise ValueError("target_ratio must lie in (0, 1]")

    def as_dict(self) -> dict:
        return asdict(self)


class ResampleError(ValueError):
    pass


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _classes(ds: LabeledDataset):
    """(minority label, majority label, minority count, majority count)."""
    n1 = int((ds.y == 1).sum())
    n0 = len(ds) - n1
    if n0 == 0 or n1 == 0:
        raise ResampleError("resampling needs both classes present")
    # Fraud (1) is treated as the minority when the classes are level.
    if n1 <= n0:
        return 1, 0, n1, n0
    return 0, 1, n0, n1


def oversample_target(minority: int, majority: int, ratio: float) -> int:
    """Minority row count after oversampling: ``round(ratio * majority)``, never fewer than now."""
    return max(minority, _round_half_up(ratio * majority))


def _append(ds: LabeledDataset, X_new, label, ids) -> LabeledDataset:
    n = len(X_new)
    return LabeledDataset(
        X=np.vstack([ds.X, X_new]) if n else ds.X.copy(),
        y=np.concatenate([ds.y, np.full(n, label, dtype=np.int64)]),
        columns=ds.columns,
        claim_ids=np.concatenate([ds.claim_ids, np.asarray(ids, dtype=object)]),
        providers=np.concatenate([ds.providers, np.full(n, "", dtype=object)]),
        fingerprint=ds.fingerprint,
    )


def smote(train: LabeledDataset, plan: ResamplePlan) -> LabeledDataset:
    """Append interpolated minority rows until the target ratio is reached.

    The synthetic budget is spread evenly over minority rows; the leftover
    ``budget % m`` extra rows go to a seeded random subset. Row ``i`` then uses
    its own generator seeded by ``(seed, i)`` to pick neighbours among its
    ``k`` nearest minority rows and the interpolation weights.
    """
    minority, _, n_min, n_maj = _classes(train)
    budget = oversample_target(n_min, n_maj, plan.target_ratio) - n_min
    if budget <= 0:
        return train
    if n_min < plan.k_neighbors + 1:
        raise ResampleError(
            f"SMOTE with k={plan.k_neighbors} needs at least {plan.k_neighbors + 1} minority rows, "
            f"found {n_min}")
    rows = np.flatnonzero(train.y == minority)
    Xm = train.X[rows]
    nbrs, _ = knn_search(Xm, Xm, plan.k_neighbors, exclude_self=True)

    per_row = np.full(n_min, budget // n_min, dtype=np.int64)
    extra = budget % n_min
    if extra:
        chosen = np.random.default_rng([plan.seed, n_min]).choice(n_min, size=extra, replace=False)
        per_row[np.sort(chosen)] += 1

    out = np.empty((budget, train.X.shape[1]))
    pos = 0
    for i in np.flatnonzero(per_row):
        m = int(per_row[i])
        rng = np.random.default_rng([plan.seed, int(i)])
        pick = nbrs[i, rng.integers(0, plan.k_neighbors, size=m)]
        lam = rng.random(m)[:, None]
        out[pos:pos + m] = Xm[i] + lam * (Xm[pick] - Xm[i])
        pos += m
    ids = [f"{SYNTHETIC_PREFIX}{j}" for j in range(budget)]
    return _append(train, out, minority, ids)


def enn_clean(ds: LabeledDataset, k: int = 3) -> LabeledDataset:
    """Drop rows whose label differs from the strict majority of their k neighbours."""
    if not 1 <= k < len(ds):
        raise ResampleError(f"ENN needs 1 <= k < n (k={k}, n={len(ds)})")
    nbrs, _ = knn_search(ds.X, ds.X, k, exclude_self=True)
    agree = (ds.y[nbrs] == ds.y[:, None]).sum(axis=1)
    keep = np.flatnonzero(2 * agree >= k)
    return ds.subset(keep)


def smote_enn(train: LabeledDataset, plan: ResamplePlan) -> LabeledDataset:
    return enn_clean(smote(train, plan), plan.k_neighbors)


def random_oversample(train: LabeledDataset, plan: ResamplePlan) -> LabeledDataset:
    minority, _, n_min, n_maj = _classes(train)
    budget = oversample_target(n_min, n_maj, plan.target_ratio) - n_min
    if budget <= 0:
        return train
    rows = np.flatnonzero(train.y == minority)
    draw = rows[np.random.default_rng(plan.seed).integers(0, n_min, size=budget)]
    return _append(train, train.X[draw], minority, train.claim_ids[draw])


def random_undersample(train: LabeledDataset, plan: ResamplePlan) -> LabeledDataset:
    minority, majority, n_min, n_maj = _classes(train)
    keep_maj = _round_half_up(n_min / plan.target_ratio)
    if keep_maj >= n_maj:
        return train
    if keep_maj < 1:
        raise ResampleError("undersampling target would remove every majority row")
    maj_rows = np.flatnonzero(train.y == majority)
    kept = np.random.default_rng(plan.seed).choice(maj_rows, size=keep_maj, replace=False)
    keep = np.sort(np.concatenate([np.flatnonzero(train.y == minority), kept]))
    return train.subset(keep)


def resample(train: LabeledDataset, plan: ResamplePlan) -> LabeledDataset:
    if plan.method == NONE:
        return train
    if plan.method == SMOTE:
        return smote(train, plan)
    if plan.method == SMOTE_ENN:
        return smote_enn(train, plan)
    if plan.method == ROS:
        return random_oversample(train, plan)
    return random_undersample(train, plan)
