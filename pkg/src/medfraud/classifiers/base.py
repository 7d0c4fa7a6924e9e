"""Uniform fit/score/predict contract shared by the five model kinds."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from ..errors import FingerprintMismatchError
from ..features import LabeledDataset


def logistic(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class DecisionTreeParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")


@dataclass(frozen=True)
class RandomForestParams:
    n_trees: int = 100
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    features_per_split: Optional[int] = None  # None -> round(sqrt(d))
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be positive")
        DecisionTreeParams(self.max_depth, self.min_samples_split)


@dataclass(frozen=True)
class KNNParams:
    k: int = 5

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"k must be an odd positive integer, got {self.k}")


@dataclass(frozen=True)
class LDAParams:
    ridge: float = 1e-6

    def __post_init__(self):
        if not self.ridge >= 0:
            raise ValueError("ridge must be non-negative")


@dataclass(frozen=True)
class AdaBoostParams:
    n_rounds: int = 100

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be positive")


PARAM_TYPES = {
    "dt": DecisionTreeParams,
    "rf": RandomForestParams,
    "knn": KNNParams,
    "lda": LDAParams,
    "ada": AdaBoostParams,
}


def make_params(kind: str, values: Optional[dict] = None):
    cls = PARAM_TYPES[kind]
    values = values or {}
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown {kind} hyperparameters: {sorted(unknown)}")
    return cls(**values)


def as_arrays(data):
    """``(X, y, columns, fingerprint)`` from a LabeledDataset or a bare matrix."""
    if isinstance(data, LabeledDataset):
        return data.X, data.y, data.columns, data.fingerprint
    return np.asarray(data, dtype=np.float64), None, None, None


def check_training(y) -> None:
    if y is None:
        raise ValueError("training data must carry labels")
    if len(y) < 2:
        raise ValueError("need at least 2 training rows")


class TrainedModel:
    """A fitted classifier. ``score`` is P(fraud) in [0, 1]; ``predict`` thresholds it at 0.5."""

    kind = ""

    def __init__(self, hyperparams, seed: int, columns, fingerprint: Optional[str]):
        self.hyperparams = hyperparams
        self.seed = int(seed)
        self.columns = None if columns is None else tuple(columns)
        self.fingerprint = fingerprint

    def _matrix(self, data) -> np.ndarray:
        X, _, columns, fingerprint = as_arrays(data)
        if columns is not None and self.columns is not None and tuple(columns) != self.columns:
            raise ValueError("feature columns differ from the columns the model was trained on")
        if fingerprint is not None and self.fingerprint is not None and fingerprint != self.fingerprint:
            raise FingerprintMismatchError(
                f"matrix built with FitState {fingerprint[:12]} but model trained under {self.fingerprint[:12]}")
        if X.ndim != 2 or (self.columns is not None and X.shape[1] != len(self.columns)):
            raise ValueError(f"expected a 2-D matrix with {len(self.columns or ())} columns, got {X.shape}")
        return np.ascontiguousarray(X, dtype=np.float64)

    def score(self, data) -> np.ndarray:
        return self._score(self._matrix(data))

    def predict(self, data) -> np.ndarray:
        return (self.score(data) >= 0.5).astype(np.int64)

    def _score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # persistence hooks
    def params_dict(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_params(cls, hyperparams, seed, columns, fingerprint, params: dict):
        raise NotImplementedError

    def hyperparams_dict(self) -> dict:
        return asdict(self.hyperparams)
