"""Discrete AdaBoost over depth-1 stumps."""
import warnings

import numpy as np

from ..errors import DataWarning
from ..kernels import best_stump
from .base import AdaBoostParams, TrainedModel, as_arrays, check_training, logistic

# Error floor used to give a finite weight to a stump with zero training error.
_MIN_ERROR = 1e-10


class AdaBoostModel(TrainedModel):
    kind = "ada"

    def __init__(self, stumps, errors, constant, hyperparams, seed, columns, fingerprint):
        super().__init__(hyperparams, seed, columns, fingerprint)
        # stumps: list of (feature, threshold, polarity, alpha)
        self.stumps = [(int(f), float(t), int(s), float(a)) for f, t, s, a in stumps]
        self.errors = [float(e) for e in errors]
        self.constant = None if constant is None else float(constant)

    def margin(self, X, rounds=None) -> np.ndarray:
        """Weighted vote ``F(x) = sum_t alpha_t h_t(x)`` over the first ``rounds`` stumps."""
        X = self._matrix(X)
        return self._margin(X, self.stumps[:rounds])

    @staticmethod
    def _margin(X, stumps):
        F = np.zeros(X.shape[0])
        for f, t, s, a in stumps:
            F += a * np.where(X[:, f] <= t, s, -s)
        return F

    def _score(self, X):
        if self.constant is not None:
            return np.full(X.shape[0], self.constant)
        total = sum(a for *_, a in self.stumps)
        return logistic(2.0 * self._margin(X, self.stumps) / total)

    def params_dict(self):
        return {
            "stumps": [{"feature": f, "threshold": t, "polarity": s, "alpha": a} for f, t, s, a in self.stumps],
            "errors": self.errors,
            "constant": self.constant,
        }

    @classmethod
    def from_params(cls, hyperparams, seed, columns, fingerprint, params):
        stumps = [(s["feature"], s["threshold"], s["polarity"], s["alpha"]) for s in params["stumps"]]
        return cls(stumps, params["errors"], params["constant"], hyperparams, seed, columns, fingerprint)


def fit_adaboost(train, hp: AdaBoostParams = AdaBoostParams(), seed: int = 0) -> AdaBoostModel:
    """Boost stumps until ``n_rounds``, a stump with error >= 0.5, or a perfect stump."""
    X, y, columns, fingerprint = as_arrays(train)
    check_training(y)
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    ypm = np.where(y == 1, 1.0, -1.0)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable"), dtype=np.int64)
    w = np.full(n, 1.0 / n)
    stumps, errors = [], []
    for _ in range(hp.n_rounds):
        f, t, s, err = best_stump(X, order, ypm, w)
        if f < 0:
            break
        eps = err / w.sum()
        if eps >= 0.5:
            break
        perfect = eps <= 0.0
        e = max(eps, _MIN_ERROR)
        alpha = 0.5 * np.log((1.0 - e) / e)
        stumps.append((f, t, s, float(alpha)))
        errors.append(float(eps))
        if perfect:
            break
        h = np.where(X[:, f] <= t, s, -s)
        w = w * np.exp(-alpha * ypm * h)
        w /= w.sum()
    constant = None
    if not stumps:
        warnings.warn("no stump beats chance; fitting a constant model", DataWarning, stacklevel=2)
        constant = float(np.mean(y))
    return AdaBoostModel(stumps, errors, constant, hp, seed, columns, fingerprint)
