import numpy as np

from ..kernels import knn_search
from .base import KNNParams, TrainedModel, as_arrays, check_training


class KNNModel(TrainedModel):
    """Exact Euclidean k-NN over the stored training matrix."""

    kind = "knn"

    def __init__(self, X, y, hyperparams, seed, columns, fingerprint):
        super().__init__(hyperparams, seed, columns, fingerprint)
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)

    def neighbors(self, X) -> np.ndarray:
        idx, _ = knn_search(self._matrix(X), self.X, self.hyperparams.k)
        return idx

    def _score(self, X):
        idx, _ = knn_search(X, self.X, self.hyperparams.k)
        return self.y[idx].sum(axis=1) / self.hyperparams.k

    def params_dict(self):
        return {"X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_params(cls, hyperparams, seed, columns, fingerprint, params):
        X = np.array(params["X"], dtype=np.float64).reshape(len(params["y"]), -1)
        return cls(X, params["y"], hyperparams, seed, columns, fingerprint)


def fit_knn(train, hp: KNNParams = KNNParams(), seed: int = 0) -> KNNModel:
    X, y, columns, fingerprint = as_arrays(train)
    check_training(y)
    if hp.k >= len(y):
        raise ValueError(f"k={hp.k} must be smaller than the training size {len(y)}")
    return KNNModel(X, y, hp, seed, columns, fingerprint)
