"""Two-class linear discriminant analysis with a pooled covariance."""
import numpy as np
from scipy import linalg

from .base import LDAParams, TrainedModel, as_arrays, check_training, logistic


class SingularCovarianceError(ValueError):
    pass


class LDAModel(TrainedModel):
    kind = "lda"

    def __init__(self, means, priors, coef, intercept, hyperparams, seed, columns, fingerprint):
        super().__init__(hyperparams, seed, columns, fingerprint)
        self.means = np.asarray(means, dtype=np.float64)
        self.priors = np.asarray(priors, dtype=np.float64)
        # discriminant difference delta_1(x) - delta_0(x) = x @ coef + intercept
        self.coef = np.asarray(coef, dtype=np.float64)
        self.intercept = float(intercept)

    def decision_function(self, X) -> np.ndarray:
        return self._matrix(X) @ self.coef + self.intercept

    def _score(self, X):
        return logistic(X @ self.coef + self.intercept)

    def params_dict(self):
        return {"means": self.means.tolist(), "priors": self.priors.tolist(),
                "coef": self.coef.tolist(), "intercept": self.intercept}

    @classmethod
    def from_params(cls, hyperparams, seed, columns, fingerprint, params):
        return cls(params["means"], params["priors"], params["coef"], params["intercept"],
                   hyperparams, seed, columns, fingerprint)


def pooled_covariance(X, y) -> np.ndarray:
    """Within-class scatter summed over both classes, divided by ``n - 2``."""
    d = X.shape[1]
    scatter = np.zeros((d, d))
    for c in (0, 1):
        Z = X[y == c] - X[y == c].mean(axis=0)
        scatter += Z.T @ Z
    return scatter / (X.shape[0] - 2)


def fit_lda(train, hp: LDAParams = LDAParams(), seed: int = 0) -> LDAModel:
    X, y, columns, fingerprint = as_arrays(train)
    check_training(y)
    X = np.asarray(X, dtype=np.float64)
    n1 = int((y == 1).sum())
    n0 = len(y) - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("LDA needs both classes present")
    if len(y) < 3:
        raise ValueError("LDA needs at least 3 rows to pool a covariance")
    mu0 = X[y == 0].mean(axis=0)
    mu1 = X[y == 1].mean(axis=0)
    sigma = pooled_covariance(X, y) + hp.ridge * np.eye(X.shape[1])
    if hp.ridge == 0:
        eig = np.linalg.eigvalsh(sigma)
        if not eig[0] > eig[-1] * X.shape[1] * np.finfo(float).eps:
            raise SingularCovarianceError("pooled covariance is singular; use ridge > 0")
    try:
        factor = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError:
        raise SingularCovarianceError("pooled covariance is not positive definite; use ridge > 0") from None
    w0 = linalg.cho_solve(factor, mu0)
    w1 = linalg.cho_solve(factor, mu1)
    priors = np.array([n0 / len(y), n1 / len(y)])
    coef = w1 - w0
    intercept = (-0.5 * (mu1 @ w1) + np.log(priors[1])) - (-0.5 * (mu0 @ w0) + np.log(priors[0]))
    return LDAModel([mu0, mu1], priors, coef, intercept, hp, seed, columns, fingerprint)
