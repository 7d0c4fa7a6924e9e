"""From-scratch classifiers behind one fit/score/predict contract."""
from .adaboost import AdaBoostModel, fit_adaboost
from .base import (
    AdaBoostParams, DecisionTreeParams, KNNParams, LDAParams, RandomForestParams,
    TrainedModel, logistic, make_params,
)
from .knn import KNNModel, fit_knn
from .lda import LDAModel, SingularCovarianceError, fit_lda
from .persist import dumps_model, load_model, loads_model, save_model
from .tree import DecisionTreeModel, RandomForestModel, Tree, fit_decision_tree, fit_random_forest

MODEL_KINDS = ("rf", "knn", "lda", "dt", "ada")

MODEL_NAMES = {
    "rf": "Random Forest",
    "knn": "KNN",
    "lda": "LDA",
    "dt": "Decision Tree",
    "ada": "AdaBoost",
}

_FITTERS = {
    "dt": fit_decision_tree,
    "rf": fit_random_forest,
    "knn": fit_knn,
    "lda": fit_lda,
    "ada": fit_adaboost,
}


def fit_model(kind: str, train, hyperparams=None, seed: int = 0) -> TrainedModel:
    """Fit one model kind with hyperparameters given as a dict (or params object)."""
    if kind not in _FITTERS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    hp = hyperparams if hyperparams is not None and not isinstance(hyperparams, dict) \
        else make_params(kind, hyperparams)
    return _FITTERS[kind](train, hp, seed)


__all__ = [
    "AdaBoostModel", "AdaBoostParams", "DecisionTreeModel", "DecisionTreeParams", "KNNModel",
    "KNNParams", "LDAModel", "LDAParams", "MODEL_KINDS", "MODEL_NAMES", "RandomForestModel",
    "RandomForestParams", "SingularCovarianceError", "TrainedModel", "Tree", "dumps_model",
    "fit_adaboost", "fit_decision_tree", "fit_knn", "fit_lda", "fit_model", "fit_random_forest",
    "load_model", "loads_model", "logistic", "make_params", "save_model",
]
