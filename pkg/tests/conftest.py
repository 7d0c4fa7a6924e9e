import warnings

import numpy as np
import pytest

from medfraud.errors import DataWarning
from medfraud.features import LabeledDataset


def make_dataset(X, y, fingerprint=None):
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    return LabeledDataset(X, np.asarray(y), [f"x{j}" for j in range(d)],
                          [f"c{i}" for i in range(n)], [f"p{i % 7}" for i in range(n)], fingerprint)


def blobs(rng, n0, n1, d=4, sep=3.0):
    X = np.vstack([rng.normal(size=(n0, d)), rng.normal(size=(n1, d)) + sep / np.sqrt(d)])
    y = np.r_[np.zeros(n0, int), np.ones(n1, int)]
    return X, y


SMALL_SYNTH = {"n_beneficiaries": 600, "n_providers": 60, "n_claims": 2500,
               "n_diagnosis_codes": 300, "n_procedure_codes": 80}


@pytest.fixture(scope="session")
def small_run(tmp_path_factory):
    """A complete synth -> prep -> train -> eval run on a small config."""
    from medfraud import pipeline as P

    out = tmp_path_factory.mktemp("run")
    cfg = P.load_config(overrides={"out": str(out), "synth": SMALL_SYNTH,
                                   "hyperparams": {"rf": {"n_trees": 15}, "ada": {"n_rounds": 30}}},
                        env={})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DataWarning)
        P.run_synth(cfg)
        P.run_prep(cfg)
        P.run_train(cfg)
        P.run_eval(cfg)
    return cfg
