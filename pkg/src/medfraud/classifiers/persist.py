"""Versioned JSON model documents.

Floats are written with ``repr``-exact decimal renderings, so a loaded model
scores bit-identically to the one that was saved.
"""
import io
import json
import os

from ..errors import CorruptModelError, FingerprintMismatchError, VersionMismatchError
from .adaboost import AdaBoostModel
from .base import make_params
from .knn import KNNModel
from .lda import LDAModel
from .tree import DecisionTreeModel, RandomForestModel

MODEL_FORMAT = "medfraud.model"
MODEL_VERSION = 1

MODEL_TYPES = {
    "dt": DecisionTreeModel,
    "rf": RandomForestModel,
    "knn": KNNModel,
    "lda": LDAModel,
    "ada": AdaBoostModel,
}


def model_document(model) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "hyperparams": model.hyperparams_dict(),
        "seed": model.seed,
        "columns": None if model.columns is None else list(model.columns),
        "fitstate_fingerprint": model.fingerprint,
        "params": model.params_dict(),
    }


def dumps_model(model) -> str:
    return json.dumps(model_document(model), sort_keys=True, separators=(",", ":"), allow_nan=False)


def save_model(model, sink) -> None:
    """Write ``model`` to a path or a text stream."""
    text = dumps_model(model)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)


def loads_model(text: str, expected_fingerprint=None):
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, RecursionError) as exc:
        raise CorruptModelError(f"model document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise CorruptModelError("not a medfraud model document")
    if doc.get("version") != MODEL_VERSION:
        raise VersionMismatchError(
            f"model document version {doc.get('version')!r}, this build reads version {MODEL_VERSION}")
    fingerprint = doc.get("fitstate_fingerprint")
    if expected_fingerprint is not None and fingerprint != expected_fingerprint:
        raise FingerprintMismatchError(
            f"model trained under FitState {str(fingerprint)[:12]}, expected {expected_fingerprint[:12]}")
    try:
        cls = MODEL_TYPES[doc["kind"]]
        hp = make_params(doc["kind"], doc["hyperparams"])
        return cls.from_params(hp, doc["seed"], doc["columns"], fingerprint, doc["params"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptModelError(f"malformed model document: {exc!r}") from None


def load_model(source, expected_fingerprint=None):
    """Read a model from a path or text stream, optionally pinning its FitState fingerprint."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        raise TypeError(f"cannot read a model from {type(source).__name__}")
    return loads_model(text, expected_fingerprint)
