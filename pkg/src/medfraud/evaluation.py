"""Confusion matrices, threshold metrics, ROC/AUC and descriptive statistics."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional

import numpy as np

from .errors import FingerprintMismatchError
from .kernels import welford

QUANTILES = (1, 5, 25, 50, 75, 95, 99)
HISTOGRAM_BINS = 40


def round3(x: float) -> float:
    """Round half-to-even at 3 decimals on the shortest decimal rendering of ``x``."""
    return float(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def as_dict(self) -> dict:
        return asdict(self)


def _binary(v, name):
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if a.size and not np.isin(a, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 values")
    return a.astype(np.int64)


def confusion(y_true, y_pred) -> ConfusionMatrix:
    t = _binary(y_true, "y_true")
    p = _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise ValueError(f"length mismatch: {t.shape[0]} labels vs {p.shape[0]} predictions")
    return ConfusionMatrix(
        tp=int(((t == 1) & (p == 1)).sum()),
        tn=int(((t == 0) & (p == 0)).sum()),
        fp=int(((t == 0) & (p == 1)).sum()),
        fn=int(((t == 1) & (p == 0)).sum()),
    )


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    flags: tuple = ()

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
                "f1": self.f1, "flags": list(self.flags)}

    def rounded(self) -> tuple:
        return tuple(round3(v) for v in (self.accuracy, self.precision, self.recall, self.f1))


def metrics(cm: ConfusionMatrix) -> MetricSet:
    """Accuracy, precision, recall and F1 with fraud as the positive class.

    Zero denominators yield 0.0 and add a flag (``precision_undefined``,
    ``recall_undefined``, ``f1_undefined``).
    """
    n = cm.total
    if n <= 0:
        raise ValueError("confusion matrix is empty")
    flags = []
    if cm.tp + cm.fp:
        precision = cm.tp / (cm.tp + cm.fp)
    else:
        precision = 0.0
        flags.append("precision_undefined")
    if cm.tp + cm.fn:
        recall = cm.tp / (cm.tp + cm.fn)
    else:
        recall = 0.0
        flags.append("recall_undefined")
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
        flags.append("f1_undefined")
    return MetricSet((cm.tp + cm.tn) / n, precision, recall, f1, tuple(flags))


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fpr", "tpr"])
        w.writerows([repr(float(a)), repr(float(b))] for a, b in zip(self.fpr, self.tpr))
        return buf.getvalue()


def roc(y_true, scores) -> RocCurve:
    """ROC points swept over distinct scores, highest first; tied scores form one step.

    The area is accumulated from integer counts, so it equals the Mann-Whitney
    statistic ``P(s+ > s-) + 0.5 P(s+ = s-)`` up to one final division.
    """
    y = _binary(y_true, "y_true")
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape:
        raise ValueError("labels and scores differ in length")
    P = int(y.sum())
    N = y.size - P
    if P == 0 or N == 0:
        raise ValueError("ROC needs at least one positive and one negative")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    ends = np.append(np.flatnonzero(np.diff(s_sorted) != 0), y.size - 1)
    tps = np.concatenate([[0], np.cumsum(y_sorted)[ends]])
    fps = np.concatenate([[0], ends + 1]) - tps
    area2 = int(np.sum(np.diff(fps) * (tps[1:] + tps[:-1])))
    return RocCurve(
        fpr=fps / N,
        tpr=tps / P,
        thresholds=np.concatenate([[np.inf], s_sorted[ends]]),
        auc=area2 / (2 * P * N),
    )


def trapezoid_area(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


@dataclass
class ColumnStats:
    count: int
    mean: float
    std: Optional[float]
    min: float
    quantiles: dict
    max: float
    hist_edges: list
    hist_counts: list

    def as_dict(self) -> dict:
        return asdict(self)


def describe(values, bins: int = HISTOGRAM_BINS) -> ColumnStats:
    """Count, mean, sample std (N-1), extremes, quantiles and a histogram.

    Quantiles interpolate linearly between order statistics. ``std`` is None
    for a single value.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot describe an empty column")
    if not np.isfinite(x).all():
        raise ValueError("column contains non-finite values")
    n, mean, m2 = welford(x)
    std = float(np.sqrt(max(m2, 0.0) / (n - 1))) if n > 1 else None
    qs = np.quantile(x, [q / 100 for q in QUANTILES])
    counts, edges = np.histogram(x, bins=bins)
    return ColumnStats(
        count=n, mean=mean, std=std, min=float(x.min()),
        quantiles={f"p{q}": float(v) for q, v in zip(QUANTILES, qs)},
        max=float(x.max()), hist_edges=edges.tolist(), hist_counts=counts.tolist(),
    )


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------

@dataclass
class SplitResult:
    confusion: ConfusionMatrix
    metrics: MetricSet
    class_counts: dict

    def as_dict(self) -> dict:
        return {"confusion": self.confusion.as_dict(), "metrics": self.metrics.as_dict(),
                "class_counts": {str(k): v for k, v in self.class_counts.items()}}


@dataclass
class ModelResult:
    kind: str
    name: str
    train: SplitResult
    validation: SplitResult
    roc: RocCurve

    def as_dict(self) -> dict:
        return {
            "kind": self.kind, "name": self.name,
            "train": self.train.as_dict(), "validation": self.validation.as_dict(),
            "roc": {"auc": self.roc.auc, "fpr": self.roc.fpr.tolist(), "tpr": self.roc.tpr.tolist()},
        }


@dataclass
class EvalReport:
    results: dict
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        doc = {"metadata": self.metadata,
               "models": {k: r.as_dict() for k, r in self.results.items()}}
        return json.dumps(doc, sort_keys=True, indent=1)

    def metrics_csv(self) -> str:
        """One Train and one Validation row per model, 3 decimals."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["Model", "Metric", "Accuracy", "Precision", "Recall", "F1-Score", "AUC"])
        for r in self.results.values():
            for label, split, auc in (("Train", r.train, ""), ("Validation", r.validation, r.roc.auc)):
                vals = [f"{v:.3f}" for v in split.metrics.rounded()]
                w.writerow([r.name, label, *vals, "" if auc == "" else f"{round3(auc):.3f}"])
        return buf.getvalue()


def _split_result(model, data) -> tuple:
    scores = model.score(data)
    pred = (scores >= 0.5).astype(np.int64)
    cm = confusion(data.y, pred)
    return SplitResult(cm, metrics(cm), data.class_counts()), scores


def evaluate(models: dict, train, validation, names: Optional[dict] = None,
             expected_validation_counts: Optional[dict] = None, metadata: Optional[dict] = None) -> EvalReport:
    """Score every model on both splits; ROC on validation only.

    ``expected_validation_counts`` (class -> rows) asserts the validation split
    was not touched by resampling.
    """
    if expected_validation_counts is not None:
        got = validation.class_counts()
        want = {int(k): int(v) for k, v in expected_validation_counts.items()}
        if got != want:
            raise AssertionError(f"validation class counts {got} differ from the split's {want}")
    results = {}
    for kind, model in models.items():
        for data in (train, validation):
            if data.fingerprint and model.fingerprint and data.fingerprint != model.fingerprint:
                raise FingerprintMismatchError(f"model {kind!r} was trained under a different FitState")
        tr, _ = _split_result(model, train)
        va, scores = _split_result(model, validation)
        results[kind] = ModelResult(kind, (names or {}).get(kind, kind), tr, va, roc(validation.y, scores))
    return EvalReport(results, dict(metadata or {}))
