"""Probability batches and the classical classification metrics.

All scores here are computed per sample and then averaged.  Brier score and
log loss are negatively oriented (lower is better); accuracy and macro-F1
are positively oriented.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SIMPLEX_TOL = 1e-9
LOG_FLOOR = 1e-15

NEGATIVE = "negatively-oriented"
POSITIVE = "positively-oriented"


class ScoringError(ValueError):
    """Base class for invalid inputs to the metric functions."""


class ShapeError(ScoringError):
    pass


class SimplexError(ScoringError):
    """Rows that are not probability vectors (or not one-hot labels)."""

    def __init__(self, message: str, rows: Sequence[int] = ()):
        super().__init__(message)
        self.rows = list(rows)


class DomainError(ScoringError):
    pass


class EmptyInputError(ScoringError):
    pass


class UndefinedCorrelationError(ScoringError):
    pass


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=np.float64, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class PredictionBatch:
    """An ``n x c`` matrix whose rows lie on the probability simplex.

    Construction validates the rows.  Pass ``renormalize=True`` to divide
    each row by its sum instead of rejecting rows that drift off the simplex.
    """

    values: np.ndarray

    def __init__(self, values, renormalize: bool = False, tol: float = SIMPLEX_TOL):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"predictions must be 2-D, got shape {arr.shape}")
        n, c = arr.shape
        if n < 1 or c < 2:
            raise ShapeError(f"need n >= 1 and c >= 2, got n={n}, c={c}")
        if not np.all(np.isfinite(arr)):
            bad = np.flatnonzero(~np.all(np.isfinite(arr), axis=1))
            raise SimplexError("non-finite probabilities", bad)
        if renormalize:
            neg = np.flatnonzero(np.any(arr < 0, axis=1))
            sums = arr.sum(axis=1)
            if neg.size or np.any(sums <= 0):
                bad = np.union1d(neg, np.flatnonzero(sums <= 0))
                raise SimplexError("rows cannot be renormalized", bad)
            arr = arr / sums[:, None]
        bad_entry = np.any((arr < 0) | (arr > 1), axis=1)
        bad_sum = np.abs(arr.sum(axis=1) - 1.0) > tol
        bad = np.flatnonzero(bad_entry | bad_sum)
        if bad.size:
            raise SimplexError(
                f"{bad.size} row(s) off the probability simplex (tol={tol:g})", bad
            )
        object.__setattr__(self, "values", _frozen(arr))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def c(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class LabelBatch:
    """One-hot ground truth, ``n x c``."""

    values: np.ndarray

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"labels must be 2-D, got shape {arr.shape}")
        n, c = arr.shape
        if n < 1 or c < 2:
            raise ShapeError(f"need n >= 1 and c >= 2, got n={n}, c={c}")
        binary = np.all((arr == 0) | (arr == 1), axis=1)
        bad = np.flatnonzero(~binary | (arr.sum(axis=1) != 1))
        if bad.size:
            raise SimplexError(f"{bad.size} label row(s) are not one-hot", bad)
        object.__setattr__(self, "values", _frozen(arr))

    @classmethod
    def from_classes(cls, classes, c: int) -> "LabelBatch":
        idx = np.asarray(classes)
        if idx.ndim != 1:
            raise ShapeError("class indices must be 1-D")
        if not np.issubdtype(idx.dtype, np.integer):
            if not np.all(np.mod(idx, 1) == 0):
                raise SimplexError("class indices must be integers")
            idx = idx.astype(np.int64)
        bad = np.flatnonzero((idx < 0) | (idx >= c))
        if bad.size:
            raise SimplexError(f"class index out of range 0..{c - 1}", bad)
        onehot = np.zeros((idx.size, c))
        onehot[np.arange(idx.size), idx] = 1.0
        return cls(onehot)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def c(self) -> int:
        return self.values.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.argmax(self.values, axis=1)


@dataclass(frozen=True, eq=False)
class ScoreReport:
    metric_name: str
    orientation: str
    per_sample: np.ndarray
    mean: float
    flags: tuple[str, ...] = field(default=())

    @classmethod
    def build(cls, name: str, orientation: str, per_sample, flags=()) -> "ScoreReport":
        per_sample = _frozen(np.asarray(per_sample, dtype=np.float64).ravel())
        if per_sample.size == 0:
            raise EmptyInputError("empty score report")
        return cls(name, orientation, per_sample, float(np.mean(per_sample)), tuple(flags))

    @property
    def n(self) -> int:
        return self.per_sample.size


def check_pair(q: PredictionBatch, y: LabelBatch) -> None:
    if q.values.shape != y.values.shape:
        raise ShapeError(
            f"predictions {q.values.shape} and labels {y.values.shape} differ in shape"
        )


def true_class_probability(q: PredictionBatch, y: LabelBatch) -> np.ndarray:
    """The "hot value" of each row: predicted probability of the true class."""
    check_pair(q, y)
    return q.values[np.arange(q.n), y.classes]


def brier_score(q: PredictionBatch, y: LabelBatch) -> ScoreReport:
    """Sum of squared differences to the one-hot label, per row."""
    check_pair(q, y)
    per_sample = np.sum((q.values - y.values) ** 2, axis=1)
    return ScoreReport.build("bs", NEGATIVE, per_sample)


def log_loss(q: PredictionBatch, y: LabelBatch, eps: float = LOG_FLOOR) -> ScoreReport:
    """Negative natural log of the true-class probability.

    Only the true-class entry is read, so zeros elsewhere in a row are fine.
    A true-class probability below ``eps`` is clamped to ``eps`` and the
    report carries the ``"clamped"`` flag.
    """
    hot = true_class_probability(q, y)
    flags = ("clamped",) if np.any(hot < eps) else ()
    per_sample = -np.log(np.maximum(hot, eps))
    return ScoreReport.build("ll", NEGATIVE, per_sample, flags)


def predicted_classes(q: PredictionBatch, y: LabelBatch) -> np.ndarray:
    """Argmax with lowest-index tie-break, except that a tie which includes
    the true class resolves to the true class."""
    check_pair(q, y)
    pred = np.argmax(q.values, axis=1)
    hot = true_class_probability(q, y)
    tied_true = hot >= q.values.max(axis=1)
    return np.where(tied_true, y.classes, pred)


def accuracy(q: PredictionBatch, y: LabelBatch) -> float:
    return float(np.mean(predicted_classes(q, y) == y.classes))


def confusion_matrix(true: np.ndarray, pred: np.ndarray, c: int) -> np.ndarray:
    cm = np.zeros((c, c), dtype=np.int64)
    np.add.at(cm, (true, pred), 1)
    return cm


def macro_f1(q: PredictionBatch, y: LabelBatch) -> float:
    """Unweighted mean of per-class F1 over all ``c`` classes.

    A class that is neither present nor predicted contributes 0.
    """
    cm = confusion_matrix(y.classes, predicted_classes(q, y), q.c)
    tp = np.diag(cm).astype(np.float64)
    # 2PR/(P+R) == 2tp / (2tp + fp + fn); defined as 0 when the class is absent
    denom = cm.sum(axis=0) + cm.sum(axis=1)
    f1 = np.divide(2 * tp, denom, out=np.zeros(q.c), where=denom > 0)
    return float(np.mean(f1))


def pearson_corr(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ShapeError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise UndefinedCorrelationError("need at least two points")
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt(np.dot(da, da))
    sb = np.sqrt(np.dot(db, db))
    if sa == 0 or sb == 0:
        raise UndefinedCorrelationError("zero variance input")
    return float(np.clip(np.dot(da, db) / (sa * sb), -1.0, 1.0))


def mean_score(scores: ScoreReport) -> float:
    if scores.per_sample.size == 0:
        raise EmptyInputError("empty score report")
    return float(np.mean(scores.per_sample))
