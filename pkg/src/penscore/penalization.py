"""Penalized Brier score (PBS) and penalized log loss (PLL).

Both rules add a fixed penalty to every misclassified row.  The penalty is
the largest score a correctly classified row can receive, so any correct row
scores at least as well as any wrong one:

* PBS penalty ``(c - 1) / c``, the Brier score of the uniform row;
* PLL penalty ``ln c``, the log loss of the uniform row.

A row is *wrong* when some class has strictly higher probability than the
true class.  Ties at the maximum that include the true class count as
correct.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from penscore.scoring import (
    NEGATIVE,
    DomainError,
    LabelBatch,
    PredictionBatch,
    ScoreReport,
    ScoringError,
    brier_score,
    check_pair,
    log_loss,
    LOG_FLOOR,
)

CORRECT = "correct"
WRONG = "wrong"


@dataclass(frozen=True, eq=False)
class PayoffVector:
    values: np.ndarray
    penalty: float

    @property
    def wrong(self) -> np.ndarray:
        return self.values > 0 if self.penalty > 0 else np.zeros(self.values.shape, bool)


def _payoff(q: np.ndarray, y: np.ndarray, penalty) -> np.ndarray:
    # row-wise: hot value, clipped excess of every class over it, sum > 0 -> penalty
    hot = np.sum(np.where(y == 1, q, y), axis=1)
    container = q - hot[:, None]
    container = np.where(container < 0, 0.0, container)
    container = np.sum(container, axis=1)
    penalty = np.broadcast_to(np.asarray(penalty, dtype=np.float64), container.shape)
    return np.where(container > 0, penalty, container)


def wrong_mask(q: PredictionBatch, y: LabelBatch) -> np.ndarray:
    """Boolean mask of rows where another class strictly beats the true class."""
    check_pair(q, y)
    return _payoff(q.values, y.values, 1.0) > 0


def penalizing(q: PredictionBatch, y: LabelBatch, penalty: float) -> PayoffVector:
    """Payoff vector: ``penalty`` for misclassified rows, 0 otherwise."""
    check_pair(q, y)
    if not penalty >= 0:
        raise DomainError(f"penalty must be >= 0, got {penalty}")
    wrong = _payoff(q.values, y.values, 1.0) > 0
    values = np.where(wrong, float(penalty), 0.0)
    values.setflags(write=False)
    return PayoffVector(values, float(penalty))


def is_correct(q_row, y_row) -> str:
    q_row = np.asarray(q_row, dtype=np.float64)
    y_row = np.asarray(y_row, dtype=np.float64)
    if q_row.shape != y_row.shape or q_row.ndim != 1:
        raise ScoringError("rows must be 1-D and of equal length")
    q = PredictionBatch(q_row[None, :])
    y = LabelBatch(y_row[None, :])
    return WRONG if wrong_mask(q, y)[0] else CORRECT


def bs_penalty(c: int) -> float:
    """Brier score of the uniform row, ``(c - 1) / c``."""
    if c < 2:
        raise DomainError(f"class count must be >= 2, got {c}")
    return (c - 1) / c


def ll_penalty(c: int) -> float:
    """Log loss of the uniform row, ``ln c``."""
    if c < 2:
        raise DomainError(f"class count must be >= 2, got {c}")
    return float(np.log(c))


def penalized_brier_score(
    q: PredictionBatch, y: LabelBatch, alg_form: bool = False
) -> ScoreReport:
    """Brier score plus ``(c - 1) / c`` on every wrong row.

    ``alg_form=True`` gives the class-averaged variant: squared error
    averaged over classes and penalty ``(c - 1) / c**2``.  That is exactly
    the default value divided by ``c``, so rankings do not change.
    """
    bs = brier_score(q, y).per_sample
    if alg_form:
        payoff = penalizing(q, y, (q.c - 1) / q.c**2)
        return ScoreReport.build("pbs_alg", NEGATIVE, bs / q.c + payoff.values)
    payoff = penalizing(q, y, bs_penalty(q.c))
    return ScoreReport.build("pbs", NEGATIVE, bs + payoff.values)


def penalized_log_loss(
    q: PredictionBatch, y: LabelBatch, eps: float = LOG_FLOOR, alg_form: bool = False
) -> ScoreReport:
    """Log loss plus ``ln c`` on every wrong row.

    The log loss has no class averaging, so ``alg_form`` only changes the
    report name; its penalty keeps the positive sign that makes the rule
    negatively oriented.
    """
    ll = log_loss(q, y, eps=eps)
    payoff = penalizing(q, y, ll_penalty(q.c))
    name, flags = ("pll_alg", ll.flags + ("sign-corrected",)) if alg_form else ("pll", ll.flags)
    return ScoreReport.build(name, NEGATIVE, ll.per_sample + payoff.values, flags)


SCORING_RULES = {
    "bs": brier_score,
    "ll": log_loss,
    "pbs": penalized_brier_score,
    "pll": penalized_log_loss,
}
