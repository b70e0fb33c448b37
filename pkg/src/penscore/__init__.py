"""Penalized Brier score and penalized log loss.

Superior variants of the Brier score and log loss: every misclassified row
gets a fixed penalty, so a correct prediction always scores better than a
wrong one.
"""

from penscore.penalization import (
    bs_penalty,
    is_correct,
    ll_penalty,
    penalized_brier_score,
    penalized_log_loss,
    penalizing,
)
from penscore.scoring import (
    LabelBatch,
    PredictionBatch,
    ScoreReport,
    accuracy,
    brier_score,
    log_loss,
    macro_f1,
    mean_score,
    pearson_corr,
)

__version__ = "0.1.0"

__all__ = [
    "LabelBatch", "PredictionBatch", "ScoreReport",
    "accuracy", "brier_score", "log_loss", "macro_f1", "mean_score", "pearson_corr",
    "bs_penalty", "is_correct", "ll_penalty", "penalized_brier_score", "penalized_log_loss",
    "penalizing",
]
