"""Metric-driven checkpoint selection, early stopping and the h-block benchmark."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from penscore.harness.data import (
    BlockSplit,
    SegmentSet,
    TimeSeriesDataset,
    segment_blocks,
)
from penscore.harness.model import (
    HyperParams,
    Standardizer,
    forward,
    init_params,
    sgd_epoch,
)
from penscore.penalization import penalized_brier_score, penalized_log_loss
from penscore.scoring import (
    DomainError,
    LabelBatch,
    PredictionBatch,
    UndefinedCorrelationError,
    brier_score,
    log_loss,
    macro_f1,
    pearson_corr,
)

METRICS = ("f1", "bs", "pbs", "ll", "pll")
POSITIVE_METRICS = ("f1",)
CONTINUE, STOP = "continue", "stop"


def evaluate(probs: np.ndarray, labels: np.ndarray) -> dict:
    q = PredictionBatch(probs)
    y = LabelBatch(labels)
    return {
        "f1": macro_f1(q, y),
        "bs": brier_score(q, y).mean,
        "pbs": penalized_brier_score(q, y).mean,
        "ll": log_loss(q, y).mean,
        "pll": penalized_log_loss(q, y).mean,
    }


@dataclass
class TrainingTrace:
    """Per-epoch validation metrics (epochs are 1-based).

    ``test`` optionally holds the same metrics on a held-out set, so that
    any checkpoint can be scored without keeping model weights around.
    """

    records: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    test: list[dict] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def epochs(self) -> np.ndarray:
        return np.array([r["epoch"] for r in self.records], dtype=np.int64)

    def series(self, metric: str) -> np.ndarray:
        _check_metric(metric)
        return np.array([r[metric] for r in self.records], dtype=np.float64)

    def head(self, k: int) -> "TrainingTrace":
        return TrainingTrace(self.records[:k], dict(self.metadata), self.test[:k])

    def append(self, epoch: int, val: dict, test: dict | None = None) -> None:
        if self.records and epoch <= self.records[-1]["epoch"]:
            raise DomainError("epochs must be strictly increasing")
        self.records.append({"epoch": epoch, **{m: float(val[m]) for m in METRICS}})
        if test is not None:
            self.test.append({"epoch": epoch, **{m: float(test[m]) for m in METRICS}})

    @classmethod
    def from_series(cls, **series) -> "TrainingTrace":
        """Build a trace from metric lists; missing metrics are filled with 0."""
        n = len(next(iter(series.values())))
        trace = cls()
        for i in range(n):
            trace.append(i + 1, {m: series[m][i] if m in series else 0.0 for m in METRICS})
        return trace


@dataclass
class SelectionOutcome:
    metric: str
    chosen_epoch: int
    stopping_epoch: int | None = None
    test_metrics: dict = field(default_factory=dict)


def _check_metric(metric: str) -> None:
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _oriented(trace: TrainingTrace, metric: str) -> np.ndarray:
    # lower is better after orientation
    s = trace.series(metric)
    return -s if metric in POSITIVE_METRICS else s


def select_checkpoint(trace: TrainingTrace, metric: str) -> SelectionOutcome:
    """Best epoch under ``metric``; ties go to the earliest epoch."""
    _check_metric(metric)
    if len(trace) == 0:
        raise DomainError("empty trace")
    i = int(np.argmin(_oriented(trace, metric)))
    test = trace.test[i] if i < len(trace.test) else {}
    return SelectionOutcome(metric, int(trace.epochs[i]), None, dict(test))


def early_stop(trace: TrainingTrace, metric: str, patience: int, min_delta: float = 0.0) -> str:
    """``stop`` once ``patience`` consecutive epochs fail to beat the best
    value so far by more than ``min_delta``."""
    _check_metric(metric)
    if patience < 1:
        raise DomainError("patience must be >= 1")
    s = _oriented(trace, metric)
    if s.size == 0:
        return CONTINUE
    best, stale = s[0], 0
    for v in s[1:]:
        if v < best - min_delta:
            best, stale = v, 0
        else:
            stale += 1
    return STOP if stale >= patience else CONTINUE


def stopping_epoch(trace: TrainingTrace, metric: str, patience: int, min_delta: float = 0.0):
    """First epoch after which ``early_stop`` fires, or None."""
    _check_metric(metric)
    s = _oriented(trace, metric)
    if s.size == 0:
        return None
    best, stale = s[0], 0
    for i in range(1, s.size):
        if s[i] < best - min_delta:
            best, stale = s[i], 0
        else:
            stale += 1
        if stale >= patience:
            return int(trace.epochs[i])
    return None


def early_stop_outcome(trace: TrainingTrace, metric: str, patience: int,
                       min_delta: float = 0.0) -> SelectionOutcome:
    """Weights at the stopping epoch (no rollback); last epoch if never stopped."""
    stop = stopping_epoch(trace, metric, patience, min_delta)
    epoch = stop if stop is not None else int(trace.epochs[-1])
    i = int(np.flatnonzero(trace.epochs == epoch)[0])
    test = trace.test[i] if i < len(trace.test) else {}
    return SelectionOutcome(metric, epoch, epoch, dict(test))


def flipped_trace_correlation(trace: TrainingTrace, metric: str) -> float:
    """Pearson correlation of the F1 series with the metric, negated when the
    metric is negatively oriented."""
    _check_metric(metric)
    f1 = trace.series("f1")
    s = trace.series(metric)
    return pearson_corr(f1, s if metric in POSITIVE_METRICS else -s)


def train_classifier(train: SegmentSet, val: SegmentSet, hp: HyperParams,
                     test: SegmentSet | None = None) -> TrainingTrace:
    """Train for ``hp.epochs`` epochs, recording validation (and test) metrics."""
    if train.windows.shape[1] != val.windows.shape[1]:
        raise DomainError("train and validation feature dimensions differ")
    if train.window_labels.shape[1] != val.window_labels.shape[1]:
        raise DomainError("train and validation class counts differ")
    rng = np.random.default_rng(hp.seed)
    scale = Standardizer.fit(train.windows)
    Xtr, Xva = scale(train.windows), scale(val.windows)
    Xte = scale(test.windows) if test is not None else None
    params = init_params(rng, Xtr.shape[1], hp.hidden_units, train.window_labels.shape[1])
    trace = TrainingTrace(metadata={"seed": hp.seed, **hp.__dict__})
    for epoch in range(1, hp.epochs + 1):
        sgd_epoch(params, Xtr, train.window_labels, hp, rng, epoch)
        val_m = evaluate(forward(params, Xva), val.window_labels)
        test_m = evaluate(forward(params, Xte), test.window_labels) if test is not None else None
        trace.append(epoch, val_m, test_m)
    return trace


PAIRS = (("bs", "pbs"), ("ll", "pll"))
TABLE_COLUMNS = (
    "fold", "mode",
    "F1_BS", "F1_PBS", "Delta_BS", "F1_LL", "F1_PLL", "Delta_LL",
    "Cor_BS", "Cor_PBS", "Delta_Cor_BS", "Cor_LL", "Cor_PLL", "Delta_Cor_LL",
)


def safe_correlation(trace: TrainingTrace, metric: str) -> float:
    try:
        return flipped_trace_correlation(trace, metric)
    except UndefinedCorrelationError:
        return math.nan


@dataclass
class BenchmarkTable:
    rows: list[dict]
    columns: tuple[str, ...] = TABLE_COLUMNS

    def summary(self) -> list[dict]:
        """Mean and standard deviation of every numeric column per mode."""
        out = []
        for mode in sorted({r["mode"] for r in self.rows}):
            sub = [r for r in self.rows if r["mode"] == mode]
            for stat, fn in (("mean", np.nanmean), ("std", np.nanstd)):
                row = {"fold": stat, "mode": mode}
                for col in self.columns[2:]:
                    vals = np.array([r[col] for r in sub], dtype=np.float64)
                    row[col] = float(fn(vals)) if np.any(np.isfinite(vals)) else math.nan
                out.append(row)
        return out


def fold_rows(trace: TrainingTrace, fold: int, patience: int, min_delta: float = 0.0) -> list[dict]:
    """CP and ES rows of the comparison table for one trained fold.

    CP correlations use the whole trace; ES correlations use the trace up
    to the epoch where that metric stopped training.
    """
    rows = []
    for mode in ("CP", "ES"):
        row: dict = {"fold": fold, "mode": mode}
        for base, pen in PAIRS:
            for metric in (base, pen):
                if mode == "CP":
                    out = select_checkpoint(trace, metric)
                    seen = trace
                else:
                    out = early_stop_outcome(trace, metric, patience, min_delta)
                    seen = trace.head(out.stopping_epoch)
                row[f"F1_{metric.upper()}"] = out.test_metrics.get("f1", math.nan)
                row[f"Cor_{metric.upper()}"] = safe_correlation(seen, metric)
            B = base.upper()
            row[f"Delta_{B}"] = row[f"F1_{pen.upper()}"] - row[f"F1_{B}"]
            row[f"Delta_Cor_{B}"] = row[f"Cor_{pen.upper()}"] - row[f"Cor_{B}"]
        rows.append(row)
    return rows


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(fold,)).generate_state(1)[0])


def benchmark(ds: TimeSeriesDataset, splits: list[BlockSplit], hp: HyperParams,
              window_length: int, overlap: float, patience: int = 10,
              min_delta: float = 0.0) -> tuple[BenchmarkTable, list[TrainingTrace]]:
    """Train one model per fold and compare BS/PBS and LL/PLL selection.

    Each fold is trained once for the full epoch budget with a fold-derived
    seed.  Checkpointing and early stopping are then replayed on the trace,
    which gives the same choices as separate runs because training never
    depends on the monitored metric.
    """
    rows, traces = [], []
    for split in splits:
        if not (split.train and split.validation and split.test):
            raise DomainError(f"fold {split.fold} has an empty role")
        parts = [
            segment_blocks(ds, split.h, blocks, window_length, overlap)
            for blocks in (split.train, split.validation, split.test)
        ]
        fold_hp = HyperParams(hp.epochs, hp.learning_rate, hp.hidden_units,
                              hp.batch_size, fold_seed(hp.seed, split.fold))
        trace = train_classifier(parts[0], parts[1], fold_hp, test=parts[2])
        trace.metadata["fold"] = split.fold
        traces.append(trace)
        rows.extend(fold_rows(trace, split.fold, patience, min_delta))
    return BenchmarkTable(rows), traces
