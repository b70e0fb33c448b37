"""Numerical checks of the scoring-rule properties.

* ``superiority_sweep``: random (correct, wrong) row pairs; a violation is a
  correct row scoring no better than a wrong one.
* ``montecarlo_hot_below`` / ``montecarlo_hot_above``: how often the Brier
  score ranks a wrong row below a correct one when the wrong row's
  true-class probability is lower / higher.
* ``propriety_check``: exact expected scores over the finite outcome space.
* ``bound_check``: largest BS / LL over correctly classified rows.
* ``ll_case_analysis``: the three hot-value orderings of log loss.

Sweeps are split into fixed-size chunks, each with its own seed derived
from ``(seed, experiment, chunk index)``.  Results are therefore identical
for any number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from penscore import sampling
from penscore.penalization import (
    SCORING_RULES,
    bs_penalty,
    ll_penalty,
    penalized_brier_score,
)
from penscore.scoring import (
    DomainError,
    LabelBatch,
    PredictionBatch,
    brier_score,
    log_loss,
)

CHUNK_SIZE = 1 << 18
PROPRIETY_TOL = 1e-9
PERTURBATIONS = (0.3, 0.1, 0.03, 0.01)

# stable per-experiment tags for seed derivation
_TAGS = {"superiority": 1, "below": 2, "above": 3, "propriety": 4, "bounds": 5}


@dataclass(frozen=True)
class SweepConfig:
    trials: int
    c_range: tuple[int, int] = (3, 15)
    seed: int = 0
    generator: str = sampling.ABS_GAUSSIAN
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        lo, hi = self.c_range
        if lo < 2 or hi < lo:
            raise DomainError(f"bad class-count range {self.c_range}")
        sampling.check_generator(self.generator)
        if self.workers < 1:
            raise DomainError("workers must be >= 1")


@dataclass
class SweepResult:
    """Counts of a per-trial condition over a sweep.

    For superiority sweeps ``count`` is the number of violations; for the
    hot-value Monte Carlo it is the number of trials where the wrong row got
    the worse Brier score.
    """

    condition: str
    comparisons: int
    count: int
    curve: list[tuple[int, float]]
    generator: str
    extra: dict = field(default_factory=dict)
    counterexample: dict | None = None

    @property
    def rate(self) -> float:
        return self.count / self.comparisons

    @property
    def violations(self) -> int:
        return self.count

    def to_dict(self) -> dict:
        out = {
            "condition": self.condition,
            "comparisons": self.comparisons,
            "count": self.count,
            "rate": self.rate,
            "generator": self.generator,
            **self.extra,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class ProprietyReport:
    metric: str
    c: int
    q_samples: int
    p_samples: int
    max_violation_margin: float
    min_positive_margin_at_distance: float
    violations: int
    nonpositive_far: int
    tolerance: float = PROPRIETY_TOL

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.nonpositive_far == 0

    def to_dict(self) -> dict:
        return {**self.__dict__, "passed": self.passed}


@dataclass
class LLCaseWitness:
    case: str
    alpha: float
    beta: float
    c: int
    x: list[float]
    q: list[float]
    ll_x: float
    ll_q: float
    ordering: str
    expected: str

    @property
    def holds(self) -> bool:
        return self.ordering == self.expected


def checkpoints(trials: int, per_decade: int = 10) -> np.ndarray:
    """Log-spaced trial counts from 1 to ``trials`` inclusive."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    pts = np.logspace(0, math.log10(trials), per_decade * max(1, math.ceil(math.log10(trials))) + 1)
    return np.unique(np.concatenate([np.round(pts).astype(np.int64), [trials]]))


def cumulative_curve(hits: np.ndarray, per_decade: int = 10) -> list[tuple[int, float]]:
    running = np.cumsum(hits, dtype=np.int64)
    pts = checkpoints(hits.size, per_decade)
    return [(int(t), 100.0 * running[t - 1] / t) for t in pts]


def curve_drift(curve: list[tuple[int, float]], decades: float = 2.0) -> float:
    """Largest distance (percentage points) between the final value and any
    checkpoint inside the last ``decades`` decades."""
    final_t, final_pct = curve[-1]
    lo = final_t / 10**decades
    return max(abs(pct - final_pct) for t, pct in curve if t >= lo)


def _chunk_rng(seed: int, tag: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(tag, chunk)))


def _run_chunks(fn: Callable, cfg: SweepConfig, tag: int, *args):
    n_chunks = math.ceil(cfg.trials / CHUNK_SIZE)
    jobs = [
        (fn, cfg, tag, k, min(CHUNK_SIZE, cfg.trials - k * CHUNK_SIZE), args)
        for k in range(n_chunks)
    ]
    if cfg.workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_call, jobs))
    return [_call(job) for job in jobs]


def _call(job):
    fn, cfg, tag, k, n, args = job
    return fn(_chunk_rng(cfg.seed, tag, k), n, cfg, *args)


def _class_counts(rng, n: int, cfg: SweepConfig) -> np.ndarray:
    lo, hi = cfg.c_range
    return rng.integers(lo, hi + 1, n)


def _superiority_chunk(rng, n: int, cfg: SweepConfig, metric: str):
    rule = SCORING_RULES[metric]
    cs = _class_counts(rng, n, cfg)
    viol = np.zeros(n, bool)
    redraws = 0
    example = None
    for c in np.unique(cs):
        idx = np.flatnonzero(cs == c)
        x, tx = sampling.correct_rows(rng, idx.size, int(c), cfg.generator)
        w, tw, r = sampling.wrong_rows(rng, idx.size, int(c), cfg.generator)
        redraws += r
        sx = rule(PredictionBatch(x), LabelBatch.from_classes(tx, int(c))).per_sample
        sw = rule(PredictionBatch(w), LabelBatch.from_classes(tw, int(c))).per_sample
        bad = sx >= sw
        viol[idx] = bad
        if bad.any():
            j = int(np.flatnonzero(bad)[0])
            cand = {
                "trial": int(idx[j]),
                "c": int(c),
                "correct_row": x[j].tolist(),
                "correct_true_class": int(tx[j]),
                "correct_score": float(sx[j]),
                "wrong_row": w[j].tolist(),
                "wrong_true_class": int(tw[j]),
                "wrong_score": float(sw[j]),
            }
            if example is None or cand["trial"] < example["trial"]:
                example = cand
    return viol, {"redraws": redraws}, example


def _hot_value_chunk(rng, n: int, cfg: SweepConfig, case: str):
    cs = _class_counts(rng, n, cfg)
    hits = np.zeros(n, bool)
    infeasible = 0
    for c in np.unique(cs):
        idx = np.flatnonzero(cs == c)
        x, q, true, inf = sampling.hot_value_pairs(rng, idx.size, int(c), case, cfg.generator)
        infeasible += inf
        y = LabelBatch.from_classes(true, int(c))
        hits[idx] = brier_score(PredictionBatch(q), y).per_sample > brier_score(
            PredictionBatch(x), y
        ).per_sample
    return hits, {"infeasible_redraws": infeasible}, None


def _merge(parts, offset_size: int = CHUNK_SIZE):
    flags = np.concatenate([p[0] for p in parts])
    extra: dict = {}
    example = None
    for k, (_, ex, cand) in enumerate(parts):
        for key, val in ex.items():
            extra[key] = extra.get(key, 0) + val
        if cand is not None and example is None:
            example = {**cand, "trial": cand["trial"] + k * offset_size}
    return flags, extra, example


def superiority_sweep(metric: str, cfg: SweepConfig) -> SweepResult:
    """Count pairs where a correct row scores no better than a wrong row.

    Both rows of a pair share the class count, drawn uniformly from
    ``cfg.c_range`` per trial.  The first violating pair (lowest trial
    index) is kept as ``counterexample``.
    """
    if metric not in SCORING_RULES:
        raise DomainError(f"unknown metric {metric!r}")
    parts = _run_chunks(_superiority_chunk, cfg, _TAGS["superiority"], metric)
    viol, extra, example = _merge(parts)
    return SweepResult(
        condition=f"{metric}(correct) >= {metric}(wrong)",
        comparisons=cfg.trials,
        count=int(viol.sum()),
        curve=cumulative_curve(viol),
        generator=cfg.generator,
        extra={"metric": metric, "c_range": list(cfg.c_range), **extra},
        counterexample=example,
    )


def superiority_pair(metric: str, correct_row, wrong_row, true_class: int) -> SweepResult:
    """Single-comparison sweep on a given pair, for hand-built examples."""
    rule = SCORING_RULES[metric]
    c = len(correct_row)
    y = LabelBatch.from_classes([true_class], c)
    sx = rule(PredictionBatch([correct_row]), y).mean
    sw = rule(PredictionBatch([wrong_row]), y).mean
    viol = np.array([sx >= sw])
    return SweepResult(
        condition=f"{metric}(correct) >= {metric}(wrong)",
        comparisons=1,
        count=int(viol.sum()),
        curve=cumulative_curve(viol),
        generator="fixed",
        extra={"metric": metric, "correct_score": sx, "wrong_score": sw},
    )


def _hot_value_sweep(case: str, cfg: SweepConfig) -> SweepResult:
    if case == "above" and cfg.c_range[0] < 3:
        raise DomainError(
            "with c = 2 no wrong row can have a higher hot value; use c >= 3"
        )
    parts = _run_chunks(_hot_value_chunk, cfg, _TAGS[case], case)
    hits, extra, _ = _merge(parts)
    return SweepResult(
        condition="bs(q) > bs(x)",
        comparisons=cfg.trials,
        count=int(hits.sum()),
        curve=cumulative_curve(hits),
        generator=cfg.generator,
        extra={"case": case, "c_range": list(cfg.c_range), **extra},
    )


def montecarlo_hot_below(cfg: SweepConfig) -> SweepResult:
    """Wrong rows whose true-class probability is below the correct row's."""
    return _hot_value_sweep("below", cfg)


def montecarlo_hot_above(cfg: SweepConfig) -> SweepResult:
    """Wrong rows whose true-class probability is above the correct row's."""
    return _hot_value_sweep("above", cfg)


def expected_scores(metric: str, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``S(P_m, Q_m) = sum_i Q_m[i] * S(P_m, i)`` for each row pair."""
    rule = SCORING_RULES[metric]
    P = np.atleast_2d(P)
    Q = np.atleast_2d(Q)
    m, c = P.shape
    rows = np.repeat(P, c, axis=0)
    labels = LabelBatch.from_classes(np.tile(np.arange(c), m), c)
    per_outcome = rule(PredictionBatch(rows), labels).per_sample.reshape(m, c)
    return np.sum(per_outcome * Q, axis=1)


def _perturbations(Q: np.ndarray) -> np.ndarray:
    c = Q.size
    out = []
    for d in PERTURBATIONS:
        for a in range(c):
            for b in range(c):
                if a != b and Q[b] - d >= 0 and Q[a] + d <= 1:
                    p = Q.copy()
                    p[a] += d
                    p[b] -= d
                    out.append(p)
    return np.array(out).reshape(-1, c)


def propriety_check(metric: str, c: int, cfg: SweepConfig, p_samples: int = 500) -> ProprietyReport:
    """Check that ``P = Q`` minimizes the expected score.

    ``cfg.trials`` truth distributions ``Q`` are drawn; each is compared
    with ``p_samples`` forecasts ``P`` (structured +/- delta moves between
    coordinate pairs, topped up with random simplex points).  Margins are
    ``S(P, Q) - S(Q, Q)``; a violation is a margin below ``-tol`` and, for
    ``TV(P, Q) > 0.01``, the margin must be strictly positive.
    """
    if metric not in SCORING_RULES:
        raise DomainError(f"unknown metric {metric!r}")
    if not 2 <= c <= 6:
        raise DomainError("propriety check supports 2 <= c <= 6")
    rng = _chunk_rng(cfg.seed, _TAGS["propriety"], c)
    worst = math.inf
    worst_far = math.inf
    violations = 0
    nonpositive_far = 0
    for _ in range(cfg.trials):
        Q = sampling.simplex_rows(rng, (c,), cfg.generator)
        P = _perturbations(Q)[:p_samples]
        if P.shape[0] < p_samples:
            P = np.vstack([P, sampling.simplex_rows(rng, (p_samples - P.shape[0], c), cfg.generator)])
        base = expected_scores(metric, Q, Q)[0]
        margin = expected_scores(metric, P, np.broadcast_to(Q, P.shape)) - base
        tv = 0.5 * np.abs(P - Q).sum(axis=1)
        far = tv > 0.01
        worst = min(worst, float(margin.min()))
        if far.any():
            worst_far = min(worst_far, float(margin[far].min()))
        violations += int(np.count_nonzero(margin < -PROPRIETY_TOL))
        nonpositive_far += int(np.count_nonzero(far & (margin <= 0)))
    return ProprietyReport(
        metric=metric,
        c=c,
        q_samples=cfg.trials,
        p_samples=p_samples,
        max_violation_margin=worst,
        min_positive_margin_at_distance=worst_far,
        violations=violations,
        nonpositive_far=nonpositive_far,
    )


_BOUND_RULES = {"bs": (brier_score, bs_penalty), "ll": (log_loss, ll_penalty)}


@dataclass
class BoundReport:
    metric: str
    c: int
    bound: float
    supremum: float
    uniform_score: float
    max_sampled: float
    trials: int

    @property
    def passed(self) -> bool:
        return (
            abs(self.uniform_score - self.bound) <= 1e-12
            and self.max_sampled <= self.bound + 1e-12
        )

    def to_dict(self) -> dict:
        return {**self.__dict__, "passed": self.passed}


def bound_report(metric: str, c: int, trials: int = 100_000, seed: int = 0,
                 generator: str = sampling.ABS_GAUSSIAN) -> BoundReport:
    if metric not in _BOUND_RULES:
        raise DomainError(f"bound check supports bs and ll, got {metric!r}")
    if c < 2:
        raise DomainError("c must be >= 2")
    rule, penalty = _BOUND_RULES[metric]
    rng = _chunk_rng(seed, _TAGS["bounds"], c)
    x, true = sampling.correct_rows(rng, trials, c, generator)
    sampled = rule(PredictionBatch(x), LabelBatch.from_classes(true, c)).per_sample
    uniform = rule(PredictionBatch(np.full((1, c), 1.0 / c)), LabelBatch.from_classes([0], c)).mean
    return BoundReport(
        metric=metric,
        c=c,
        bound=penalty(c),
        supremum=float(max(sampled.max(), uniform)),
        uniform_score=float(uniform),
        max_sampled=float(sampled.max()),
        trials=trials,
    )


def bound_check(metric: str, c: int, trials: int = 100_000, seed: int = 0) -> float:
    """Largest score observed over random correct rows and the uniform row."""
    return bound_report(metric, c, trials, seed).supremum


def ll_case_analysis(alpha: float, beta: float, c: int, case: str = "above") -> LLCaseWitness:
    """Log loss of a correct row ``x`` vs a wrong row ``q``.

    ``x`` has true-class probability ``alpha`` with the rest spread evenly;
    ``q`` has true-class probability ``alpha`` (``beta == 0``),
    ``alpha - beta`` (``case="below"``) or ``alpha + beta``
    (``case="above"``), with all remaining mass on one other class.
    """
    if c < 3:
        raise DomainError("the case analysis needs c >= 3")
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must be in (0, 1], got {alpha}")
    if beta < 0:
        raise DomainError("beta must be >= 0")
    if alpha < 1.0 / c:
        raise DomainError("alpha < 1/c cannot be the largest entry of a correct row")
    if beta == 0:
        case, hot, expected = "equal", alpha, "equal"
    elif case == "below":
        hot, expected = alpha - beta, "q_worse"
    elif case == "above":
        hot, expected = alpha + beta, "x_worse"
    else:
        raise DomainError(f"case must be 'below' or 'above', got {case!r}")
    # a wrong row needs another entry strictly above the hot value
    if not 0 < hot < 0.5:
        raise DomainError(f"no wrong row has true-class probability {hot:g}")
    x = np.full(c, (1 - alpha) / (c - 1))
    x[0] = alpha
    q = np.zeros(c)
    q[0] = hot
    q[1] = 1 - hot
    y = LabelBatch.from_classes([0, 0], c)
    ll = log_loss(PredictionBatch(np.vstack([x, q])), y).per_sample
    if ll[0] == ll[1]:
        ordering = "equal"
    elif ll[1] > ll[0]:
        ordering = "q_worse"
    else:
        ordering = "x_worse"
    return LLCaseWitness(case, alpha, beta, c, x.tolist(), q.tolist(),
                         float(ll[0]), float(ll[1]), ordering, expected)


def penalty_gap_ok(metric_pen: str, q: PredictionBatch, y: LabelBatch) -> bool:
    """PBS - BS (or PLL - LL) is exactly 0 or exactly the penalty per row."""
    if metric_pen == "pbs":
        gap = penalized_brier_score(q, y).per_sample - brier_score(q, y).per_sample
        pen = bs_penalty(q.c)
    else:
        gap = SCORING_RULES["pll"](q, y).per_sample - log_loss(q, y).per_sample
        pen = ll_penalty(q.c)
    return bool(np.all(np.isclose(gap, 0, atol=1e-12, rtol=0) | np.isclose(gap, pen, atol=1e-12, rtol=0)))
