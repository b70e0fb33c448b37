"""``penscore`` command line.

Exit codes: 0 success, 1 a verification assertion failed, 2 usage error,
3 invalid input data, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from penscore import io, sampling
from penscore.harness.data import hblock_splits, segment_blocks, synth_dataset
from penscore.harness.model import HyperParams
from penscore.harness.selection import (
    METRICS,
    TABLE_COLUMNS,
    benchmark,
    early_stop_outcome,
    select_checkpoint,
    train_classifier,
    safe_correlation,
)
from penscore.penalization import penalized_brier_score, penalized_log_loss
from penscore.scoring import (
    POSITIVE,
    DomainError,
    ScoringError,
    SimplexError,
    accuracy,
    brier_score,
    log_loss,
    macro_f1,
    predicted_classes,
)
from penscore.verification import (
    SweepConfig,
    bound_report,
    ll_case_analysis,
    montecarlo_hot_above,
    montecarlo_hot_below,
    propriety_check,
    superiority_sweep,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3, 4
SCORE_METRICS = ("bs", "ll", "pbs", "pll", "acc", "f1")


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("PENSCORE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PENSCORE_SEED must be an integer, got {raw!r}") from None


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get("PENSCORE_OUT_DIR", "."))


def _emit(payload: dict, out) -> None:
    text = io.dumps(payload)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- score -----------------------------------------------------------------

def cmd_score(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    bad = [m for m in metrics if m not in SCORE_METRICS]
    if bad or not metrics:
        raise UsageError(f"unknown metric(s) {bad}; choose from {SCORE_METRICS}")
    q = io.read_predictions(args.predictions, renormalize=args.renormalize)
    y = io.read_labels(args.labels, c=q.c)
    if (q.n, q.c) != (y.n, y.c):
        raise io.DataFormatError(f"predictions are {q.n}x{q.c} but labels are {y.n}x{y.c}")
    reports = []
    for m in metrics:
        if m in ("acc", "f1"):
            entry = {"metric_name": m, "orientation": POSITIVE, "n": q.n, "c": q.c, "flags": []}
            if m == "acc":
                hits = (predicted_classes(q, y) == y.classes).astype(np.float64)
                entry["mean"] = accuracy(q, y)
                if args.per_sample:
                    entry["per_sample"] = hits
            else:
                entry["mean"] = macro_f1(q, y)
            reports.append(entry)
            continue
        if m == "bs":
            r = brier_score(q, y)
        elif m == "ll":
            r = log_loss(q, y)
        elif m == "pbs":
            r = penalized_brier_score(q, y, alg_form=args.alg_form)
        else:
            r = penalized_log_loss(q, y, alg_form=args.alg_form)
        entry = {"metric_name": r.metric_name, "orientation": r.orientation, "mean": r.mean,
                 "n": q.n, "c": q.c, "flags": list(r.flags)}
        if args.per_sample:
            entry["per_sample"] = r.per_sample
        reports.append(entry)
    _emit({"command": "score", "reports": reports}, args.out)
    return EXIT_OK


# --- verify ----------------------------------------------------------------

def _sweep_cfg(args, trials: int) -> SweepConfig:
    return SweepConfig(trials, (args.c_min, args.c_max), args.seed, args.generator, args.workers)


def cmd_verify(args) -> int:
    checks = []
    suite = args.suite
    if suite == "superiority":
        metrics = args.metric or ["pbs", "pll"]
        for m in metrics:
            c_min = args.c_min if args.c_min is not None else (2 if m in ("pbs", "pll") else 3)
            cfg = SweepConfig(args.trials or 10**6, (c_min, args.c_max), args.seed,
                              args.generator, args.workers)
            res = superiority_sweep(m, cfg)
            checks.append({
                "assertion": f"{m} is superior (no correct row scores >= a wrong row)",
                "passed": res.count == 0,
                "comparisons": res.comparisons,
                "violations": res.count,
                "counterexample": res.counterexample,
            })
    elif suite == "propriety":
        metrics = args.metric or ["bs", "ll", "pbs", "pll"]
        cs = args.c or [2, 3, 4]
        for m in metrics:
            for c in cs:
                cfg = SweepConfig(args.trials or 200, (2, 2), args.seed, args.generator)
                rep = propriety_check(m, c, cfg, p_samples=args.p_samples)
                checks.append({"assertion": f"{m} strictly proper at c={c}", **rep.to_dict()})
    elif suite == "bounds":
        metrics = args.metric or ["bs", "ll"]
        cs = args.c or [2, 3, 4, 10]
        for m in metrics:
            for c in cs:
                rep = bound_report(m, c, args.trials or 100_000, args.seed, args.generator)
                checks.append({"assertion": f"{m} supremum over correct rows at c={c}",
                               **rep.to_dict()})
    else:
        grid = [(a, b, c, case)
                for c in (args.c or [3, 4, 5])
                for a in (0.35, 0.4, 0.45)
                for b, case in ((0.0, "above"), (0.02, "below"), (0.1, "below"),
                                (0.02, "above"), (0.04, "above"))]
        for a, b, c, case in grid:
            w = ll_case_analysis(a, b, c, case)
            checks.append({"assertion": f"ll ordering for alpha={a}, beta={b}, c={c}, {w.case}",
                           "passed": w.holds, **w.__dict__})
    passed = all(ch["passed"] for ch in checks)
    _emit({"command": "verify", "suite": suite, "seed": args.seed, "passed": passed,
           "checks": checks}, args.out)
    return EXIT_OK if passed else EXIT_FAIL


# --- montecarlo ------------------------------------------------------------

def cmd_montecarlo(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    cfg = _sweep_cfg(args, args.trials)
    run = montecarlo_hot_below if args.case == "below" else montecarlo_hot_above
    res = run(cfg)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    io.write_curve(out / f"montecarlo_{args.case}.csv", res.curve)
    summary = {"command": "montecarlo", "case": args.case, "trials": res.comparisons,
               "seed": args.seed, "rate": res.rate, **res.to_dict()}
    io.write_json(out / f"montecarlo_{args.case}.json", summary)
    sys.stdout.write(io.dumps(summary))
    return EXIT_OK


# --- train / hblock --------------------------------------------------------

def _hp(args) -> HyperParams:
    return HyperParams(args.epochs, args.learning_rate, args.hidden_units, args.batch_size, args.seed)


def _dataset(args):
    return synth_dataset(args.classes, args.channels, args.length, args.seed, args.difficulty)


def cmd_train(args) -> int:
    hp = _hp(args)
    ds = _dataset(args)
    split = hblock_splits(args.h)[args.fold - 1] if 1 <= args.fold <= args.h else None
    if split is None:
        raise UsageError(f"--fold must be in 1..{args.h}")
    parts = [segment_blocks(ds, args.h, b, args.window_length, args.overlap)
             for b in (split.train, split.validation, split.test)]
    trace = train_classifier(parts[0], parts[1], hp, test=parts[2])
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    io.write_table(out / "trace.csv", trace.records, ("epoch",) + METRICS)
    selections = {}
    for m in METRICS:
        cp = select_checkpoint(trace, m)
        es = early_stop_outcome(trace, m, args.patience, args.min_delta)
        selections[m] = {
            "checkpoint_epoch": cp.chosen_epoch,
            "checkpoint_test": cp.test_metrics,
            "early_stop_epoch": es.stopping_epoch,
            "early_stop_test": es.test_metrics,
            "flipped_correlation": safe_correlation(trace, m),
        }
    payload = {"command": "train", "fold": args.fold, "h": args.h,
               "hyperparameters": hp.__dict__, "windows": [p.m for p in parts],
               "selections": selections}
    io.write_json(out / "selection.json", payload)
    sys.stdout.write(io.dumps(payload))
    return EXIT_OK


def cmd_hblock(args) -> int:
    hp = _hp(args)
    splits = hblock_splits(args.h)
    if splits[0].nv < 1:
        raise UsageError(f"h={args.h} leaves no validation block; use h >= 5")
    ds = _dataset(args)
    table, _ = benchmark(ds, splits, hp, args.window_length, args.overlap,
                         args.patience, args.min_delta)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    io.write_table(out / "benchmark.csv", table.rows + table.summary(), TABLE_COLUMNS)
    payload = {"command": "hblock", "h": args.h, "folds": len(splits),
               "nv": splits[0].nv, "nt": splits[0].nt, "summary": table.summary()}
    io.write_json(out / "benchmark.json", payload)
    sys.stdout.write(io.dumps(payload))
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="penscore", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("score", help="score a predictions CSV against labels")
    s.add_argument("--predictions", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--metrics", default="bs,ll,pbs,pll,acc,f1")
    s.add_argument("--renormalize", action="store_true")
    s.add_argument("--per-sample", action="store_true")
    s.add_argument("--alg-form", action="store_true",
                   help="class-averaged PBS (score / c) and PLL report naming")
    s.add_argument("--out")
    s.set_defaults(func=cmd_score)

    def sweep_args(sp, c_min_default):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--c-min", type=int, default=c_min_default)
        sp.add_argument("--c-max", type=int, default=15)
        sp.add_argument("--generator", choices=sampling.GENERATORS, default=sampling.ABS_GAUSSIAN)
        sp.add_argument("--workers", type=_positive_int, default=1)

    v = sub.add_parser("verify", help="numerical checks of the scoring-rule properties")
    v.add_argument("suite", choices=("superiority", "propriety", "bounds", "ll-cases"))
    v.add_argument("--metric", action="append", choices=("bs", "ll", "pbs", "pll"))
    v.add_argument("--trials", type=_positive_int)
    v.add_argument("--c", type=int, action="append")
    v.add_argument("--p-samples", type=_positive_int, default=500)
    v.add_argument("--out")
    sweep_args(v, None)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("montecarlo", help="hot-value Monte Carlo for the Brier score")
    m.add_argument("case", choices=("below", "above"))
    m.add_argument("--trials", type=int, default=10**6)
    m.add_argument("--out-dir")
    sweep_args(m, 3)
    m.set_defaults(func=cmd_montecarlo)

    def harness_args(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--classes", type=int, default=4)
        sp.add_argument("--channels", type=int, default=3)
        sp.add_argument("--length", type=int, default=6000)
        sp.add_argument("--difficulty", type=float, default=0.5)
        sp.add_argument("--window-length", type=int, default=32)
        sp.add_argument("--overlap", type=float, default=0.75)
        sp.add_argument("--epochs", type=int, default=100)
        sp.add_argument("--learning-rate", type=float, default=0.05)
        sp.add_argument("--hidden-units", type=int, default=32)
        sp.add_argument("--batch-size", type=int, default=32)
        sp.add_argument("--patience", type=_positive_int, default=10)
        sp.add_argument("--min-delta", type=float, default=0.0)
        sp.add_argument("--h", type=int, default=10)
        sp.add_argument("--out-dir")

    t = sub.add_parser("train", help="train one fold and report checkpoint choices")
    harness_args(t)
    t.add_argument("--fold", type=int, default=1)
    t.set_defaults(func=cmd_train)

    h = sub.add_parser("hblock", help="h-block cross-validated selection benchmark")
    harness_args(h)
    h.set_defaults(func=cmd_hblock)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as e:
        print(f"penscore: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SimplexError as e:
        rows = ", ".join(str(r) for r in e.rows[:10])
        print(f"penscore: invalid data: {e}" + (f" (rows: {rows})" if rows else ""), file=sys.stderr)
        return EXIT_DATA
    except DomainError as e:
        # parameter values outside a function's domain come from flags
        print(f"penscore: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScoringError as e:
        print(f"penscore: invalid data: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"penscore: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
