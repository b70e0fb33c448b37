"""Superiority sweeps and hot-value Monte Carlo for both simplex generators.

Writes one JSON summary plus a convergence curve CSV per experiment.

    python3 scripts/run_montecarlo.py --trials 1000000 --out results/montecarlo
"""

import argparse
import time
from pathlib import Path

from penscore import io, sampling
from penscore.verification import (
    SweepConfig,
    curve_drift,
    montecarlo_hot_above,
    montecarlo_hot_below,
    superiority_sweep,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results/montecarlo"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    jobs = {
        **{f"superiority_{m}": (superiority_sweep, m, (2, 15) if m in ("pbs", "pll") else (3, 15))
           for m in ("bs", "ll", "pbs", "pll")},
        "hot_below": (montecarlo_hot_below, None, (3, 15)),
        "hot_above": (montecarlo_hot_above, None, (3, 15)),
    }
    summary = {}
    for gen in sampling.GENERATORS:
        for name, (fn, metric, c_range) in jobs.items():
            cfg = SweepConfig(args.trials, c_range, seed=args.seed, generator=gen, workers=args.workers)
            t = time.perf_counter()
            res = fn(metric, cfg) if metric else fn(cfg)
            dt = time.perf_counter() - t
            key = f"{name}_{gen}"
            io.write_curve(args.out / f"{key}.csv", res.curve)
            summary[key] = {**res.to_dict(), "drift_pp": curve_drift(res.curve), "seconds": dt}
            print(f"{key:32s} count {res.count:8d}  rate {100 * res.rate:9.4f}%  "
                  f"drift {curve_drift(res.curve):.3f} pp  {dt:6.1f}s")
    io.write_json(args.out / "summary.json", summary)


if __name__ == "__main__":
    main()
