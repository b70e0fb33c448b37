"""Propriety, bound and log-loss case checks over a grid of class counts.

    python3 scripts/run_verify.py --out results/verify
"""

import argparse
from pathlib import Path

from penscore import io
from penscore.scoring import DomainError
from penscore.verification import SweepConfig, bound_report, ll_case_analysis, propriety_check


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q-samples", type=int, default=200)
    ap.add_argument("--p-samples", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--out", type=Path, default=Path("results/verify"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    propriety = []
    for metric in ("bs", "ll", "pbs", "pll"):
        for c in range(2, 7):
            r = propriety_check(metric, c, SweepConfig(args.q_samples, seed=args.seed), args.p_samples)
            propriety.append(r)
            print(f"propriety {metric:3s} c={c}  passed={r.passed}  min margin {r.max_violation_margin:.3g}")

    bounds = [bound_report(m, c, seed=args.seed) for m in ("bs", "ll") for c in (2, 3, 4, 5, 10, 15)]
    for b in bounds:
        print(f"bound {b.metric} c={b.c:2d}  uniform {b.uniform_score:.6f}  max sampled {b.max_sampled:.6f}")

    cases = []
    for c in (3, 4, 5, 8):
        for alpha in (0.34, 0.4, 0.45):
            for beta, case in ((0.0, "above"), (0.1, "below"), (0.04, "above")):
                try:
                    cases.append(ll_case_analysis(max(alpha, 1 / c), beta, c, case))
                except DomainError as err:
                    print(f"ll case alpha={alpha} beta={beta} c={c} {case}: {err}")
    print(f"ll cases: {sum(w.holds for w in cases)}/{len(cases)} hold")

    io.write_json(args.out / "verify.json", {
        "propriety": propriety, "bounds": bounds, "ll_cases": cases,
    })


if __name__ == "__main__":
    main()
