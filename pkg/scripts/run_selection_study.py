"""Checkpointing and early-stopping study over seeds and data difficulties.

Every seed draws a fresh synthetic series and runs the full h-block
benchmark for each point of a (difficulty, window length, overlap) grid;
per-fold rows and per-grid-point means are written as CSV.

    python3 scripts/run_selection_study.py --seeds 20 --difficulty 0.25 0.5 0.75
    python3 scripts/run_selection_study.py --window-length 16 32 64 --overlap 0.5 0.75
"""

import argparse
import itertools
import time
from pathlib import Path

import numpy as np

from penscore import io
from penscore.harness.data import hblock_splits, synth_dataset
from penscore.harness.model import HyperParams
from penscore.harness.selection import TABLE_COLUMNS, benchmark

NUMERIC = TABLE_COLUMNS[2:]
GRID = ("difficulty", "window_length", "overlap")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--difficulty", type=float, nargs="+", default=[0.5])
    ap.add_argument("--window-length", type=int, nargs="+", default=[32])
    ap.add_argument("--overlap", type=float, nargs="+", default=[0.75])
    ap.add_argument("--h", type=int, default=10)
    ap.add_argument("--length", type=int, default=6000)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--patience", type=int, default=10)
    ap.add_argument("--out", type=Path, default=Path("results/selection"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    rows, means = [], []
    for d, L, ov in itertools.product(args.difficulty, args.window_length, args.overlap):
        t = time.perf_counter()
        point = {"difficulty": d, "window_length": L, "overlap": ov}
        block = []
        for seed in range(args.seeds):
            ds = synth_dataset(4, 3, args.length, seed=seed, difficulty=d)
            table, _ = benchmark(ds, hblock_splits(args.h), HyperParams(epochs=args.epochs, seed=seed),
                                 window_length=L, overlap=ov, patience=args.patience)
            block += [{**point, "seed": seed, **r} for r in table.rows]
        rows += block
        for mode in ("CP", "ES"):
            sel = [r for r in block if r["mode"] == mode]
            means.append({**point, "mode": mode,
                          **{k: float(np.nanmean([r[k] for r in sel])) for k in NUMERIC}})
            m = means[-1]
            print(f"d={d:.2f} L={L} ov={ov:.2f} {mode}  dF1(PBS-BS) {m['Delta_BS']:+.4f}  dF1(PLL-LL) {m['Delta_LL']:+.4f}  "
                  f"dCor BS {m['Delta_Cor_BS']:+.3f}  dCor LL {m['Delta_Cor_LL']:+.3f}")
        print(f"  {time.perf_counter() - t:.0f}s")

    io.write_table(args.out / "folds.csv", rows, (*GRID, "seed", *TABLE_COLUMNS))
    io.write_table(args.out / "means.csv", means, (*GRID, "mode", *NUMERIC))


if __name__ == "__main__":
    main()
