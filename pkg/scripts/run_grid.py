"""Run the default parameter grid and print the headline owner costs.

usage: python3 scripts/run_grid.py [--out results/grid.csv] [--seed 0]
"""
import argparse
from pathlib import Path

from dosnsim.bench import SweepConfig, emit_csv, measure_point, run_sweep
from dosnsim.core import GroupType


def headline(cfg: SweepConfig) -> None:
    print("owner cost at n=4000 (modeled ms)")
    for model in ("encryption", "lkh"):
        for gtype in GroupType:
            p = 8000 if gtype is GroupType.G3 else 10
            rows = {(r.op, r.role): r for r in measure_point(model, gtype, 4000, p, cfg)}
            cells = "  ".join(f"{op}={rows[(op, 'owner')].time_s * 1e3:.4f}"
                              for op in ("publish", "join", "leave"))
            print(f"  {model:<10} {gtype.value} p={p:<5} {cells}")


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/grid.csv")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = SweepConfig(seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = run_sweep(cfg)
    emit_csv(rows, out)
    print(f"{len(rows)} rows -> {out}")
    headline(cfg)


if __name__ == "__main__":
    main()
