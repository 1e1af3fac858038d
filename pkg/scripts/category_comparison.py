"""Normalized model comparison for passive, normal and active groups.

Writes one summary CSV per category and prints the normalized time and
traffic per axis.

usage: python3 scripts/category_comparison.py [--outdir results]
"""
import argparse
from pathlib import Path

from dosnsim.bench import CATEGORIES, emit_summary, run_category_comparison


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for category in CATEGORIES:
        summary = run_category_comparison(category)
        emit_summary(summary, outdir / f"summary_{category}.csv")
        print(f"{category}: n={summary.n} p={summary.p}")
        for r in summary.rows:
            print(f"  {r.op:<8}{r.gtype}  {r.model:<10} time={r.time_norm:.3f} bytes={r.bytes_norm:.3f}")


if __name__ == "__main__":
    main()
