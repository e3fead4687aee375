"""Per-stage wall-clock times against target count."""
import argparse
import json
from pathlib import Path

from stanceplan.pipeline import bench_scaling, format_bench_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    ap.add_argument("--seeds", type=int, default=1)
    ap.add_argument("--overlap", type=float, default=0.5)
    ap.add_argument("--time-budget", type=float, default=None)
    ap.add_argument("--out", default="out/bench.json")
    args = ap.parse_args()

    rows = bench_scaling(args.sizes, args.seeds, overlap_prob=args.overlap, time_budget=args.time_budget)
    print(format_bench_table(rows))
    for r in rows:
        print(f"n={r['n_targets']}: mip {r['mip_status']}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(rows, indent=2) + "\n")


if __name__ == "__main__":
    main()
