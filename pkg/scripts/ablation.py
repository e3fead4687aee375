"""Terminal error toward a fixed target with and without single-step correction."""
import argparse
import json
from pathlib import Path

import numpy as np

from stanceplan.execution_sim import GaitParams, goal_reaching_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--sigmas", type=float, nargs="+", default=[0.01, 0.02, 0.04])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/ablation.json")
    args = ap.parse_args()

    results = []
    for sigma in args.sigmas:
        params = GaitParams(drift_sigma=sigma)
        row = {"drift_sigma": sigma}
        for label, enabled in (("single_step", True), ("velocity_only", False)):
            errs = np.array([a.terminal_error for a in goal_reaching_trials(args.trials, params, enabled, args.seed)])
            row[label] = {
                "median_mm": float(np.median(errs) * 1000),
                "p90_mm": float(np.percentile(errs, 90) * 1000),
                "max_mm": float(errs.max() * 1000),
                "within_50mm": float(np.mean(errs <= 0.05)),
            }
        results.append(row)
        on, off = row["single_step"], row["velocity_only"]
        print(
            f"sigma {sigma:.3f}: single-step median {on['median_mm']:.2f} mm (max {on['max_mm']:.1f}); "
            f"velocity-only median {off['median_mm']:.2f} mm (max {off['max_mm']:.1f})"
        )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(results, indent=2) + "\n")


if __name__ == "__main__":
    main()
