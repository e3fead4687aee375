"""Static SVG figures and a JSON metrics file for a pipeline run."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle, PathPatch  # noqa: E402
from matplotlib.path import Path as MplPath  # noqa: E402

from .execution_sim import SimTrace  # noqa: E402
from .planner import PlanResult  # noqa: E402
from .reachability import FeasibleRegion, Obstacle  # noqa: E402


def _polygon_patch(rings, **kw) -> PathPatch:
    verts, codes = [], []
    for ring in rings:
        ring = np.asarray(ring, dtype=float)
        verts.extend(ring.tolist() + [ring[0].tolist()])
        codes.extend([MplPath.MOVETO] + [MplPath.LINETO] * (len(ring) - 1) + [MplPath.CLOSEPOLY])
    return PathPatch(MplPath(verts, codes), **kw)


def _path_xy(plan: PlanResult) -> np.ndarray:
    pts = [s.center for s in plan.ordered_stances]
    if plan.meta.get("start") is not None:
        pts.insert(0, plan.meta["start"])
    if plan.meta.get("end") is not None:
        pts.append(plan.meta["end"])
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def plot_plan(
    plan: PlanResult,
    baseline: PlanResult | None,
    path: Path,
    regions: Sequence[FeasibleRegion] = (),
    obstacles: Sequence[Obstacle] = (),
) -> list[dict]:
    """Regions, tolerance circles of the chosen stances and both paths. Returns the drawn circles."""
    fig, ax = plt.subplots(figsize=(7, 5))
    cmap = plt.get_cmap("tab20")
    for k, r in enumerate(regions):
        ax.add_patch(_polygon_patch(r.polygon.to_rings(), fc=cmap(k % 20), ec="none", alpha=0.25))
    for o in obstacles:
        ax.add_patch(_polygon_patch(o.footprint.to_rings(), fc="0.6", ec="k", lw=1.0))
    drawn = []
    for s in plan.ordered_stances:
        c = s.circle
        ax.add_patch(Circle(c.center, c.radius, fill=False, ec="tab:red", lw=1.5, gid=f"stance-{s.index}"))
        drawn.append({"index": s.index, "center": list(c.center), "radius": c.radius})
    if baseline is not None and baseline.ordered_stances:
        xy = _path_xy(baseline)
        ax.plot(xy[:, 0], xy[:, 1], ls="--", lw=1.0, color="0.4", label=f"naive ({baseline.stop_count} stops)")
    xy = _path_xy(plan)
    ax.plot(xy[:, 0], xy[:, 1], "-o", ms=3, lw=1.5, color="tab:red", label=f"MIP ({plan.stop_count} stops)")
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return drawn


def plot_errors(trace: SimTrace, plan: PlanResult, path: Path) -> None:
    """Terminal offsets from each stance centre (scatter) and their magnitudes (box)."""
    centers = {s.index: np.asarray(s.center) for s in plan.ordered_stances}
    off = np.array([np.asarray(a.position) - centers[a.stance_index] for a in trace.stance_arrivals])
    errs = np.array(trace.terminal_errors)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 4), gridspec_kw={"width_ratios": [2, 1]})
    ax1.scatter(off[:, 0], off[:, 1], s=12)
    r = min((s.circle.radius for s in plan.ordered_stances), default=0.05)
    ax1.add_patch(Circle((0, 0), r, fill=False, ls="--", ec="k"))
    ax1.set_aspect("equal")
    ax1.set_xlabel("dx [m]")
    ax1.set_ylabel("dy [m]")
    ax2.boxplot(errs)
    ax2.set_ylabel("terminal error [m]")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def emit_figures(
    plan: PlanResult,
    baseline: PlanResult | None,
    trace: SimTrace | None,
    out_dir: str | Path,
    *,
    regions: Sequence[FeasibleRegion] = (),
    obstacles: Sequence[Obstacle] = (),
    report: dict | None = None,
) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    metrics: dict = {"notes": []}

    plan_svg = out / "plan.svg"
    metrics["circles"] = plot_plan(plan, baseline, plan_svg, regions, obstacles)
    files.append(plan_svg)

    if trace is not None and trace.stance_arrivals:
        err_svg = out / "errors.svg"
        plot_errors(trace, plan, err_svg)
        files.append(err_svg)
        errs = np.array(trace.terminal_errors)
        metrics["terminal_error"] = {
            "n": int(len(errs)),
            "median": float(np.median(errs)),
            "max": float(errs.max()),
            "mean": float(errs.mean()),
        }
        metrics["total_time"] = trace.total_time
    else:
        metrics["notes"].append("no stance arrivals in trace; error scatter omitted")

    metrics["plan"] = {"stop_count": plan.stop_count, "estimated_time": plan.estimated_time, "order": list(plan.order)}
    if baseline is not None:
        metrics["baseline"] = {"stop_count": baseline.stop_count, "estimated_time": baseline.estimated_time}
    if report is not None:
        metrics["report"] = report
    metrics_path = out / "metrics.json"
    metrics_path.write_text(json.dumps(metrics, indent=2) + "\n")
    files.append(metrics_path)
    return files
