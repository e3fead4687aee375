"""End-to-end run: sampling, hulls, overlap cells and circles, MIP, simulation."""
from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import StancePlanError, ValidationError
from .execution_sim import SimTrace, estimate_plan_time, simulate
from .geometry import CircleRegion, Point2
from .planner import PlanProblem, PlanResult, StanceCandidate, build_mip, enumerate_candidates, naive_plan, solve_mip
from .reachability import FeasibleRegion, build_feasible_region, sample_feasible_bases
from .scenario import Scenario

log = logging.getLogger(__name__)

STAGES = ("sampling", "hulls", "overlaps_circles", "mip", "simulation")


@dataclass
class RunReport:
    stage_times: dict[str, float]
    plan: dict
    baseline: dict
    mip_estimate: float
    naive_estimate: float
    n_candidates: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def improvement_ratio(self) -> float:
        if self.naive_estimate == 0:
            return 0.0
        return 1.0 - self.mip_estimate / self.naive_estimate

    def to_dict(self) -> dict:
        return {
            "stage_times": self.stage_times,
            "plan": self.plan,
            "baseline": self.baseline,
            "mip_estimate": self.mip_estimate,
            "naive_estimate": self.naive_estimate,
            "improvement_ratio": self.improvement_ratio,
            "n_candidates": self.n_candidates,
            "warnings": self.warnings,
        }


@dataclass
class PipelineRun:
    plan: PlanResult
    baseline: PlanResult
    trace: SimTrace | None
    report: RunReport
    regions: list[FeasibleRegion]
    candidates: list[StanceCandidate]
    problem: PlanProblem

    def __iter__(self) -> Iterator:
        # unpacks as (plan, baseline, trace, report)
        return iter((self.plan, self.baseline, self.trace, self.report))


@contextmanager
def _stage(name: str, times: dict[str, float]):
    t0 = time.perf_counter()
    try:
        yield
    except StancePlanError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    finally:
        times[name] = time.perf_counter() - t0


def plan_summary(plan: PlanResult, estimate: float) -> dict:
    return {
        "stop_count": plan.stop_count,
        "travel_distance": plan.travel_distance,
        "objective": plan.objective,
        "estimated_time": estimate,
        "optimal": plan.optimal,
        "lower_bound": plan.lower_bound,
        "order": list(plan.order),
    }


def build_regions(scn: Scenario, times: dict[str, float] | None = None) -> list[FeasibleRegion]:
    times = {} if times is None else times
    with _stage("sampling", times):
        samples = [
            sample_feasible_bases(t, scn.arm, scn.obstacles, scn.planner.n_samples, scn.seed) for t in scn.targets
        ]
    with _stage("hulls", times):
        regions = [build_feasible_region(t, s, scn.planner.alpha_hull) for t, s in zip(scn.targets, samples)]
    return regions


def make_problem(scn: Scenario, candidates) -> PlanProblem:
    return PlanProblem(
        start=scn.start,
        end=scn.goal,
        candidates=tuple(candidates),
        targets=frozenset(t.id for t in scn.targets),
        alpha=scn.alpha,
        walk_speed=scn.walk_speed,
        lam=scn.lam,
    )


def run_pipeline(
    scn: Scenario,
    *,
    run_simulation: bool = True,
    time_budget: float | None = None,
    single_step_enabled: bool = True,
) -> PipelineRun:
    times: dict[str, float] = {}
    warnings: list[str] = []
    regions = build_regions(scn, times)
    for r in regions:
        if r.fragmented:
            warnings.append(f"target {r.target_id}: feasible region fragmented, largest component kept")

    with _stage("overlaps_circles", times):
        candidates = enumerate_candidates(regions, scn.planner.r_min_tolerance)

    budget = scn.planner.time_budget if time_budget is None else time_budget
    with _stage("mip", times):
        problem = make_problem(scn, candidates)
        plan = solve_mip(build_mip(problem), time_budget=budget)
        baseline = naive_plan(problem, scn.target_order)

    n_targets = len(scn.targets)
    mip_est = estimate_plan_time(plan, scn.gait, scn.timing.t_stop, scn.timing.t_scan, n_targets)
    naive_est = estimate_plan_time(baseline, scn.gait, scn.timing.t_stop, scn.timing.t_scan, n_targets)
    plan = _with_estimate(plan, mip_est)
    baseline = _with_estimate(baseline, naive_est)

    trace = None
    if run_simulation:
        with _stage("simulation", times):
            trace = simulate(plan, scn.gait, seed=scn.seed, single_step_enabled=single_step_enabled)

    report = RunReport(
        stage_times=times,
        plan=plan_summary(plan, mip_est),
        baseline=plan_summary(baseline, naive_est),
        mip_estimate=mip_est,
        naive_estimate=naive_est,
        n_candidates=len(candidates),
        warnings=warnings,
    )
    log.info("plan: %d stops, %.1f s estimated (naive %.1f s)", plan.stop_count, mip_est, naive_est)
    return PipelineRun(plan, baseline, trace, report, regions, candidates, problem)


def _with_estimate(plan: PlanResult, est: float) -> PlanResult:
    return replace(plan, estimated_time=est)


# ------------------------------------------------------------------ plan files


def plan_to_dict(plan: PlanResult) -> dict:
    return {
        "ordered_stances": [
            {
                "index": s.index,
                "center": list(s.center),
                "radius": s.circle.radius,
                "covered_targets": sorted(s.covered_targets),
                "from_overlap": s.from_overlap,
            }
            for s in plan.ordered_stances
        ],
        "assignment": {str(t): i for t, i in sorted(plan.assignment.items())},
        "objective": plan.objective,
        "travel_distance": plan.travel_distance,
        "stop_count": plan.stop_count,
        "estimated_time": plan.estimated_time,
        "optimal": plan.optimal,
        "lower_bound": plan.lower_bound,
        "expanded": plan.expanded,
        "start": list(plan.meta["start"]) if plan.meta.get("start") is not None else None,
        "end": list(plan.meta["end"]) if plan.meta.get("end") is not None else None,
    }


def plan_from_dict(data: dict) -> PlanResult:
    try:
        stances = tuple(
            StanceCandidate(
                int(s["index"]),
                CircleRegion(Point2(*map(float, s["center"])), float(s["radius"])),
                frozenset(int(t) for t in s["covered_targets"]),
                bool(s["from_overlap"]),
            )
            for s in data["ordered_stances"]
        )
        meta = {k: Point2(*data[k]) for k in ("start", "end") if data.get(k) is not None}
        return PlanResult(
            ordered_stances=stances,
            assignment={int(t): int(i) for t, i in data["assignment"].items()},
            objective=float(data["objective"]),
            travel_distance=float(data["travel_distance"]),
            stop_count=int(data["stop_count"]),
            estimated_time=data.get("estimated_time"),
            optimal=bool(data.get("optimal", True)),
            lower_bound=data.get("lower_bound"),
            expanded=int(data.get("expanded", 0)),
            meta=meta,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("plan", f"malformed plan file: {exc}") from exc


def save_plan(plan: PlanResult, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n")
    return path


def load_plan(path: str | Path) -> PlanResult:
    return plan_from_dict(json.loads(Path(path).read_text()))


# ------------------------------------------------------------------ benchmark


def bench_scaling(
    n_targets_list,
    seeds: int = 1,
    *,
    overlap_prob: float = 0.5,
    base_seed: int = 0,
    time_budget: float | None = None,
    n_samples: int | None = None,
    run_simulation: bool = False,
) -> list[dict]:
    """Mean per-stage wall-clock times of the pipeline on random scenarios of each size."""
    from .presets import random_scenario

    sizes = list(n_targets_list)
    if not sizes:
        raise ValidationError("n_targets_list", "must not be empty")
    for n in sizes:
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError("n_targets_list", f"sizes must be positive integers, got {n!r}")
    if seeds < 1:
        raise ValidationError("seeds", "must be >= 1")

    rows = []
    for n in sizes:
        per_stage: dict[str, list[float]] = {s: [] for s in STAGES}
        totals, statuses = [], []
        for k in range(seeds):
            scn = random_scenario(int(n), seed=base_seed + k, overlap_prob=overlap_prob, n_samples=n_samples)
            t0 = time.perf_counter()
            run = run_pipeline(scn, run_simulation=run_simulation, time_budget=time_budget)
            totals.append(time.perf_counter() - t0)
            for s, v in run.report.stage_times.items():
                per_stage[s].append(v)
            statuses.append("optimal" if run.plan.optimal else "bounded")
        row = {"n_targets": int(n), "runs": seeds}
        row.update({f"{s}_s": float(np.mean(v)) for s, v in per_stage.items() if v})
        row["total_s_max"] = float(max(totals))
        row["mip_status"] = statuses
        rows.append(row)
        log.info("bench n=%d: %s", n, row)
    return rows


def format_bench_table(rows: list[dict]) -> str:
    cols = ["n_targets", "sampling_s", "hulls_s", "overlaps_circles_s", "mip_s", "total_s_max"]
    lines = ["  ".join(f"{c:>18}" for c in cols)]
    for r in rows:
        lines.append("  ".join(f"{r.get(c, float('nan')):>18.4f}" if c != "n_targets" else f"{r[c]:>18d}" for c in cols))
    return "\n".join(lines)
