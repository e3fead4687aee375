"""Standing-position planning for mobile inspection with a humanoid.

Pipeline: sample reachable base positions per target, hull them into
feasible regions, split the regions into overlap cells, put a tolerance
circle in each cell, then choose and order stances with a MIP. An
execution simulator walks the plan.
"""
from .errors import StancePlanError
from .geometry import CircleRegion, OverlapRegion, Point2, Polygon2
from .planner import PlanProblem, PlanResult, StanceCandidate, brute_force_plan, build_mip, naive_plan, solve_mip
from .scenario import Scenario, load_scenario, save_scenario

__version__ = "0.1.0"

__all__ = [
    "CircleRegion",
    "OverlapRegion",
    "PlanProblem",
    "PlanResult",
    "Point2",
    "Polygon2",
    "Scenario",
    "StanceCandidate",
    "StancePlanError",
    "brute_force_plan",
    "build_mip",
    "load_scenario",
    "naive_plan",
    "save_scenario",
    "solve_mip",
]
