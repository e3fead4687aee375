"""Stance selection: tolerance-circle candidates, the MIP model, its exact solver and baselines."""
from .baselines import brute_force_plan, naive_plan
from .candidates import enumerate_candidates
from .mip import LinearRow, MipModel, build_mip
from .problem import PlanProblem, PlanResult, StanceCandidate, path_objective, path_travel
from .search import solve_mip

__all__ = [
    "LinearRow",
    "MipModel",
    "PlanProblem",
    "PlanResult",
    "StanceCandidate",
    "brute_force_plan",
    "build_mip",
    "enumerate_candidates",
    "naive_plan",
    "path_objective",
    "path_travel",
    "solve_mip",
]
