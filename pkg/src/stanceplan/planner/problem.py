"""Planning problem/result types and the shared objective arithmetic."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DegenerateInput
from ..geometry import CircleRegion, Point2

R_MIN_TOLERANCE = 0.05
LAMBDA_FRACTION = 0.1
# relative tolerance under which two objectives count as equal for tie-breaking
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class StanceCandidate:
    index: int
    circle: CircleRegion
    covered_targets: frozenset[int]
    from_overlap: bool = False

    def __post_init__(self):
        if not self.covered_targets:
            raise DegenerateInput(f"candidate {self.index} covers no target")

    @property
    def n_covered(self) -> int:
        return len(self.covered_targets)

    @property
    def center(self) -> Point2:
        return self.circle.center


@dataclass(frozen=True)
class PlanProblem:
    start: Point2
    end: Point2
    candidates: tuple[StanceCandidate, ...]
    targets: frozenset[int]
    alpha: float = 8.0
    walk_speed: float = 0.36
    lam: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "targets", frozenset(self.targets))
        if not self.walk_speed > 0:
            raise DegenerateInput("walk_speed must be positive")
        if self.alpha < 0:
            raise DegenerateInput("alpha must be >= 0")
        if not 0 <= self.bonus <= self.alpha:
            # the search bounds rely on every stop costing alpha - bonus >= 0
            raise DegenerateInput("lambda must lie in [0, alpha]")
        for pos, cand in enumerate(self.candidates, start=1):
            if cand.index != pos:
                raise DegenerateInput(f"candidate indices must be 1..m in order, got {cand.index} at {pos}")

    @property
    def bonus(self) -> float:
        return LAMBDA_FRACTION * self.alpha if self.lam is None else self.lam

    @property
    def m(self) -> int:
        return len(self.candidates)

    def node_xy(self) -> np.ndarray:
        """Node coordinates: 0 = start, 1..m = candidates, m+1 = end."""
        pts = [self.start] + [c.center for c in self.candidates] + [self.end]
        return np.asarray(pts, dtype=float)

    def distance_matrix(self) -> np.ndarray:
        xy = self.node_xy()
        diff = xy[:, None, :] - xy[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    def stop_cost(self, index: int) -> float:
        return self.alpha - (self.bonus if self.candidates[index - 1].from_overlap else 0.0)


@dataclass(frozen=True)
class PlanResult:
    ordered_stances: tuple[StanceCandidate, ...]
    assignment: dict[int, int]
    objective: float
    travel_distance: float
    stop_count: int
    estimated_time: float | None = None
    optimal: bool = True
    lower_bound: float | None = None
    expanded: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(s.index for s in self.ordered_stances)

    @property
    def gap(self) -> float:
        if self.lower_bound is None:
            return 0.0
        return max(0.0, self.objective - self.lower_bound)


def path_travel(problem: PlanProblem, order: Sequence[int], dist: np.ndarray | None = None) -> float:
    d = problem.distance_matrix() if dist is None else dist
    nodes = [0, *order, problem.m + 1]
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        total += float(d[a, b])
    return total


def path_objective(problem: PlanProblem, order: Sequence[int], dist: np.ndarray | None = None) -> float:
    """alpha * (selected nodes incl. terminals) + travel / v - lambda * (overlap stops)."""
    travel = path_travel(problem, order, dist)
    n_overlap = sum(1 for i in order if problem.candidates[i - 1].from_overlap)
    return problem.alpha * (len(order) + 2) + travel / problem.walk_speed - problem.bonus * n_overlap


def z_key(problem: PlanProblem, order: Sequence[int]) -> int:
    """Integer whose ordering equals lexicographic order of (z_1, ..., z_m)."""
    key = 0
    for i in set(order):
        key |= 1 << (problem.m - i)
    return key


def better(obj_a: float, key_a: int, obj_b: float, key_b: int) -> bool:
    """Strictly preferred: lower objective, equal objectives resolved by smaller z-vector."""
    tol = TIE_RTOL * max(1.0, abs(obj_a), abs(obj_b))
    if obj_a < obj_b - tol:
        return True
    if obj_a > obj_b + tol:
        return False
    return key_a < key_b


def assign_targets(problem: PlanProblem, order: Sequence[int]) -> dict[int, int]:
    """Each target goes to the earliest stance in path order that covers it."""
    out: dict[int, int] = {}
    for i in order:
        for t in sorted(problem.candidates[i - 1].covered_targets & problem.targets):
            out.setdefault(t, i)
    return out


def make_result(problem: PlanProblem, order: Sequence[int], **kw) -> PlanResult:
    d = problem.distance_matrix()
    kw["meta"] = {"start": problem.start, "end": problem.end, **kw.get("meta", {})}
    return PlanResult(
        ordered_stances=tuple(problem.candidates[i - 1] for i in order),
        assignment=assign_targets(problem, order),
        objective=path_objective(problem, order, d),
        travel_distance=path_travel(problem, order, d),
        stop_count=len(order),
        **kw,
    )


def check_coverage(problem: PlanProblem) -> set[int]:
    """Targets no candidate covers."""
    covered: set[int] = set()
    for c in problem.candidates:
        covered |= c.covered_targets
    return set(problem.targets) - covered
