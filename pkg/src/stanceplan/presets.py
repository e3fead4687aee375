"""Built-in scenarios: a vehicle inspection layout and a seeded random generator."""
from __future__ import annotations

import math

import numpy as np

from .errors import ValidationError
from .geometry import Point2, Polygon2
from .reachability import Obstacle, TargetPose
from .scenario import PlannerParams, Scenario

# vehicle footprint (m), centred on the origin
CAR_LENGTH = 4.4
CAR_WIDTH = 1.8
CAR_CLEARANCE = 0.1


def _car() -> Obstacle:
    hx, hy = CAR_LENGTH / 2, CAR_WIDTH / 2
    ring = [[-hx, -hy], [hx, -hy], [hx, hy], [-hx, hy]]
    return Obstacle(Polygon2.from_rings([ring]), CAR_CLEARANCE)


# (x, y, z) of inspection points, grouped by where they sit on the body;
# points lie 5 cm inside the footprint edge.
_INSPECTION_POINTS = {
    "front": [(-2.15, -0.45, 0.75), (-2.15, 0.0, 0.9), (-2.15, 0.45, 0.75)],
    "left_front": [(-1.35, 0.85, 0.8), (-0.85, 0.85, 1.0)],
    "left_rear": [(0.6, 0.85, 1.0), (1.05, 0.85, 0.8), (1.5, 0.85, 0.8)],
    "rear": [(2.15, -0.4, 0.85), (2.15, 0.4, 0.85)],
    "right": [(1.3, -0.85, 0.8), (0.6, -0.85, 1.0), (-0.6, -0.85, 1.0), (-1.3, -0.85, 0.8)],
}

# the naive baseline walks once around the car, servicing points one by one
_WALK_AROUND = (2, 1, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3)


def inspection14(seed: int = 0, n_samples: int | None = None) -> Scenario:
    """Fourteen inspection points in five clusters around a car-sized obstacle."""
    targets = []
    tid = 1
    for pts in _INSPECTION_POINTS.values():
        for p in pts:
            targets.append(TargetPose(tid, tuple(float(v) for v in p)))
            tid += 1
    planner = PlannerParams() if n_samples is None else PlannerParams(n_samples=n_samples)
    return Scenario(
        targets=tuple(targets),
        start=Point2(-3.2, -1.6),
        end=Point2(-3.2, -1.6),
        seed=seed,
        obstacles=(_car(),),
        planner=planner,
        naive_order=_WALK_AROUND,
        name="inspection14",
    )


def single_target(seed: int = 0, n_samples: int | None = None) -> Scenario:
    planner = PlannerParams() if n_samples is None else PlannerParams(n_samples=n_samples)
    return Scenario(
        targets=(TargetPose(1, (1.0, 0.0, 1.0)),),
        start=Point2(0.0, 0.0),
        end=Point2(0.0, 0.0),
        seed=seed,
        planner=planner,
        name="single",
    )


def _box(cx: float, cy: float, half: float) -> Polygon2:
    return Polygon2.from_rings([[[cx - half, cy - half], [cx + half, cy - half], [cx + half, cy + half], [cx - half, cy + half]]])


def _on_box(rng: np.random.Generator, cx: float, cy: float, half: float, inset: float) -> tuple[float, float]:
    """Uniform point on the square ring ``inset`` inside the box edge."""
    h = half - inset
    s = rng.uniform(0.0, 8.0 * h)
    side, u = divmod(s, 2.0 * h)
    u -= h
    if side == 0:
        return cx + u, cy - h
    if side == 1:
        return cx + h, cy + u
    if side == 2:
        return cx - u, cy + h
    return cx - h, cy - u


def random_scenario(
    n_targets: int,
    seed: int = 0,
    overlap_prob: float = 0.5,
    n_samples: int | None = None,
    spacing: float = 2.5,
    box_half: float = 0.3,
    max_cluster: int = 4,
) -> Scenario:
    """Inspection sites on a grid, each a box-shaped piece of equipment with targets on its surface.

    Each new target joins an existing site (one holding fewer than
    ``max_cluster`` targets) with probability ``overlap_prob``, so its
    feasible region overlaps those of the site's other targets; otherwise it
    opens a new site. Boxes are obstacles for base placement.
    """
    if isinstance(n_targets, bool) or not isinstance(n_targets, (int, np.integer)) or n_targets < 1:
        raise ValidationError("n_targets", f"must be a positive integer, got {n_targets!r}")
    if not 0.0 <= overlap_prob <= 1.0:
        raise ValidationError("overlap_prob", f"must lie in [0, 1], got {overlap_prob}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, n_targets]))
    side = max(1, math.ceil(math.sqrt(n_targets)))
    grid = [(i * spacing, j * spacing) for i in range(side) for j in range(side)]
    grid_order = rng.permutation(len(grid))
    sites: list[tuple[float, float]] = []
    members: list[int] = []
    targets = []
    for k in range(n_targets):
        open_sites = [s for s in range(len(sites)) if members[s] < max_cluster]
        if open_sites and rng.uniform() < overlap_prob:
            site = open_sites[int(rng.integers(len(open_sites)))]
        else:
            gx, gy = grid[grid_order[len(sites)]]
            jitter = rng.uniform(-0.2, 0.2, 2)
            sites.append((gx + jitter[0], gy + jitter[1]))
            members.append(0)
            site = len(sites) - 1
        members[site] += 1
        x, y = _on_box(rng, *sites[site], box_half, 0.05)
        targets.append(TargetPose(k + 1, (float(x), float(y), float(rng.uniform(0.8, 1.2)))))
    obstacles = tuple(Obstacle(_box(cx, cy, box_half), 0.05) for cx, cy in sites)
    planner = PlannerParams() if n_samples is None else PlannerParams(n_samples=n_samples)
    return Scenario(
        targets=tuple(targets),
        start=Point2(-1.5, -1.5),
        end=Point2(-1.5, -1.5),
        seed=seed,
        obstacles=obstacles,
        planner=planner,
        name=f"random{n_targets}",
    )


PRESETS = {"inspection14": inspection14, "single": single_target}
