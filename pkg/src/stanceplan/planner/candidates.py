"""Tolerance circles: one largest inscribed circle per arrangement cell."""
from __future__ import annotations

import math
from typing import Sequence

from ..errors import DegenerateInput, UncoverableTarget
from ..geometry import MIN_AREA, OVERLAP_DEPTH, TOL_GEO, largest_inscribed_circle, polygon_overlaps
from ..reachability import FeasibleRegion
from .problem import R_MIN_TOLERANCE, StanceCandidate


def enumerate_candidates(
    regions: Sequence[FeasibleRegion],
    r_min_tolerance: float = R_MIN_TOLERANCE,
    *,
    depth: int = OVERLAP_DEPTH,
    tol: float = TOL_GEO,
    min_area: float = MIN_AREA,
) -> list[StanceCandidate]:
    if not regions:
        raise DegenerateInput("no feasible regions")
    cells = polygon_overlaps([(r.target_id, r.polygon) for r in regions], depth=depth, min_area=min_area)
    out: list[StanceCandidate] = []
    for cell in cells:
        # a disk of radius r needs at least pi r^2 of area
        if cell.polygon.area < math.pi * r_min_tolerance**2:
            continue
        try:
            circle = largest_inscribed_circle(cell.polygon, tol=tol, min_area=min_area)
        except DegenerateInput:
            continue
        if circle.radius < r_min_tolerance:
            continue
        out.append(StanceCandidate(len(out) + 1, circle, cell.members, cell.n > 1))

    covered = set().union(*(c.covered_targets for c in out)) if out else set()
    missing = sorted({r.target_id for r in regions} - covered)
    if missing:
        raise UncoverableTarget(f"targets {missing} have no tolerance circle of radius >= {r_min_tolerance}")
    return out
