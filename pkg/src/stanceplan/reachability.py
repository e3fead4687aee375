"""Feasible base regions from an analytic planar reach model plus SDF obstacle clearance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import shapely

from .errors import DegenerateInput, EmptyRegion, Unreachable
from .geometry import Point2, Polygon2, alpha_shape

DEFAULT_SAMPLES = 10_000
RETRY_FACTOR = 20


@dataclass(frozen=True)
class TargetPose:
    id: int
    position: tuple[float, float, float]
    approach_yaw: float | None = None

    def __post_init__(self):
        if self.position[2] < 0:
            raise DegenerateInput(f"target {self.id}: z must be >= 0")

    @property
    def xy(self) -> Point2:
        return Point2(float(self.position[0]), float(self.position[1]))


@dataclass(frozen=True)
class ArmModel:
    """Two-link arm in the vertical plane through the target, mounted at ``shoulder_height``."""

    shoulder_height: float = 1.3
    l1: float = 0.35
    l2: float = 0.35
    d_floor: float = 0.25

    def __post_init__(self):
        if self.l1 <= 0 or self.l2 <= 0 or self.shoulder_height <= 0 or self.d_floor < 0:
            raise DegenerateInput(f"invalid arm model {self}")


@dataclass(frozen=True)
class Obstacle:
    footprint: Polygon2
    clearance: float = 0.0

    def __post_init__(self):
        if self.clearance < 0:
            raise DegenerateInput("obstacle clearance must be >= 0")


@dataclass(frozen=True)
class FeasibleRegion:
    target_id: int
    polygon: Polygon2
    sample_count: int
    fragmented: bool = False


def reach_band(target: TargetPose, arm: ArmModel) -> tuple[float, float]:
    """Horizontal standoff interval ``(d_min, d_max)`` from which the target is reachable."""
    dz = target.position[2] - arm.shoulder_height
    reach = arm.l1 + arm.l2
    if abs(dz) > reach:
        raise Unreachable(f"target {target.id}: height offset {dz:.3f} exceeds arm reach {reach:.3f}")
    d_max = math.sqrt(reach**2 - dz**2)
    d_min = max(arm.d_floor, math.sqrt(max(0.0, (arm.l1 - arm.l2) ** 2 - dz**2)))
    if d_max <= d_min:
        raise Unreachable(f"target {target.id}: empty reach band ({d_min:.3f}, {d_max:.3f})")
    return d_min, d_max


def sdf_clearance_many(xy: np.ndarray, obstacles: Sequence[Obstacle]) -> np.ndarray:
    """Vectorized :func:`sdf_clearance` over an ``(n, 2)`` array."""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    out = np.full(len(xy), np.inf)
    if not obstacles:
        return out
    pts = shapely.points(xy)
    for obs in obstacles:
        shape = obs.footprint.shape
        d = shapely.distance(pts, shape.boundary)
        inside = shapely.contains_xy(shape, xy[:, 0], xy[:, 1])
        out = np.minimum(out, np.where(inside, -d, d) - obs.clearance)
    return out


def sdf_clearance(p: Point2, obstacles: Sequence[Obstacle]) -> float:
    """Signed distance to the nearest obstacle footprint (negative inside) minus its clearance."""
    return float(sdf_clearance_many(np.array([p], dtype=float), obstacles)[0])


def target_seed(seed: int, target_id: int) -> np.random.SeedSequence:
    """Per-target RNG seed; independent of the order targets are processed in."""
    return np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, target_id & 0xFFFFFFFFFFFFFFFF])


def sample_annulus(
    center: Point2,
    band: tuple[float, float],
    obstacles: Sequence[Obstacle],
    n_samples: int,
    rng: np.random.Generator,
    max_attempts: int | None = None,
) -> tuple[np.ndarray, int]:
    """Uniform annulus samples with SDF rejection. Returns ``(accepted, attempts)``."""
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    d_min, d_max = band
    budget = RETRY_FACTOR * n_samples if max_attempts is None else max_attempts
    accepted = []
    n_acc = 0
    attempts = 0
    while n_acc < n_samples and attempts < budget:
        k = min(n_samples, budget - attempts)
        r = np.sqrt(rng.uniform(d_min**2, d_max**2, k))
        th = rng.uniform(0.0, 2 * math.pi, k)
        xy = np.column_stack([center.x + r * np.cos(th), center.y + r * np.sin(th)])
        hit = np.flatnonzero(sdf_clearance_many(xy, obstacles) > 0)[: n_samples - n_acc]
        accepted.append(xy[hit])
        n_acc += len(hit)
        # attempts stop counting at the sample that filled the quota
        attempts += int(hit[-1]) + 1 if n_acc == n_samples else k
    pts = np.concatenate(accepted) if accepted else np.empty((0, 2))
    return pts, attempts


def sample_feasible_bases(
    target: TargetPose,
    arm: ArmModel,
    obstacles: Sequence[Obstacle],
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> np.ndarray:
    """Up to ``n_samples`` collision-free base positions from which ``target`` is reachable.

    Deterministic in ``(target, arm, obstacles, n_samples, seed)``; the RNG is
    derived from ``seed`` and the target id, so batches can run in any order.
    """
    band = reach_band(target, arm)
    rng = np.random.default_rng(target_seed(seed, target.id))
    pts, _ = sample_annulus(target.xy, band, obstacles, n_samples, rng)
    if len(pts) == 0:
        raise EmptyRegion(f"target {target.id}: no collision-free base sample in reach band")
    return pts


def build_feasible_region(target: TargetPose, samples: np.ndarray, alpha: float) -> FeasibleRegion:
    hull = alpha_shape(samples, alpha)
    return FeasibleRegion(target.id, hull.polygon, len(samples), hull.multiple_components)


def dump_samples(path: str | Path, samples: np.ndarray) -> None:
    np.savetxt(path, np.asarray(samples).reshape(-1, 2), fmt="%.9f")


def load_samples(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, ndmin=2).reshape(-1, 2)
