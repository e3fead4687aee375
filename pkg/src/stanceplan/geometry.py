"""Planar geometry: alpha-shape hulls, overlap cells and largest inscribed circles.

Polygons are kept as plain coordinate rings (``Polygon2``) so they hash, compare
and serialize cleanly; shapely does the heavy boolean/distance work underneath.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import shapely
from scipy.spatial import Delaunay, Voronoi, cKDTree
from shapely.geometry import Polygon
from shapely.geometry.polygon import orient

from .errors import DegenerateInput, MultipleComponentsWarning

TOL_GEO = 1e-3
MIN_AREA = 1e-3
OVERLAP_DEPTH = 6


class Point2(NamedTuple):
    x: float
    y: float


Ring = tuple[Point2, ...]


@dataclass(frozen=True)
class Polygon2:
    """Simple polygon with optional holes. Exterior CCW, holes CW."""

    exterior: Ring
    holes: tuple[Ring, ...] = ()

    def __post_init__(self):
        if len(self.exterior) < 3:
            raise DegenerateInput("polygon exterior needs at least 3 vertices")
        coords = np.asarray(self.exterior, dtype=float)
        if not np.all(np.isfinite(coords)):
            raise DegenerateInput("polygon has non-finite coordinates")

    @classmethod
    def from_shapely(cls, poly: Polygon) -> "Polygon2":
        poly = orient(poly, 1.0)
        ext = tuple(Point2(float(x), float(y)) for x, y in poly.exterior.coords[:-1])
        holes = tuple(
            tuple(Point2(float(x), float(y)) for x, y in ring.coords[:-1]) for ring in poly.interiors
        )
        return cls(ext, holes)

    @classmethod
    def from_rings(cls, rings: Sequence[Sequence[Sequence[float]]]) -> "Polygon2":
        """Build from ``[exterior, hole, hole, ...]`` nested vertex lists; orientation is normalized."""
        if not rings:
            raise DegenerateInput("polygon needs an exterior ring")
        for ring in rings:
            arr = np.asarray(ring, dtype=float)
            if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
                raise DegenerateInput("every ring needs at least 3 [x, y] vertices")
            if not np.all(np.isfinite(arr)):
                raise DegenerateInput("polygon has non-finite coordinates")
        exterior, *holes = rings
        poly = Polygon(exterior, holes)
        if not poly.is_valid:
            raise DegenerateInput(f"polygon is not simple: {shapely.is_valid_reason(poly)}")
        if not poly.area > 0:
            raise DegenerateInput("polygon has zero area")
        return cls.from_shapely(poly)

    def to_rings(self) -> list[list[list[float]]]:
        return [[[p.x, p.y] for p in self.exterior]] + [[[p.x, p.y] for p in h] for h in self.holes]

    @cached_property
    def shape(self) -> Polygon:
        return Polygon(self.exterior, self.holes)

    @property
    def area(self) -> float:
        return float(self.shape.area)

    @property
    def n_vertices(self) -> int:
        return len(self.exterior) + sum(len(h) for h in self.holes)

    def contains(self, p: Point2, tol: float = 0.0) -> bool:
        pt = shapely.Point(p)
        if tol > 0:
            return bool(self.shape.buffer(tol).covers(pt))
        return bool(self.shape.covers(pt))


@dataclass(frozen=True)
class CircleRegion:
    center: Point2
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DegenerateInput(f"circle radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class OverlapRegion:
    """A cell of the region arrangement: points reachable from exactly ``members``."""

    members: frozenset[int]
    polygon: Polygon2

    @property
    def n(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class HullResult:
    polygon: Polygon2
    n_components: int = 1
    dropped_area: float = 0.0

    @property
    def multiple_components(self) -> bool:
        return self.n_components > 1


def _check_points(points) -> np.ndarray:
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        raise DegenerateInput(f"need at least 3 distinct points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("points contain NaN/Inf")
    centered = pts - pts.mean(axis=0)
    scale = max(float(np.abs(centered).max()), 1e-300)
    if np.linalg.matrix_rank(centered / scale, tol=1e-10) < 2:
        raise DegenerateInput("points are collinear")
    return pts


def _pick_largest(geom) -> tuple[Polygon, int, float]:
    if isinstance(geom, Polygon):
        return geom, 1, 0.0
    parts = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon) and g.area > 0]
    if not parts:
        raise DegenerateInput("alpha shape is empty")
    # largest area first; equal areas broken by lower-left bound for determinism
    parts.sort(key=lambda g: (-round(g.area, 12), g.bounds[0], g.bounds[1]))
    return parts[0], len(parts), float(sum(g.area for g in parts[1:]))


def alpha_shape(points: Iterable, alpha: float) -> HullResult:
    """Alpha shape of ``points``: union of Delaunay triangles with circumradius <= alpha."""
    if not alpha > 0:
        raise DegenerateInput(f"alpha must be positive, got {alpha}")
    pts = _check_points(points)
    if len(pts) < 4:
        hull = shapely.MultiPoint(pts).convex_hull
        return HullResult(Polygon2.from_shapely(hull))

    tri = pts[Delaunay(pts).simplices]
    a = np.linalg.norm(tri[:, 0] - tri[:, 1], axis=1)
    b = np.linalg.norm(tri[:, 1] - tri[:, 2], axis=1)
    c = np.linalg.norm(tri[:, 2] - tri[:, 0], axis=1)
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    area2 = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    with np.errstate(divide="ignore", invalid="ignore"):
        circum = np.where(area2 > 0, a * b * c / (2.0 * area2), np.inf)
    kept = tri[circum <= alpha]
    if len(kept) == 0:
        raise DegenerateInput(f"alpha={alpha} removes every triangle")

    polys = shapely.polygons(np.concatenate([kept, kept[:, :1]], axis=1))
    merged = shapely.coverage_union_all(polys)
    largest, n, dropped = _pick_largest(merged)
    return HullResult(Polygon2.from_shapely(largest), n, dropped)


def concave_hull(points: Iterable, alpha: float) -> Polygon2:
    """Single-component concave hull; warns with MultipleComponentsWarning on fragmentation."""
    res = alpha_shape(points, alpha)
    if res.multiple_components:
        warnings.warn(
            f"alpha shape has {res.n_components} components; kept the largest "
            f"(dropped area {res.dropped_area:.4g})",
            MultipleComponentsWarning,
            stacklevel=2,
        )
    return res.polygon


def _components(geom, min_area: float) -> list[Polygon]:
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        parts = [geom]
    else:
        parts = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]
    return [p for p in parts if p.area >= min_area]


def polygon_overlaps(
    regions: Sequence[tuple[int, Polygon2]],
    depth: int = OVERLAP_DEPTH,
    min_area: float = MIN_AREA,
) -> list[OverlapRegion]:
    """Arrangement cells of the input regions, each tagged with its member-id set.

    Subsets are grown incrementally (pairs, then triples, ...) up to ``depth``.
    A cell for subset S is the intersection of S minus every other region, so
    cells of different subsets never overlap. Subsets at the depth cap keep the
    full intersection. Singletons (N = 1) are the non-overlapping remainders.
    """
    ids = [rid for rid, _ in regions]
    if len(set(ids)) != len(ids):
        raise DegenerateInput("region ids must be unique")
    shapes = [poly.shape for _, poly in regions]
    n = len(shapes)
    if n == 0:
        return []
    shapely.prepare(shapes)
    tree = shapely.STRtree(shapes)
    neighbours: list[set[int]] = [set() for _ in range(n)]
    left, right = tree.query(shapes, predicate="intersects")
    for i, j in zip(left.tolist(), right.tolist()):
        if i != j:
            neighbours[i].add(j)

    # (subset tuple) -> intersection geometry
    level: dict[tuple[int, ...], object] = {(i,): shapes[i] for i in range(n)}
    subsets: dict[tuple[int, ...], object] = dict(level)
    k = 1
    while level and k < depth:
        nxt = {}
        for subset, inter in level.items():
            common = set.intersection(*(neighbours[i] for i in subset))
            for j in sorted(c for c in common if c > subset[-1]):
                g = shapely.intersection(inter, shapes[j])
                if g.area >= min_area:
                    nxt[subset + (j,)] = g
        subsets.update(nxt)
        level = nxt
        k += 1

    cells: list[OverlapRegion] = []
    for subset, inter in subsets.items():
        members = frozenset(ids[i] for i in subset)
        if len(subset) < depth:
            others = set.union(*(neighbours[i] for i in subset)) - set(subset)
            cutters = [shapes[j] for j in sorted(others) if shapes[j].intersects(inter)]
            if cutters:
                inter = shapely.difference(inter, shapely.union_all(cutters))
        for comp in _components(shapely.make_valid(inter) if not inter.is_valid else inter, min_area):
            cells.append(OverlapRegion(members, Polygon2.from_shapely(comp)))

    cells.sort(
        key=lambda c: (-c.n, tuple(sorted(c.members)), c.polygon.shape.centroid.x, c.polygon.shape.centroid.y)
    )
    return cells


# ---------------------------------------------------------------- inscribed circle


def _rings(poly: Polygon2) -> list[np.ndarray]:
    return [np.asarray(r, dtype=float) for r in (poly.exterior, *poly.holes)]


def _resample(poly: Polygon2, spacing: float) -> np.ndarray:
    out = []
    for ring in _rings(poly):
        nxt = np.roll(ring, -1, axis=0)
        for a, b in zip(ring, nxt):
            seg = float(np.hypot(*(b - a)))
            k = max(1, int(math.ceil(seg / spacing)))
            t = np.arange(k)[:, None] / k
            out.append(a + t * (b - a))
    return np.concatenate(out)


def _clearance(shape: Polygon, xy: np.ndarray) -> np.ndarray:
    """Signed distance to the boundary, positive inside."""
    pts = shapely.points(xy)
    d = shapely.distance(pts, shape.boundary)
    inside = shapely.contains_xy(shape, xy[:, 0], xy[:, 1])
    return np.where(inside, d, -d)


def _lex_best(xy: np.ndarray, clear: np.ndarray, window: float) -> int:
    best = clear.max()
    idx = np.flatnonzero(clear >= best - window)
    order = np.lexsort((xy[idx, 1], xy[idx, 0]))
    return int(idx[order[0]])


def _lex_slide(shape: Polygon, p: np.ndarray, window: float) -> tuple[np.ndarray, float]:
    """Move ``p`` toward smaller x, then smaller y, while clearance stays within ``window``.

    Resolves flat maxima (e.g. the center line of a rectangle) to their
    lexicographically smallest end.
    """
    p = np.asarray(p, dtype=float)
    best = float(_clearance(shape, p[None])[0])
    span = max(shape.bounds[2] - shape.bounds[0], shape.bounds[3] - shape.bounds[1])
    for axis in (0, 1):
        step = np.zeros(2)
        step[axis] = -1.0

        def ok(s: float) -> bool:
            return _clearance(shape, (p + s * step)[None])[0] >= best - window

        lo, hi = 0.0, span * 1e-6
        if not ok(hi):
            continue
        while hi < span and ok(2 * hi):
            hi *= 2
        lo, hi = hi, min(2 * hi, span)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        p = p + lo * step
    return p, float(_clearance(shape, p[None])[0])


def _grid_chebyshev(poly: Polygon2, precision: float) -> tuple[np.ndarray, float]:
    """Cell-subdivision search for the point of maximal clearance.

    Cells whose optimistic bound can still reach the incumbent (minus the tie
    window) are split until their half-diagonal drops below ``precision``.
    """
    shape = poly.shape
    window = precision * 1e-3
    minx, miny, maxx, maxy = shape.bounds
    size = max(maxx - minx, maxy - miny)
    nx = max(1, int(math.ceil((maxx - minx) / size * 8)))
    ny = max(1, int(math.ceil((maxy - miny) / size * 8)))
    h = size / 8
    xs = minx + (np.arange(nx) + 0.5) * h
    ys = miny + (np.arange(ny) + 0.5) * h
    centers = np.array([(x, y) for x in xs for y in ys])
    c = shape.centroid
    # symmetric shapes have their optimum at one of these two seeds
    centers = np.vstack([centers, [[(minx + maxx) / 2, (miny + maxy) / 2], [c.x, c.y]]])
    seen_xy = [centers]
    clear = _clearance(shape, centers)
    seen_c = [clear]
    best = clear.max()
    while h / math.sqrt(2) > precision / 4:
        keep = clear + h / math.sqrt(2) >= best - window
        centers = centers[keep]
        if len(centers) == 0:
            break
        h /= 2
        q = h / 2
        offs = np.array([(-q, -q), (-q, q), (q, -q), (q, q)])
        centers = (centers[:, None, :] + offs[None]).reshape(-1, 2)
        clear = _clearance(shape, centers)
        seen_xy.append(centers)
        seen_c.append(clear)
        best = max(best, clear.max())
    xy = np.concatenate(seen_xy)
    cl = np.concatenate(seen_c)
    i = _lex_best(xy, cl, window)
    return _lex_slide(shape, xy[i], window)


def largest_inscribed_circle(
    polygon: Polygon2, tol: float = TOL_GEO, min_area: float = MIN_AREA
) -> CircleRegion:
    """Largest circle inside ``polygon`` (its Chebyshev center and clearance).

    Uses Voronoi vertices of the boundary resampled at spacing ``tol`` as
    medial-axis candidates; polygons with fewer than 6 vertices go through a
    cell-subdivision search instead. Ties go to the lexicographically smallest
    center.
    """
    if polygon.area < min_area:
        raise DegenerateInput(f"polygon area {polygon.area:.3g} below {min_area}")
    shape = polygon.shape
    if polygon.n_vertices < 6:
        center, r = _grid_chebyshev(polygon, tol / 10)
        return CircleRegion(Point2(float(center[0]), float(center[1])), r)

    perimeter = float(shape.exterior.length + sum(h.length for h in shape.interiors))
    spacing = max(tol, perimeter / 100_000)
    samples = _resample(polygon, spacing)
    # joggled input: collinear boundary samples make exact Qhull very slow
    vor = Voronoi(samples, qhull_options="QJ")
    verts = vor.vertices
    inside = shapely.contains_xy(shape, verts[:, 0], verts[:, 1])
    verts = verts[inside]
    if len(verts):
        # nearest-sample distance overestimates the boundary distance by < spacing
        approx, _ = cKDTree(samples).query(verts)
        verts = verts[approx >= approx.max() - 2 * spacing]
    if len(verts) == 0:
        center, r = _grid_chebyshev(polygon, tol / 10)
        return CircleRegion(Point2(float(center[0]), float(center[1])), r)
    clear = _clearance(shape, verts)
    i = _lex_best(verts, clear, 1e-9)
    center, r = _lex_slide(shape, verts[i], 1e-9)
    return CircleRegion(Point2(float(center[0]), float(center[1])), r)


def circle_clearance(circle: CircleRegion, polygon: Polygon2) -> float:
    """Boundary distance of the circle center minus its radius (>= 0 means contained)."""
    xy = np.array([circle.center], dtype=float)
    return float(_clearance(polygon.shape, xy)[0] - circle.radius)
