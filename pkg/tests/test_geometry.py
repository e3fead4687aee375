import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grid_chebyshev, inside, point_segment_distance, random_star_polygon, raster_area, segments
from stanceplan.errors import DegenerateInput, MultipleComponentsWarning
from stanceplan.geometry import (
    TOL_GEO,
    Point2,
    Polygon2,
    alpha_shape,
    circle_clearance,
    concave_hull,
    largest_inscribed_circle,
    polygon_overlaps,
)

SQUARE = [[0, 0], [1, 0], [1, 1], [0, 1]]
L_SHAPE = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]


def square(x0=0.0, y0=0.0, s=1.0):
    return Polygon2.from_rings([[[x0, y0], [x0 + s, y0], [x0 + s, y0 + s], [x0, y0 + s]]])


# --- Polygon2 ------------------------------------------------------------------


def test_polygon_orientation_normalised():
    cw = Polygon2.from_rings([SQUARE[::-1]])
    ring = np.asarray(cw.exterior)
    x, y = ring[:, 0], ring[:, 1]
    signed = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert signed > 0
    assert cw.area == pytest.approx(1.0)


def test_polygon_rings_round_trip():
    p = Polygon2.from_rings([[[0, 0], [4, 0], [4, 4], [0, 4]], [[1, 1], [1, 2], [2, 2], [2, 1]]])
    assert Polygon2.from_rings(p.to_rings()) == p
    assert p.area == pytest.approx(15.0)


@pytest.mark.parametrize("rings", [[[[0, 0], [1, 0]]], [[[0, 0], [1, 1], [2, 2]]], [[[0, 0], [1, 1], [1, 0], [0, 1]]]])
def test_polygon_rejects_degenerate(rings):
    with pytest.raises(DegenerateInput):
        Polygon2.from_rings(rings)


def test_point2_rejects_nan():
    with pytest.raises(DegenerateInput):
        Polygon2.from_rings([[[0, 0], [1, 0], [float("nan"), 1]]])


# --- concave hull -----------------------------------------------------------------


def test_hull_square_corners_large_alpha():
    poly = concave_hull(SQUARE, 100.0)
    assert poly.area == pytest.approx(1.0)
    assert sorted(map(tuple, np.round(poly.exterior, 12))) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_hull_rejects_collinear_and_tiny():
    with pytest.raises(DegenerateInput):
        concave_hull([[0, 0], [1, 1], [2, 2], [3, 3]], 1.0)
    with pytest.raises(DegenerateInput):
        concave_hull([[0, 0], [1, 1]], 1.0)
    with pytest.raises(DegenerateInput):
        concave_hull(SQUARE, 0.0)


def test_hull_two_clusters_keeps_larger_and_warns():
    g = np.arange(10) * 0.1
    a = np.array([(x, y) for x in g for y in g])
    b = np.array([(x + 5, y) for x in g[:8] for y in g[:8]])
    res = alpha_shape(np.vstack([a, b]), 0.3)
    assert res.n_components == 2 and res.multiple_components
    assert res.polygon.area == pytest.approx(0.81, rel=1e-6)
    with pytest.warns(MultipleComponentsWarning):
        concave_hull(np.vstack([a, b]), 0.3)


def test_hull_annulus_area_and_hole():
    rng = np.random.default_rng(0)
    r = np.sqrt(rng.uniform(1, 4, 1000))
    th = rng.uniform(0, 2 * math.pi, 1000)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MultipleComponentsWarning)
        poly = concave_hull(pts, 0.3)
    assert len(poly.holes) >= 1
    # area checked against a 1 cm raster of the returned rings, and against 3*pi
    area = raster_area([poly.to_rings()], step=0.01)
    assert area == pytest.approx(poly.area, rel=0.01)
    assert abs(area - 3 * math.pi) <= 0.1 * 3 * math.pi


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.floats(0.3, 5.0))
def test_hull_within_convex_hull_and_keeps_points(seed, alpha):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (200, 2))
    res = alpha_shape(pts, alpha)
    convex = Polygon2.from_shapely(res.polygon.shape.convex_hull)
    assert res.polygon.area <= convex.area + 1e-9
    if not res.multiple_components:
        kept = inside(res.polygon.to_rings(), pts) | (
            point_segment_distance(pts, segments(res.polygon.to_rings())) <= 1e-9
        )
        assert kept.mean() >= 0.99


def test_hull_deterministic():
    pts = np.random.default_rng(3).normal(size=(500, 2))
    assert concave_hull(pts, 0.5) == concave_hull(pts[::-1], 0.5)


# --- overlaps ---------------------------------------------------------------------


def cell_map(cells):
    out = {}
    for c in cells:
        out.setdefault(c.members, []).append(c)
    return out


def test_overlaps_two_offset_squares():
    cells = cell_map(polygon_overlaps([(1, square()), (2, square(0.5))]))
    assert set(cells) == {frozenset({1, 2}), frozenset({1}), frozenset({2})}
    assert cells[frozenset({1, 2})][0].polygon.area == pytest.approx(0.5)
    assert cells[frozenset({1})][0].polygon.area == pytest.approx(0.5)
    assert cells[frozenset({1, 2})][0].n == 2


def test_overlaps_disjoint_squares():
    cells = polygon_overlaps([(1, square()), (2, square(3))])
    assert sorted(c.n for c in cells) == [1, 1]
    assert polygon_overlaps([]) == []


def test_overlaps_three_squares_raster_oracle():
    polys = [square(0), square(0.4), square(0.8)]
    cells = polygon_overlaps(list(zip([1, 2, 3], polys)))
    by = cell_map(cells)
    triple = by[frozenset({1, 2, 3})]
    assert len(triple) == 1
    assert triple[0].polygon.area == pytest.approx(0.2, rel=1e-9)
    # each cell's area against a 5 mm raster of exact membership
    step = 0.005
    xs = np.arange(-0.1 + step / 2, 2.0, step)
    ys = np.arange(-0.1 + step / 2, 1.1, step)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    member = np.array([inside(p.to_rings(), pts) for p in polys])
    for key, cs in by.items():
        want = np.ones(len(pts), dtype=bool)
        for k, rid in enumerate([1, 2, 3]):
            want &= member[k] if rid in key else ~member[k]
        raster = want.sum() * step * step
        got = sum(c.polygon.area for c in cs)
        assert got == pytest.approx(raster, rel=0.01), key


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_overlap_cells_inside_members_and_disjoint(seed):
    rng = np.random.default_rng(seed)
    regions = []
    for rid in range(int(rng.integers(2, 5))):
        ring = random_star_polygon(rng) + rng.uniform(-0.6, 0.6, 2)
        regions.append((rid, Polygon2.from_rings([ring.tolist()])))
    cells = polygon_overlaps(regions)
    shapes = dict(regions)
    for c in cells:
        assert c.polygon.area >= 1e-3
        # 100 interior samples of the cell lie in every member and outside non-members
        pts = _sample_inside(c.polygon, rng, 100)
        for rid, poly in regions:
            d = point_segment_distance(pts, segments(poly.to_rings()))
            ins = inside(poly.to_rings(), pts)
            if rid in c.members:
                assert np.all(ins | (d <= TOL_GEO))
            else:
                assert np.all(~ins | (d <= TOL_GEO))
    for members, cs in cell_map(cells).items():
        for a in range(len(cs)):
            for b in range(a + 1, len(cs)):
                assert cs[a].polygon.shape.intersection(cs[b].polygon.shape).area <= TOL_GEO
    # cells tile the union, up to slivers below min_area that are dropped
    lost = _union_area(list(shapes.values())) - sum(c.polygon.area for c in cells)
    assert -1e-9 <= lost <= 1e-3 * 2 ** len(regions)


def _sample_inside(poly, rng, n):
    lo = np.min(poly.exterior, axis=0)
    hi = np.max(poly.exterior, axis=0)
    out = []
    while len(out) < n:
        p = rng.uniform(lo, hi, (4 * n, 2))
        out.extend(p[inside(poly.to_rings(), p)].tolist())
    return np.asarray(out[:n])


def _union_area(polys):
    import shapely

    return shapely.union_all([p.shape for p in polys]).area


def test_overlaps_depth_cap_keeps_full_intersection():
    polys = [(i, square(0.01 * i)) for i in range(4)]
    cells = polygon_overlaps(polys, depth=2)
    assert max(c.n for c in cells) == 2
    pair = [c for c in cells if c.members == frozenset({0, 1})][0]
    assert pair.polygon.area == pytest.approx(0.99 * 1.0)


# --- largest inscribed circle ---------------------------------------------------------


def test_lic_unit_square():
    c = largest_inscribed_circle(Polygon2.from_rings([SQUARE]))
    assert c.radius == pytest.approx(0.5, abs=TOL_GEO)
    assert c.center.x == pytest.approx(0.5, abs=TOL_GEO)
    assert c.center.y == pytest.approx(0.5, abs=TOL_GEO)


def test_lic_rectangle_tie_break_smallest_x():
    c = largest_inscribed_circle(Polygon2.from_rings([[[0, 0], [2, 0], [2, 1], [0, 1]]]))
    assert c.radius == pytest.approx(0.5, abs=TOL_GEO)
    assert c.center.y == pytest.approx(0.5, abs=TOL_GEO)
    # every x in [0.5, 1.5] is optimal; the smallest one is chosen
    assert c.center.x == pytest.approx(0.5, abs=2 * TOL_GEO)


def test_lic_l_shape_matches_grid_oracle():
    c = largest_inscribed_circle(Polygon2.from_rings([L_SHAPE]))
    _, r_grid = grid_chebyshev([L_SHAPE])
    assert abs(c.radius - r_grid) <= 1e-2
    assert c.radius == pytest.approx(math.sqrt(2) / (1 + math.sqrt(2)), abs=TOL_GEO)


def test_lic_with_hole():
    outer = [[0, 0], [4, 0], [4, 4], [0, 4]]
    hole = [[1.5, 1.5], [1.5, 2.5], [2.5, 2.5], [2.5, 1.5]]
    c = largest_inscribed_circle(Polygon2.from_rings([outer, hole]))
    _, r_grid = grid_chebyshev([outer, hole])
    assert abs(c.radius - r_grid) <= 1e-2
    d = point_segment_distance(np.array([c.center]), segments([outer, hole]))[0]
    assert d >= c.radius - TOL_GEO
    assert inside([outer, hole], np.array([c.center]))[0]


def test_lic_rejects_tiny_polygon():
    with pytest.raises(DegenerateInput):
        largest_inscribed_circle(square(s=0.01))


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_lic_contained_and_near_oracle(seed):
    rng = np.random.default_rng(seed)
    ring = random_star_polygon(rng)
    poly = Polygon2.from_rings([ring.tolist()])
    c = largest_inscribed_circle(poly)
    rings = poly.to_rings()
    d = point_segment_distance(np.array([c.center]), segments(rings))[0]
    assert inside(rings, np.array([c.center]))[0]
    assert d >= c.radius - TOL_GEO
    assert circle_clearance(c, poly) >= -TOL_GEO
    _, r_grid = grid_chebyshev(rings, step=0.01)
    # the grid optimum can only undershoot the true radius, by at most one cell diagonal
    assert c.radius >= r_grid - TOL_GEO
    assert c.radius <= r_grid + 0.01 * math.sqrt(2) / 2 + TOL_GEO


def test_lic_deterministic_under_vertex_rotation():
    ring = random_star_polygon(np.random.default_rng(9), n=9)
    a = largest_inscribed_circle(Polygon2.from_rings([ring.tolist()]))
    b = largest_inscribed_circle(Polygon2.from_rings([np.roll(ring, 3, axis=0).tolist()]))
    assert a.radius == pytest.approx(b.radius, abs=1e-6)
    assert math.dist(a.center, b.center) <= 1e-3


def test_contains_with_tolerance():
    p = square()
    assert p.contains(Point2(0.5, 0.5))
    assert not p.contains(Point2(1.0005, 0.5))
    assert p.contains(Point2(1.0005, 0.5), tol=1e-3)
