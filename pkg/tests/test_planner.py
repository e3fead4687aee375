import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import Bounds, LinearConstraint, milp

from instances import random_problem
from oracles import enumerate_best_plan
from stanceplan.errors import DegenerateInput, Infeasible, TooLarge, UncoverableTarget
from stanceplan.geometry import CircleRegion, Point2, Polygon2
from stanceplan.planner import (
    PlanProblem,
    StanceCandidate,
    brute_force_plan,
    build_mip,
    enumerate_candidates,
    naive_plan,
    path_objective,
    solve_mip,
)
from stanceplan.planner.problem import z_key
from stanceplan.reachability import FeasibleRegion


def cand(i, x, y, covers, overlap=None, r=0.1):
    covers = frozenset(covers)
    return StanceCandidate(i, CircleRegion(Point2(x, y), r), covers, len(covers) > 1 if overlap is None else overlap)


def square_region(tid, x0, y0, side):
    rings = [[[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]]]
    return FeasibleRegion(tid, Polygon2.from_rings(rings), 100)


def oracle(problem):
    covers = [set(c.covered_targets) for c in problem.candidates]
    return enumerate_best_plan(
        problem.start,
        problem.end,
        [c.center for c in problem.candidates],
        covers,
        sorted(problem.targets),
        problem.alpha,
        problem.walk_speed,
        problem.bonus,
        [c.from_overlap for c in problem.candidates],
    )


# --- candidates --------------------------------------------------------------


def test_candidates_of_two_overlapping_squares():
    out = enumerate_candidates([square_region(0, 0, 0, 1), square_region(1, 0.4, 0, 1)])
    assert len(out) == 3
    assert sorted(c.n_covered for c in out) == [1, 1, 2]
    assert [c.index for c in out] == [1, 2, 3]
    shared = next(c for c in out if c.n_covered == 2)
    assert shared.from_overlap
    assert shared.circle.radius == pytest.approx(0.3, abs=2e-3)


def test_single_region_single_candidate():
    out = enumerate_candidates([square_region(5, 0, 0, 1)])
    assert len(out) == 1 and out[0].covered_targets == {5}


def test_thin_overlap_dropped_but_targets_still_covered():
    out = enumerate_candidates([square_region(0, 0, 0, 1), square_region(1, 0.95, 0, 1)], r_min_tolerance=0.05)
    assert all(c.n_covered == 1 for c in out)
    assert set().union(*(c.covered_targets for c in out)) == {0, 1}


def test_uncoverable_target():
    with pytest.raises(UncoverableTarget):
        enumerate_candidates([square_region(0, 0, 0, 1), square_region(1, 3, 0, 0.05)])
    with pytest.raises(DegenerateInput):
        enumerate_candidates([])


# --- model -------------------------------------------------------------------


def test_model_counts_for_one_candidate():
    p = PlanProblem(Point2(0, 0), Point2(2, 0), (cand(1, 1, 0, {0}),), {0}, alpha=10, walk_speed=1)
    model = build_mip(p)
    assert len(model.edges) == 6
    assert sum(r.name.startswith("cover_") for r in model.rows) == 1
    assert model.W.tolist() == [[1]]
    np.testing.assert_allclose(model.d, model.d.T)
    assert np.all(np.diag(model.d) == 0)


def test_warm_start_marks_overlap_nodes():
    p = PlanProblem(Point2(0, 0), Point2(0, 0), (cand(1, 1, 0, {0, 1}), cand(2, 2, 0, {1})), {0, 1}, alpha=5)
    model = build_mip(p)
    assert model.z_init == {0: 1, 1: 1, 2: 0, 3: 1}
    assert model.objective["z_1"] == pytest.approx(4.5)
    assert model.objective["z_2"] == pytest.approx(5.0)


def test_two_cycle_violates_mtz():
    p = PlanProblem(
        Point2(0, 0), Point2(3, 0), (cand(1, 1, 0, {0}), cand(2, 2, 0, {1})), {0, 1}, alpha=1, walk_speed=1
    )
    model = build_mip(p)
    vals = model.solution_from_path([])
    # start -> end directly plus a detached 1 <-> 2 cycle; everything but MTZ is satisfiable
    vals.update({"z_1": 1, "z_2": 1, "o_1_2": 1, "o_2_1": 1})
    bad = model.violations(vals)
    assert "mtz_1_2" in bad or "mtz_2_1" in bad
    # no ordering of g values repairs it
    for g1 in np.linspace(0, 3, 13):
        for g2 in np.linspace(0, 3, 13):
            vals.update({"g_1": g1, "g_2": g2})
            assert any(b.startswith("mtz_") for b in model.violations(vals))


def test_selected_edges_respect_order_gap(rng):
    for _ in range(20):
        p = random_problem(rng)
        model = build_mip(p)
        res = solve_mip(model)
        vals = model.solution_from_path(res.order)
        assert model.violations(vals) == []
        for i, j in model.edges:
            if vals[f"o_{i}_{j}"] == 1:
                assert vals[f"g_{i}"] + 1 <= vals[f"g_{j}"]


def test_lp_export_lists_every_row():
    p = PlanProblem(Point2(0, 0), Point2(2, 0), (cand(1, 1, 0, {0}), cand(2, 1, 1, {0})), {0}, alpha=10)
    model = build_mip(p)
    text = model.to_lp()
    assert text.startswith("\\") and text.rstrip().endswith("End")
    for row in model.rows:
        assert f" {row.name}:" in text
    assert "Binaries" in text and " o_1_2" in text


def test_scipy_milp_agrees_on_small_instances():
    rng = np.random.default_rng(99)
    for _ in range(8):
        p = random_problem(rng, max_m=4, max_n=3)
        model = build_mip(p)
        names, c, A, lo, hi, integ = model.to_arrays()
        lb = np.array([model.bounds(v)[0] for v in names])
        ub = np.array([model.bounds(v)[1] for v in names])
        out = milp(c, constraints=LinearConstraint(A, lo, hi), integrality=integ, bounds=Bounds(lb, ub))
        assert out.success
        ours = solve_mip(model)
        assert out.fun == pytest.approx(ours.objective, abs=1e-6)


# --- solver ------------------------------------------------------------------


def test_single_target_worked_example():
    p = PlanProblem(Point2(0, 0), Point2(2, 0), (cand(1, 1, 0, {0}),), {0}, alpha=10, walk_speed=1)
    res = solve_mip(build_mip(p))
    assert res.order == (1,)
    assert res.travel_distance == pytest.approx(2.0)
    assert res.objective == pytest.approx(32.0)
    assert res.assignment == {0: 1}
    assert res.optimal and res.gap == 0
    assert brute_force_plan(p).objective == res.objective


def test_large_alpha_picks_shared_stance():
    cands = (cand(1, 0, 3, {0, 1, 2}), cand(2, 1, 0, {0}), cand(3, 2, 0, {1}), cand(4, 3, 0, {2}))
    p = PlanProblem(Point2(0, 0), Point2(4, 0), cands, {0, 1, 2}, alpha=100, walk_speed=1)
    res = solve_mip(build_mip(p))
    assert res.order == (1,)
    assert oracle(p)[2] == (1,)


def test_zero_alpha_prefers_short_detours():
    cands = (cand(1, 0, 3, {0, 1, 2}), cand(2, 1, 0, {0}), cand(3, 2, 0, {1}), cand(4, 3, 0, {2}))
    p = PlanProblem(Point2(0, 0), Point2(4, 0), cands, {0, 1, 2}, alpha=0.0, walk_speed=1)
    assert solve_mip(build_mip(p)).order == (2, 3, 4)


def test_assignment_goes_to_earliest_covering_stance():
    cands = (cand(1, 2, 0, {0, 1}), cand(2, 1, 0, {1, 2}))
    p = PlanProblem(Point2(0, 0), Point2(3, 0), cands, {0, 1, 2}, alpha=1, walk_speed=1)
    res = solve_mip(build_mip(p))
    assert res.order == (2, 1)
    assert res.assignment == {1: 2, 2: 2, 0: 1}


def test_no_candidates_is_infeasible():
    p = PlanProblem(Point2(0, 0), Point2(1, 0), (), {0}, alpha=1)
    with pytest.raises(Infeasible):
        brute_force_plan(p)
    with pytest.raises(Infeasible):
        solve_mip(build_mip(p))
    with pytest.raises(Infeasible):
        naive_plan(p, [0])


def test_brute_force_guard():
    cands = tuple(cand(i, i, 0, {0}) for i in range(1, 14))
    p = PlanProblem(Point2(0, 0), Point2(1, 0), cands, {0}, alpha=1)
    with pytest.raises(TooLarge):
        brute_force_plan(p)


def test_problem_validation():
    c = (cand(1, 1, 0, {0}),)
    with pytest.raises(DegenerateInput):
        PlanProblem(Point2(0, 0), Point2(1, 0), c, {0}, walk_speed=0)
    with pytest.raises(DegenerateInput):
        PlanProblem(Point2(0, 0), Point2(1, 0), c, {0}, alpha=-1)
    with pytest.raises(DegenerateInput):
        PlanProblem(Point2(0, 0), Point2(1, 0), c, {0}, alpha=1, lam=2)
    with pytest.raises(DegenerateInput):
        PlanProblem(Point2(0, 0), Point2(1, 0), (cand(2, 1, 0, {0}),), {0})
    assert PlanProblem(Point2(0, 0), Point2(1, 0), c, {0}, alpha=4).bonus == pytest.approx(0.4)


def test_six_candidate_instances_match_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        while True:
            p = random_problem(rng, max_m=6, max_n=4)
            if p.m == 6 and len(p.targets) == 4:
                break
        assert solve_mip(build_mip(p)).objective == brute_force_plan(p).objective


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_solver_brute_force_and_enumeration_agree(seed):
    p = random_problem(np.random.default_rng(seed), max_m=6, max_n=5)
    res = solve_mip(build_mip(p))
    bf = brute_force_plan(p)
    obj, z, order = oracle(p)
    assert res.objective == bf.objective
    assert res.objective == pytest.approx(obj, rel=1e-12, abs=1e-12)
    assert set(res.order) == set(bf.order) == set(order)
    assert z_key(p, res.order) == z_key(p, bf.order)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_solver_dominates_naive(seed):
    p = random_problem(np.random.default_rng(seed))
    res = solve_mip(build_mip(p))
    naive = naive_plan(p, sorted(p.targets))
    assert res.objective <= naive.objective + 1e-9
    assert res.objective == pytest.approx(path_objective(p, res.order), abs=1e-9)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_selection_is_scale_invariant(seed, k):
    p = random_problem(np.random.default_rng(seed), max_m=6)

    def scaled(pt):
        return Point2(pt[0] * k, pt[1] * k)

    cands = tuple(
        StanceCandidate(c.index, CircleRegion(scaled(c.center), c.circle.radius), c.covered_targets, c.from_overlap)
        for c in p.candidates
    )
    q = PlanProblem(scaled(p.start), scaled(p.end), cands, p.targets, p.alpha, p.walk_speed * k)
    a, b = solve_mip(build_mip(p)), solve_mip(build_mip(q))
    assert b.objective == pytest.approx(a.objective, rel=1e-9)
    # ties between mirror-image routes can flip under rounding; the stance set is stable
    assert set(a.order) == set(b.order)


def test_solver_is_deterministic(rng):
    p = random_problem(rng, max_m=8)
    a, b = solve_mip(build_mip(p)), solve_mip(build_mip(p))
    assert a == b


def test_time_budget_returns_bounded_incumbent():
    rng = np.random.default_rng(5)
    cands = []
    for i in range(1, 41):
        x, y = rng.uniform(0, 20, 2)
        cands.append(cand(i, x, y, {(i - 1) % 20, i % 20}))
    p = PlanProblem(Point2(0, 0), Point2(20, 20), tuple(cands), set(range(20)), alpha=2, walk_speed=0.5)
    res = solve_mip(build_mip(p), time_budget=0.2)
    assert not res.optimal
    assert res.lower_bound <= res.objective
    assert set().union(*(c.covered_targets for c in res.ordered_stances)) >= p.targets


# --- naive baseline ----------------------------------------------------------


def test_naive_three_in_a_row():
    cands = (cand(1, 1, 0, {0}), cand(2, 2, 0, {1}), cand(3, 3, 0, {2}), cand(4, 2, 1, {0, 1, 2}))
    p = PlanProblem(Point2(0, 0), Point2(4, 0), cands, {0, 1, 2}, alpha=5, walk_speed=1)
    res = naive_plan(p, [0, 1, 2])
    assert res.order == (1, 2, 3)
    assert res.stop_count == 3
    assert res.travel_distance == pytest.approx(4.0)
    assert res.objective == pytest.approx(5 * 5 + 4.0)


def test_naive_ignores_sharing():
    cands = (cand(1, 1, 0, {0, 1, 2}),)
    p = PlanProblem(Point2(0, 0), Point2(2, 0), cands, {0, 1, 2}, alpha=5, walk_speed=1)
    res = naive_plan(p, [2, 0, 1])
    assert res.stop_count == 3
    assert res.assignment == {2: 1, 0: 1, 1: 1}
    assert solve_mip(build_mip(p)).stop_count == 1


def test_naive_requires_a_full_order():
    p = PlanProblem(Point2(0, 0), Point2(2, 0), (cand(1, 1, 0, {0, 1}),), {0, 1}, alpha=5)
    with pytest.raises(ValueError):
        naive_plan(p, [0])
    with pytest.raises(ValueError):
        naive_plan(p, [0, 0])


def test_inspection14_naive_versus_optimal():
    from stanceplan.pipeline import run_pipeline
    from stanceplan.presets import inspection14

    plan, naive, _, _ = run_pipeline(inspection14(seed=0), run_simulation=False)
    assert naive.stop_count == 14
    assert plan.stop_count <= 9
    assert plan.optimal
    assert math.isfinite(plan.objective) and plan.objective < naive.objective
