"""Exact best-first search for the stance MIP.

Any optimal path can be reduced so that every stance covers at least one
target not covered earlier in path order: dropping a stance that adds nothing
never lengthens the route (triangle inequality) and saves its stop cost
``alpha - lambda >= 0``. The smaller z-vector tie-break also prefers the reduced
path. So the search only needs labels ``(current stance, covered targets)``:
the visited stances of such a path are exactly those whose targets are
already covered, so they never matter for the future. Best-first order with
an admissible bound gives a proof of optimality; when the time budget runs
out, the best open bound is reported next to the incumbent.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import replace

import numpy as np

from ..errors import Infeasible, TimeBudgetExceeded
from .mip import MipModel
from .problem import TIE_RTOL, PlanProblem, PlanResult, better, check_coverage, make_result

DEFAULT_TIME_BUDGET = 30.0


class _Instance:
    """Bitmask view of a problem: node 0 start, 1..m candidates, m+1 end."""

    def __init__(self, problem: PlanProblem, dist: np.ndarray):
        self.problem = problem
        self.m = m = problem.m
        self.end = m + 1
        self.T = (dist / problem.walk_speed).tolist()
        tids = sorted(problem.targets)
        self.bit = {t: k for k, t in enumerate(tids)}
        self.full = (1 << len(tids)) - 1
        self.cov = [0] * (m + 2)
        self.cost = [0.0] * (m + 2)
        for c in problem.candidates:
            mask = 0
            for t in c.covered_targets:
                if t in self.bit:
                    mask |= 1 << self.bit[t]
            self.cov[c.index] = mask
            self.cost[c.index] = problem.stop_cost(c.index)
        self.useful = [i for i in range(1, m + 1) if self.cov[i]]
        self.by_target = [[i for i in self.useful if self.cov[i] >> k & 1] for k in range(len(tids))]
        self.base = 2.0 * problem.alpha
        self._h: dict[tuple[int, int], float] = {}
        # travel between target groups: a group is the set of stances covering a target
        n = len(tids)
        Ta = np.asarray(self.T)
        groups = [np.asarray(g, dtype=int) for g in self.by_target]
        self.to_group = np.full((m + 2, n), np.inf)
        self.group_end = np.full(n, np.inf)
        self.group_gap = np.zeros((n, n))
        for k, g in enumerate(groups):
            if len(g):
                self.to_group[:, k] = Ta[:, g].min(axis=1)
                self.group_end[k] = Ta[g, m + 1].min()
        for a in range(n):
            for b in range(a + 1, n):
                if len(groups[a]) and len(groups[b]):
                    gap = float(Ta[np.ix_(groups[a], groups[b])].min())
                    self.group_gap[a, b] = self.group_gap[b, a] = gap
        self.to_group = self.to_group.tolist()
        self.group_end = self.group_end.tolist()
        self.group_gap = self.group_gap.tolist()

    def zbit(self, i: int) -> int:
        return 1 << (self.m - i)

    def zkey(self, order) -> int:
        key = 0
        for i in order:
            key |= self.zbit(i)
        return key

    def g_of(self, order) -> float:
        g = self.base
        prev = 0
        for i in order:
            g += self.cost[i] + self.T[prev][i]
            prev = i
        return g + self.T[prev][self.end]

    def covers(self, order) -> bool:
        mask = 0
        for i in order:
            mask |= self.cov[i]
        return mask == self.full

    def bound(self, u: int, mask: int) -> float:
        """Admissible cost-to-go from stance ``u`` with ``mask`` already covered."""
        key = (u, mask)
        hit = self._h.get(key)
        if hit is not None:
            return hit
        T = self.T
        end = self.end
        left = self.full & ~mask
        if not left:
            h = T[u][end]
        else:
            # stop costs: each remaining target pays at least its cheapest per-target share
            cover = 0.0
            # travel: some stance covering each remaining target lies on the way to the end
            travel = T[u][end]
            k = 0
            rest = left
            while rest:
                if rest & 1:
                    best_c = math.inf
                    best_t = math.inf
                    Tu = T[u]
                    for i in self.by_target[k]:
                        share = self.cost[i] / (self.cov[i] & left).bit_count()
                        if share < best_c:
                            best_c = share
                        t = Tu[i] + T[i][end]
                        if t < best_t:
                            best_t = t
                    cover += best_c
                    if best_t > travel:
                        travel = best_t
                rest >>= 1
                k += 1
            h = cover + max(travel, self._tree_bound(u, left))
        self._h[key] = h
        return h


    def _tree_bound(self, u: int, left: int) -> float:
        """Minimum spanning tree over {u, end, one group per remaining target}.

        The rest of any path joins these nodes, and each of its legs is at
        least the distance between the groups it connects, so the path is
        no shorter than this tree.
        """
        ks = [k for k in range(left.bit_length()) if left >> k & 1]
        gap, group_end = self.group_gap, self.group_end
        # Prim from u over nodes: -1 is the end, 0.. index into ks
        d = {-1: self.T[u][self.end]}
        for j, k in enumerate(ks):
            d[j] = self.to_group[u][k]
        total = 0.0
        while d:
            j = min(d, key=d.__getitem__)
            total += d.pop(j)
            for o in d:
                w = group_end[ks[o]] if j == -1 else (group_end[ks[j]] if o == -1 else gap[ks[j]][ks[o]])
                if w < d[o]:
                    d[o] = w
        return total


def _two_opt(inst: _Instance, order: list[int]) -> list[int]:
    """Improve the visiting order with fixed start and end."""
    T = inst.T
    nodes = [0, *order, inst.end]
    improved = True
    while improved:
        improved = False
        for a in range(len(nodes) - 2):
            for b in range(a + 2, len(nodes) - 1):
                # reverse nodes[a+1..b]; path is directed but distances are symmetric
                delta = T[nodes[a]][nodes[b]] + T[nodes[a + 1]][nodes[b + 1]] - T[nodes[a]][nodes[a + 1]] - T[nodes[b]][nodes[b + 1]]
                if delta < -1e-12:
                    nodes[a + 1 : b + 1] = reversed(nodes[a + 1 : b + 1])
                    improved = True
    return nodes[1:-1]


def _drop_redundant(inst: _Instance, order: list[int]) -> list[int]:
    order = list(order)
    changed = True
    while changed:
        changed = False
        # try dropping the stances covering the fewest targets first
        for i in sorted(order, key=lambda j: (inst.cov[j].bit_count(), -inst.cost[j], -j)):
            rest = [j for j in order if j != i]
            if inst.covers(rest) and inst.g_of(rest) <= inst.g_of(order):
                order = rest
                changed = True
                break
    return order


def _cheapest_insertion(inst: _Instance, chosen: list[int]) -> list[int]:
    T = inst.T
    order: list[int] = []
    for i in chosen:
        nodes = [0, *order, inst.end]
        best = None
        for p in range(len(nodes) - 1):
            delta = T[nodes[p]][i] + T[i][nodes[p + 1]] - T[nodes[p]][nodes[p + 1]]
            if best is None or delta < best[0]:
                best = (delta, p)
        order.insert(best[1], i)
    return order


def _greedy_walk(inst: _Instance) -> list[int]:
    """From the current stance take the cheapest (stop + walk) per newly covered target."""
    order: list[int] = []
    mask = 0
    u = 0
    while mask != inst.full:
        best = None
        for i in inst.useful:
            new = (inst.cov[i] & ~mask).bit_count()
            if not new:
                continue
            score = (inst.cost[i] + inst.T[u][i]) / new
            if best is None or score < best[0]:
                best = (score, i)
        _, i = best
        order.append(i)
        mask |= inst.cov[i]
        u = i
    return order


def _warm_start(inst: _Instance, z_init: dict[int, int]) -> list[int]:
    """Overlap stances first (largest N first), completed greedily, then cleaned up."""
    seeds = sorted((i for i in inst.useful if z_init.get(i)), key=lambda i: (-inst.cov[i].bit_count(), i))
    chosen: list[int] = []
    mask = 0
    for i in seeds:
        if inst.cov[i] & ~mask:
            chosen.append(i)
            mask |= inst.cov[i]
    for i in sorted(inst.useful, key=lambda i: (-inst.cov[i].bit_count(), inst.cost[i], i)):
        if inst.cov[i] & ~mask:
            chosen.append(i)
            mask |= inst.cov[i]
    return chosen


def _polish(inst: _Instance, order: list[int]) -> list[int]:
    order = _two_opt(inst, order)
    order = _drop_redundant(inst, order)
    return _two_opt(inst, order)


def heuristic_order(inst: _Instance, z_init: dict[int, int]) -> list[int]:
    candidates = [
        _polish(inst, _cheapest_insertion(inst, _warm_start(inst, z_init))),
        _polish(inst, _greedy_walk(inst)),
    ]
    best = None
    for order in candidates:
        g, key = inst.g_of(order), inst.zkey(order)
        if best is None or better(g, key, best[0], best[1]):
            best = (g, key, order)
    return best[2]


def solve_mip(model: MipModel, time_budget: float = DEFAULT_TIME_BUDGET) -> PlanResult:
    """Optimal stance sequence for ``model``; anytime with a reported lower bound."""
    t0 = time.monotonic()
    deadline = t0 + time_budget
    problem = model.problem
    missing = check_coverage(problem)
    if missing:
        raise Infeasible(f"targets {sorted(missing)} are covered by no candidate")
    inst = _Instance(problem, model.d)
    if not inst.full:
        return make_result(problem, [], lower_bound=None, meta={"seconds": time.monotonic() - t0})

    inc_order = heuristic_order(inst, model.z_init)
    inc_g, inc_key = inst.g_of(inc_order), inst.zkey(inc_order)
    if time.monotonic() > deadline and not inc_order:
        raise TimeBudgetExceeded("no incumbent before the deadline")

    T, cov, cost, end, full = inst.T, inst.cov, inst.cost, inst.end, inst.full
    labels: dict[tuple[int, int], tuple[float, int]] = {(0, 0): (inst.base, 0)}
    heap = [(inst.base + inst.bound(0, 0), 0, inst.base, 0, 0, ())]
    expanded = 0
    timed_out = False
    lower = None
    while heap:
        f, zb, g, u, mask, path = heap[0]
        if f > inc_g + TIE_RTOL * max(1.0, abs(inc_g)):
            break
        if time.monotonic() > deadline:
            timed_out = True
            lower = f
            break
        heapq.heappop(heap)
        if labels.get((u, mask)) != (g, zb):
            continue
        expanded += 1
        left = full & ~mask
        Tu = T[u]
        for i in inst.useful:
            gain = cov[i] & left
            if not gain:
                continue
            g2 = g + cost[i] + Tu[i]
            nm = mask | gain
            zb2 = zb | inst.zbit(i)
            if nm == full:
                gg = g2 + T[i][end]
                if better(gg, zb2, inc_g, inc_key):
                    inc_g, inc_key, inc_order = gg, zb2, list(path + (i,))
                continue
            old = labels.get((i, nm))
            if old is not None and not better(g2, zb2, old[0], old[1]):
                continue
            f2 = g2 + inst.bound(i, nm)
            if f2 > inc_g + TIE_RTOL * max(1.0, abs(inc_g)):
                continue
            labels[(i, nm)] = (g2, zb2)
            heapq.heappush(heap, (f2, zb2, g2, i, nm, path + (i,)))

    res = make_result(problem, inc_order, expanded=expanded, meta={"seconds": time.monotonic() - t0})
    if timed_out:
        lb = min(lower, inc_g) - inst.base + 2.0 * problem.alpha
        return replace(res, optimal=False, lower_bound=min(lb, res.objective))
    return replace(res, optimal=True, lower_bound=res.objective)
