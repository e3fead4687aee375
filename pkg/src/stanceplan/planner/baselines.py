"""Reference planners: exhaustive oracle and the naive one-stop-per-target baseline."""
from __future__ import annotations

import math
from dataclasses import replace
from typing import Sequence

from ..errors import Infeasible, TooLarge
from .problem import PlanProblem, PlanResult, better, check_coverage, make_result, path_objective, z_key

BRUTE_FORCE_MAX_M = 12


def brute_force_plan(problem: PlanProblem, max_m: int = BRUTE_FORCE_MAX_M) -> PlanResult:
    """Enumerate every covering subset; order each by Held-Karp over all subsets at once."""
    m = problem.m
    if m > max_m:
        raise TooLarge(f"brute force limited to {max_m} candidates, got {m}")
    missing = check_coverage(problem)
    if missing:
        raise Infeasible(f"targets {sorted(missing)} are covered by no candidate")

    d = problem.distance_matrix()
    end = m + 1
    # dp[mask][j]: shortest start -> ... -> j visiting exactly the candidates in mask (bit j-1)
    size = 1 << m
    dp = [[math.inf] * (m + 1) for _ in range(size)]
    parent = [[-1] * (m + 1) for _ in range(size)]
    for j in range(1, m + 1):
        dp[1 << (j - 1)][j] = float(d[0, j])
        parent[1 << (j - 1)][j] = 0
    for mask in range(1, size):
        row = dp[mask]
        for j in range(1, m + 1):
            if not mask >> (j - 1) & 1 or row[j] == math.inf:
                continue
            for k in range(1, m + 1):
                if mask >> (k - 1) & 1:
                    continue
                nm = mask | 1 << (k - 1)
                cand = row[j] + float(d[j, k])
                if cand < dp[nm][k]:
                    dp[nm][k] = cand
                    parent[nm][k] = j

    cover = [0] * (m + 1)
    tids = sorted(problem.targets)
    bit = {t: b for b, t in enumerate(tids)}
    for c in problem.candidates:
        for t in c.covered_targets:
            if t in bit:
                cover[c.index] |= 1 << bit[t]
    full = (1 << len(tids)) - 1

    best = None
    for mask in range(size):
        got = 0
        for j in range(1, m + 1):
            if mask >> (j - 1) & 1:
                got |= cover[j]
        if got != full:
            continue
        if mask == 0:
            order: list[int] = []
        else:
            last = min(
                (j for j in range(1, m + 1) if mask >> (j - 1) & 1),
                key=lambda j: dp[mask][j] + float(d[j, end]),
            )
            order = []
            cur, mk = last, mask
            while cur != 0:
                order.append(cur)
                prev = parent[mk][cur]
                mk &= ~(1 << (cur - 1))
                cur = prev
            order.reverse()
        obj = path_objective(problem, order, d)
        key = z_key(problem, order)
        if best is None or better(obj, key, best[0], best[1]):
            best = (obj, key, order)
    return make_result(problem, best[2], lower_bound=best[0])


def naive_plan(problem: PlanProblem, target_order: Sequence[int]) -> PlanResult:
    """One stop per target, in the given order, at that target's own remainder circle.

    Targets whose remainder circle was filtered out use the covering circle
    nearest to the previous stop. No sharing and no reordering.
    """
    if set(target_order) != set(problem.targets) or len(target_order) != len(problem.targets):
        raise ValueError("target_order must list every target exactly once")
    missing = check_coverage(problem)
    if missing:
        raise Infeasible(f"targets {sorted(missing)} are covered by no candidate")
    d = problem.distance_matrix()
    order: list[int] = []
    prev = 0
    for t in target_order:
        covering = [c for c in problem.candidates if t in c.covered_targets]
        own = [c for c in covering if c.n_covered == 1]
        pool = own or covering
        pick = min(pool, key=lambda c: (float(d[prev, c.index]), c.index))
        order.append(pick.index)
        prev = pick.index
    res = make_result(problem, order, optimal=False)
    # every target is serviced at its own stop, even when a stop repeats
    return replace(res, assignment=dict(zip(target_order, order)))
