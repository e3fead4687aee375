"""Explicit MIP model for stance selection and ordering.

Node 0 is the start, nodes 1..m the candidates, node m+1 the end. Variables:
``z_i`` (node selected), ``o_i_j`` (edge i->j used, all ordered pairs) and
``g_i`` (continuous visiting order). The model is kept as plain linear rows
so it can be checked against a candidate solution, exported as LP text, or
handed to an external MILP solver for cross-checking.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .problem import PlanProblem


@dataclass(frozen=True)
class LinearRow:
    name: str
    coeffs: dict[str, float]
    sense: str  # "<=", ">=", "="
    rhs: float

    def lhs(self, values: dict[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.coeffs.items())

    def holds(self, values: dict[str, float], tol: float = 1e-9) -> bool:
        v = self.lhs(values)
        if self.sense == "<=":
            return v <= self.rhs + tol
        if self.sense == ">=":
            return v >= self.rhs - tol
        return abs(v - self.rhs) <= tol


@dataclass
class MipModel:
    problem: PlanProblem
    W: np.ndarray
    d: np.ndarray
    target_ids: list[int]
    edges: list[tuple[int, int]]
    objective: dict[str, float]
    rows: list[LinearRow]
    z_init: dict[int, int]
    overlap_nodes: list[int] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.problem.m

    @property
    def n_nodes(self) -> int:
        return self.m + 2

    def variables(self) -> list[str]:
        n = self.n_nodes
        return [f"z_{i}" for i in range(n)] + [f"o_{i}_{j}" for i, j in self.edges] + [f"g_{i}" for i in range(n)]

    def integer_variables(self) -> set[str]:
        return {v for v in self.variables() if not v.startswith("g_")}

    def bounds(self, var: str) -> tuple[float, float]:
        if var.startswith("g_"):
            return 0.0, float(self.m + 1)
        return 0.0, 1.0

    def objective_value(self, values: dict[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.objective.items())

    def violations(self, values: dict[str, float], tol: float = 1e-9) -> list[str]:
        bad = [r.name for r in self.rows if not r.holds(values, tol)]
        integer = self.integer_variables()
        for v in self.variables():
            lo, hi = self.bounds(v)
            x = values.get(v, 0.0)
            if x < lo - tol or x > hi + tol:
                bad.append(f"bound:{v}")
            elif v in integer and abs(x - round(x)) > tol:
                bad.append(f"integrality:{v}")
        return bad

    def solution_from_path(self, order: Sequence[int]) -> dict[str, float]:
        """Variable assignment for the path start -> order... -> end."""
        vals: dict[str, float] = {v: 0.0 for v in self.variables()}
        nodes = [0, *order, self.m + 1]
        for i in nodes:
            vals[f"z_{i}"] = 1.0
        for a, b in zip(nodes, nodes[1:]):
            vals[f"o_{a}_{b}"] = 1.0
        for pos, i in enumerate(order, start=1):
            vals[f"g_{i}"] = float(pos)
        vals[f"g_{self.m + 1}"] = float(self.m + 1)
        return vals

    def to_arrays(self):
        """``(names, c, A, lower, upper, integrality)`` with row bounds ``lower <= A x <= upper``."""
        names = self.variables()
        col = {v: k for k, v in enumerate(names)}
        c = np.array([self.objective.get(v, 0.0) for v in names])
        A = np.zeros((len(self.rows), len(names)))
        lo = np.full(len(self.rows), -np.inf)
        hi = np.full(len(self.rows), np.inf)
        for r, row in enumerate(self.rows):
            for v, coef in row.coeffs.items():
                A[r, col[v]] += coef
            if row.sense in ("<=", "="):
                hi[r] = row.rhs
            if row.sense in (">=", "="):
                lo[r] = row.rhs
        integrality = np.array([0 if v.startswith("g_") else 1 for v in names])
        return names, c, A, lo, hi, integrality

    def to_lp(self) -> str:
        """CPLEX LP text of the model."""

        def expr(coeffs: dict[str, float]) -> str:
            parts = []
            for v, c in coeffs.items():
                if c == 0:
                    continue
                sign = "-" if c < 0 else "+"
                parts.append(f"{sign} {abs(c):.17g} {v}")
            s = " ".join(parts) or "0"
            return s[2:] if s.startswith("+ ") else s

        lines = ["\\ stance selection and ordering", "Minimize", f" obj: {expr(self.objective)}", "Subject To"]
        for row in self.rows:
            lines.append(f" {row.name}: {expr(row.coeffs)} {row.sense} {row.rhs:.17g}")
        lines.append("Bounds")
        for v in self.variables():
            if v.startswith("g_"):
                lo, hi = self.bounds(v)
                lines.append(f" {lo:g} <= {v} <= {hi:g}")
        lines.append("Binaries")
        lines.extend(f" {v}" for v in self.variables() if not v.startswith("g_"))
        lines.append("End")
        return "\n".join(lines) + "\n"


def build_mip(problem: PlanProblem) -> MipModel:
    m = problem.m
    n = m + 2
    end = m + 1
    d = problem.distance_matrix()
    target_ids = sorted(problem.targets)
    W = np.zeros((len(target_ids), m), dtype=int)
    for k, t in enumerate(target_ids):
        for cand in problem.candidates:
            if t in cand.covered_targets:
                W[k, cand.index - 1] = 1

    edges = [(i, j) for i in range(n) for j in range(n) if i != j]
    overlap = [c.index for c in problem.candidates if c.from_overlap]

    obj: dict[str, float] = {f"z_{i}": problem.alpha for i in range(n)}
    for i in overlap:
        obj[f"z_{i}"] -= problem.bonus
    for i, j in edges:
        obj[f"o_{i}_{j}"] = d[i, j] / problem.walk_speed

    rows: list[LinearRow] = [
        LinearRow("terminal_start", {"z_0": 1.0}, "=", 1.0),
        LinearRow("terminal_end", {f"z_{end}": 1.0}, "=", 1.0),
    ]
    for k, t in enumerate(target_ids):
        rows.append(LinearRow(f"cover_{t}", {f"z_{i + 1}": 1.0 for i in np.flatnonzero(W[k])}, ">=", 1.0))

    rows.append(LinearRow("start_out", {f"o_0_{j}": 1.0 for j in range(1, n)}, "=", 1.0))
    rows.append(LinearRow("start_in", {f"o_{j}_0": 1.0 for j in range(1, n)}, "=", 0.0))
    rows.append(LinearRow("end_out", {f"o_{end}_{j}": 1.0 for j in range(end)}, "=", 0.0))
    rows.append(LinearRow("end_in", {f"o_{j}_{end}": 1.0 for j in range(end)}, "=", 1.0))
    for i in range(1, end):
        out = {f"o_{i}_{j}": 1.0 for j in range(n) if j != i}
        inn = {f"o_{j}_{i}": 1.0 for j in range(n) if j != i}
        rows.append(LinearRow(f"flow_out_{i}", {**out, f"z_{i}": -1.0}, "=", 0.0))
        rows.append(LinearRow(f"flow_in_{i}", {**inn, f"z_{i}": -1.0}, "=", 0.0))

    rows.append(LinearRow("order_start", {"g_0": 1.0}, "=", 0.0))
    rows.append(LinearRow("order_end", {f"g_{end}": 1.0}, "=", float(m + 1)))
    for i in range(1, end):
        rows.append(LinearRow(f"order_lo_{i}", {f"g_{i}": 1.0, f"z_{i}": -1.0}, ">=", 0.0))
        rows.append(LinearRow(f"order_hi_{i}", {f"g_{i}": 1.0, f"z_{i}": -float(m)}, "<=", 0.0))
    for i, j in edges:
        rows.append(
            LinearRow(f"mtz_{i}_{j}", {f"g_{i}": 1.0, f"g_{j}": -1.0, f"o_{i}_{j}": float(m + 2)}, "<=", float(m + 1))
        )

    total = {f"o_{i}_{j}": 1.0 for i, j in edges}
    for i in range(n):
        total[f"z_{i}"] = -1.0
    rows.append(LinearRow("total_flow", total, "=", -1.0))

    z_init = {i: int(i in overlap) for i in range(1, end)}
    z_init[0] = z_init[end] = 1
    return MipModel(problem, W, d, target_ids, edges, obj, rows, z_init, overlap)
