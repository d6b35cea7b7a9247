#!/usr/bin/env python3
"""
Dense two-phase simplex for the standard form used by the multipath model.
File: deadline_multipath/lp.py

    optimize   p.x
    subject to A.x <= q,  B.x = 1,  x >= 0

Rows with q = +inf are never binding and are dropped before solving. Rows
are scaled to unit magnitude so the tolerances mean the same thing for
constraints in bits/s and in probability units. The equality row gets an
artificial variable in phase 1. Dantzig's rule is used until degenerate
stalling is detected, then Bland's rule takes over for good.
"""

import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from deadline_multipath.errors import CyclingError, NetworkShapeError, ScenarioError, SolverError
from deadline_multipath.model import (
    LpProblem, Network, Sense, Solution, SolveStatus, Workload, build_quality_lp,
    expand_solution, iter_single_path_sets, restrict_columns,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    feasibility_tol: float = 1e-9
    optimality_tol: float = 1e-9
    max_pivots: Optional[int] = None

    def __post_init__(self):
        if not (self.feasibility_tol > 0 and self.optimality_tol > 0):
            raise ScenarioError("solver tolerances must be positive")
        if self.max_pivots is not None and self.max_pivots <= 0:
            raise ScenarioError("max_pivots must be positive")

    def pivot_budget(self, rows: int, cols: int) -> int:
        if self.max_pivots is not None:
            return self.max_pivots
        return 10 * (rows + cols) ** 2


class _Tableau:
    """Simplex tableau with an explicit objective row (z_j - c_j convention)."""

    def __init__(self, body: np.ndarray, rhs: np.ndarray, basis: List[int],
                 config: SolverConfig, budget: int):
        self.body = body
        self.rhs = rhs
        self.basis = basis
        self.config = config
        self.budget = budget
        self.pivots = 0
        self.bland = False
        self.degenerate_run = 0
        self.obj = np.zeros(body.shape[1])
        self.obj_value = 0.0

    def set_objective(self, costs: np.ndarray) -> None:
        cb = costs[self.basis]
        self.obj = cb @ self.body - costs
        self.obj_value = float(cb @ self.rhs)

    def _entering(self, allowed: np.ndarray) -> Optional[int]:
        candidates = np.flatnonzero((self.obj < -self.config.optimality_tol) & allowed)
        if candidates.size == 0:
            return None
        if self.bland:
            return int(candidates[0])
        return int(candidates[np.argmin(self.obj[candidates])])

    def _leaving(self, col: int) -> Optional[int]:
        column = self.body[:, col]
        rows = np.flatnonzero(column > self.config.feasibility_tol)
        if rows.size == 0:
            return None
        ratios = self.rhs[rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + self.config.feasibility_tol * max(1.0, abs(best))]
        # smallest basic variable among ties (Bland)
        return int(min(tied, key=lambda r: self.basis[r]))

    def pivot(self, row: int, col: int) -> None:
        if self.pivots >= self.budget:
            raise CyclingError(f"simplex exceeded {self.budget} pivots")
        if not self.bland and self.pivots >= self.budget // 2:
            logger.debug("pivot budget half spent, engaging Bland's rule")
            self.bland = True
        degenerate = self.rhs[row] <= self.config.feasibility_tol
        self.degenerate_run = self.degenerate_run + 1 if degenerate else 0
        if not self.bland and self.degenerate_run > len(self.basis) + self.body.shape[1]:
            logger.debug("degenerate stall after %d pivots, engaging Bland's rule", self.pivots)
            self.bland = True

        pivot_value = self.body[row, col]
        self.body[row] /= pivot_value
        self.rhs[row] /= pivot_value
        column = self.body[:, col].copy()
        column[row] = 0.0
        self.body -= np.outer(column, self.body[row])
        self.rhs -= column * self.rhs[row]
        factor = self.obj[col]
        self.obj = self.obj - factor * self.body[row]
        self.obj_value -= factor * self.rhs[row]
        np.maximum(self.rhs, 0.0, out=self.rhs, where=self.rhs > -self.config.feasibility_tol)
        self.basis[row] = col
        self.pivots += 1

    def optimize(self, allowed: np.ndarray) -> SolveStatus:
        while True:
            col = self._entering(allowed)
            if col is None:
                return SolveStatus.OPTIMAL
            row = self._leaving(col)
            if row is None:
                return SolveStatus.UNBOUNDED
            self.pivot(row, col)


def _scaled_rows(problem: LpProblem):
    """Finite, non-trivial inequality rows scaled to unit magnitude."""
    rows, rhs, scales, kept = [], [], [], []
    for index, (row, bound) in enumerate(zip(problem.ineq_matrix, problem.ineq_rhs)):
        if np.isposinf(bound):
            continue
        scale = max(float(np.abs(row).max(initial=0.0)), abs(float(bound)))
        if scale == 0.0:
            continue
        if not np.any(row) and bound < 0:
            return None
        rows.append(row / scale)
        rhs.append(bound / scale)
        scales.append(scale)
        kept.append(index)
    return rows, rhs, scales, kept


def solve(problem: LpProblem, config: Optional[SolverConfig] = None) -> Solution:
    """Solve `problem`; infeasibility and unboundedness are reported in the status."""
    config = config or SolverConfig()
    n_vars = problem.variable_count
    scaled = _scaled_rows(problem)
    if scaled is None:
        logger.info("LP infeasible: an empty row has a negative bound")
        return _failed(n_vars, SolveStatus.INFEASIBLE)
    rows, rhs_values, scales, kept = scaled
    n_ub = len(rows)
    eq_scale = float(np.abs(problem.eq_row).max(initial=0.0)) or 1.0

    signs = [1.0 if b >= 0 else -1.0 for b in rhs_values]
    n_art = sum(1 for s in signs if s < 0) + 1
    n_cols = n_vars + n_ub + n_art
    m = n_ub + 1
    body = np.zeros((m, n_cols))
    rhs = np.zeros(m)
    basis: List[int] = []
    art = n_vars + n_ub
    for i, (row, bound, sign) in enumerate(zip(rows, rhs_values, signs)):
        body[i, :n_vars] = sign * row
        body[i, n_vars + i] = sign
        rhs[i] = sign * bound
        if sign > 0:
            basis.append(n_vars + i)
        else:
            body[i, art] = 1.0
            basis.append(art)
            art += 1
    body[n_ub, :n_vars] = problem.eq_row / eq_scale
    rhs[n_ub] = 1.0 / eq_scale
    body[n_ub, art] = 1.0
    basis.append(art)

    budget = config.pivot_budget(m, n_cols)
    tableau = _Tableau(body, rhs, basis, config, budget)

    # phase 1: drive artificials to zero
    artificial = np.zeros(n_cols, dtype=bool)
    artificial[n_vars + n_ub:] = True
    phase1 = np.where(artificial, -1.0, 0.0)
    tableau.set_objective(phase1)
    tableau.optimize(np.ones(n_cols, dtype=bool))
    logger.debug("phase 1 finished after %d pivots, residual %.3e",
                 tableau.pivots, -tableau.obj_value)
    if -tableau.obj_value > config.feasibility_tol * 10:
        logger.info("LP infeasible (phase 1 residual %.3e)", -tableau.obj_value)
        return _failed(n_vars, SolveStatus.INFEASIBLE, tableau.pivots)
    _expel_artificials(tableau, artificial, config)

    # phase 2
    costs = np.zeros(n_cols)
    direction = 1.0 if problem.sense == Sense.MAXIMIZE else -1.0
    obj_scale = float(np.abs(problem.objective).max(initial=0.0)) or 1.0
    costs[:n_vars] = direction * problem.objective / obj_scale
    tableau.set_objective(costs)
    status = tableau.optimize(~artificial)
    if status != SolveStatus.OPTIMAL:
        logger.info("LP %s after %d pivots", status.value, tableau.pivots)
        return _failed(n_vars, status, tableau.pivots)

    x = _basic_solution(tableau, n_cols, n_vars, config)

    duals = np.zeros(problem.ineq_matrix.shape[0])
    for i, original in enumerate(kept):
        duals[original] = tableau.obj[n_vars + i] * obj_scale / scales[i]

    value = float(problem.objective @ x)
    _check_feasible(problem, x, config)
    logger.info("LP optimal: objective %.9g after %d pivots", value, tableau.pivots)
    return Solution(x=x, objective_value=value, status=SolveStatus.OPTIMAL,
                    pivots=tableau.pivots, duals=duals)


def _expel_artificials(tableau: _Tableau, artificial: np.ndarray, config: SolverConfig) -> None:
    """Pivot zero-level artificials out of the basis; drop rows that are redundant."""
    row = 0
    while row < len(tableau.basis):
        if not artificial[tableau.basis[row]]:
            row += 1
            continue
        candidates = np.flatnonzero((np.abs(tableau.body[row]) > config.feasibility_tol) & ~artificial)
        if candidates.size:
            tableau.pivot(row, int(candidates[0]))
            row += 1
        else:
            tableau.body = np.delete(tableau.body, row, axis=0)
            tableau.rhs = np.delete(tableau.rhs, row)
            del tableau.basis[row]


def _basic_solution(tableau: _Tableau, n_cols: int, n_vars: int, config: SolverConfig) -> np.ndarray:
    """Structural part of the current basic solution, with round-off below tolerance cleared."""
    x = np.zeros(n_cols)
    for row, col in enumerate(tableau.basis):
        x[col] = tableau.rhs[row]
    x = x[:n_vars]
    x[np.abs(x) < config.feasibility_tol] = 0.0
    return np.maximum(x, 0.0)


def _check_feasible(problem: LpProblem, x: np.ndarray, config: SolverConfig) -> None:
    """An optimal x must satisfy every row; a violation means the pivots drifted."""
    slack_tol = 100.0 * config.feasibility_tol
    lhs = problem.ineq_matrix @ x
    finite = np.isfinite(problem.ineq_rhs)
    excess = lhs[finite] - problem.ineq_rhs[finite]
    limit = slack_tol * np.maximum(1.0, np.abs(problem.ineq_rhs[finite]))
    eq_error = abs(float(problem.eq_row @ x) - 1.0)
    if np.any(excess > limit) or eq_error > slack_tol:
        raise SolverError(
            f"solution violates constraints beyond tolerance (max excess "
            f"{float(excess.max(initial=0.0)):.3e}, equality error {eq_error:.3e})")


def _failed(n_vars: int, status: SolveStatus, pivots: int = 0) -> Solution:
    return Solution(x=np.zeros(n_vars), objective_value=float("nan"), status=status, pivots=pivots)


# ---------------------------------------------------------------------------
# Convenience helpers on top of solve()
# ---------------------------------------------------------------------------

def solve_restricted(problem: LpProblem, allowed: Sequence[int],
                     config: Optional[SolverConfig] = None) -> Solution:
    """Solve with only the `allowed` columns; the result has full length."""
    sub = solve(restrict_columns(problem, allowed), config)
    return expand_solution(sub, allowed, problem.variable_count)


def single_path_quality(net: Network, workload: Workload, path: int,
                        problem: Optional[LpProblem] = None,
                        config: Optional[SolverConfig] = None) -> float:
    """Best quality using only `path` (plus the blackhole)."""
    problem = problem if problem is not None else build_quality_lp(net, workload)
    for candidate, allowed in iter_single_path_sets(net):
        if candidate == path:
            solution = solve_restricted(problem, allowed, config)
            return solution.objective_value if solution.is_optimal else 0.0
    raise NetworkShapeError(f"path {path} is not a real path of the network")


def best_single_path_quality(net: Network, workload: Workload,
                             problem: Optional[LpProblem] = None,
                             config: Optional[SolverConfig] = None) -> float:
    problem = problem if problem is not None else build_quality_lp(net, workload)
    return max(single_path_quality(net, workload, path, problem, config)
               for path in net.real_path_indices())


def time_solve(problem: LpProblem, repeats: int, config: Optional[SolverConfig] = None) -> float:
    """Mean wall-clock seconds of solve() over `repeats` runs."""
    started = time.perf_counter()
    for _ in range(repeats):
        solve(problem, config)
    return (time.perf_counter() - started) / max(1, repeats)

# End of file #
