"""Exact two-phase simplex over Fractions with Bland's rule, plus a non-certifying HiGHS variant."""
from fractions import Fraction
from typing import Dict, List, Optional
import logging

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ..logging import PipelineLogger
from ..services.configuration_manager import ConfigurationManager
from .instance import LPInstance, LPSolution

ZERO = Fraction(0)


class CapExceeded(Exception):
    pass


class SimplexTableau:
    """
    Sparse tableau: each row is a dict column → coefficient with the basic column at 1.
    The objective row holds reduced costs ``d`` and the current objective value ``value``,
    so that objective = value + Σ_j d_j x_j over nonbasic columns.
    """
    _logger = PipelineLogger("simplex").get_logger()

    def __init__(self, rows: List[Dict[int, Fraction]], rhs: List[Fraction], basis: List[int], n_columns: int,
                 pivot_cap: int):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.n_columns = n_columns
        self.pivot_cap = pivot_cap
        self.pivots = 0
        self.d: Dict[int, Fraction] = {}
        self.value = ZERO

    def set_objective(self, costs: Dict[int, Fraction]):
        self.d = dict(costs)
        self.value = ZERO
        for r, b in enumerate(self.basis):
            cost = self.d.get(b, ZERO)
            if cost:
                self._eliminate_objective(r, cost)

    def _eliminate_objective(self, r: int, factor: Fraction):
        self.value += factor * self.rhs[r]
        for j, a in self.rows[r].items():
            updated = self.d.get(j, ZERO) - factor * a
            if updated:
                self.d[j] = updated
            else:
                self.d.pop(j, None)

    def pivot(self, r: int, j: int):
        if self.pivots >= self.pivot_cap:
            raise CapExceeded()
        self.pivots += 1
        row = self.rows[r]
        piv = row[j]
        if piv != 1:
            for col in row:
                row[col] /= piv
            self.rhs[r] /= piv

        for i, other in enumerate(self.rows):
            if i == r or j not in other:
                continue
            factor = other[j]
            for col, a in row.items():
                updated = other.get(col, ZERO) - factor * a
                if updated:
                    other[col] = updated
                else:
                    other.pop(col, None)
            self.rhs[i] -= factor * self.rhs[r]

        factor = self.d.get(j, ZERO)
        if factor:
            self._eliminate_objective(r, factor)
        self.basis[r] = j
        if self._logger.isEnabledFor(logging.DEBUG):
            self._logger.debug(f"pivot {self.pivots}: column {j} enters at row {r}, objective {self.value}")

    def bland_step(self, allowed: Optional[set] = None) -> str:
        entering = [j for j, cost in self.d.items() if cost < 0 and (allowed is None or j in allowed)]
        if not entering:
            return "optimal"
        j = min(entering)
        best = None
        for r, row in enumerate(self.rows):
            a = row.get(j, ZERO)
            if a > 0:
                candidate = (self.rhs[r] / a, self.basis[r], r)
                if best is None or candidate < best:
                    best = candidate
        if best is None:
            return "unbounded"
        self.pivot(best[2], j)
        return "go_on"

    def run(self, allowed: Optional[set] = None) -> str:
        while True:
            status = self.bland_step(allowed)
            if status != "go_on":
                return status

    def solution(self) -> Dict[int, Fraction]:
        return {b: self.rhs[r] for r, b in enumerate(self.basis) if self.rhs[r]}

    def drop_row(self, r: int):
        del self.rows[r]
        del self.rhs[r]
        del self.basis[r]


def _standard_form(inst: LPInstance):
    """Rows with nonnegative right-hand sides plus slack, surplus and artificial columns."""
    n = len(inst.variables)
    rows, rhs, basis, artificials = [], [], [], set()
    column = n
    for constraint in inst.constraints:
        row = dict(constraint.coefficients)
        b = constraint.rhs
        sense = constraint.sense
        if b < 0:
            row = {j: -a for j, a in row.items()}
            b = -b
            sense = {"<=": ">=", ">=": "<=", "=": "="}[sense]
        if sense == "<=":
            row[column] = Fraction(1)
            basis.append(column)
            column += 1
        else:
            if sense == ">=":
                row[column] = Fraction(-1)
                column += 1
            row[column] = Fraction(1)
            basis.append(column)
            artificials.add(column)
            column += 1
        rows.append(row)
        rhs.append(b)
    return rows, rhs, basis, artificials, column


def solve_lp(inst: LPInstance, pivot_cap: Optional[int] = None) -> LPSolution:
    """Solve exactly. Bland's rule (least entering column, least basic column on ratio ties) prevents cycling."""
    logger = SimplexTableau._logger
    if pivot_cap is None:
        pivot_cap = ConfigurationManager.get_setting("lp", "pivot_cap")
    logger.info(f"Solving LP with {inst.size['variables']} variables and {inst.size['constraints']} constraints")

    rows, rhs, basis, artificials, n_columns = _standard_form(inst)
    tableau = SimplexTableau(rows, rhs, basis, n_columns, pivot_cap)
    n = len(inst.variables)

    def incumbent() -> Dict[str, Fraction]:
        values = tableau.solution()
        return {inst.variables[j]: values.get(j, ZERO) for j in range(n)}

    try:
        if artificials:
            tableau.set_objective({j: Fraction(1) for j in artificials})
            tableau.run()
            if tableau.value > 0:
                logger.info(f"LP infeasible after {tableau.pivots} pivots")
                return LPSolution("infeasible", pivots=tableau.pivots)
            r = 0
            while r < len(tableau.basis):
                if tableau.basis[r] in artificials:
                    candidates = [j for j in sorted(tableau.rows[r]) if j not in artificials]
                    if candidates:
                        tableau.pivot(r, candidates[0])
                    else:
                        tableau.drop_row(r)
                        continue
                r += 1
            for row in tableau.rows:
                for j in artificials & row.keys():
                    del row[j]

        tableau.set_objective(inst.objective)
        allowed = set(range(n_columns)) - artificials
        status = tableau.run(allowed)
    except CapExceeded:
        logger.warning(f"LP pivot cap {pivot_cap} exceeded")
        assignment = incumbent()
        feasible = inst.is_feasible(assignment)
        return LPSolution("cap-exceeded", optimum=inst.objective_value(assignment) if feasible else None,
                          assignment=assignment if feasible else {}, pivots=tableau.pivots)

    if status == "unbounded":
        logger.info(f"LP unbounded after {tableau.pivots} pivots")
        return LPSolution("unbounded", pivots=tableau.pivots)

    assignment = incumbent()
    optimum = inst.objective_value(assignment)
    logger.info(f"LP optimal with value {optimum} after {tableau.pivots} pivots")
    return LPSolution("optimal", optimum=optimum, assignment=assignment, pivots=tableau.pivots)


def solve_lp_float(inst: LPInstance, tolerance: Optional[float] = None) -> LPSolution:
    """HiGHS through scipy. Results are floating point and never used as certificates."""
    if tolerance is None:
        tolerance = ConfigurationManager.get_setting("lp", "float_tolerance")
    n = len(inst.variables)
    c = np.zeros(n)
    for j, coefficient in inst.objective.items():
        c[j] = float(coefficient)

    def matrix(constraints, flip):
        data, row_index, col_index, b = [], [], [], []
        for i, constraint in enumerate(constraints):
            sign = -1.0 if flip(constraint) else 1.0
            for j, coefficient in constraint.coefficients.items():
                data.append(sign * float(coefficient))
                row_index.append(i)
                col_index.append(j)
            b.append(sign * float(constraint.rhs))
        if not constraints:
            return None, None
        return sparse.csr_matrix((data, (row_index, col_index)), shape=(len(constraints), n)), np.array(b)

    inequalities = [con for con in inst.constraints if con.sense != "="]
    equalities = [con for con in inst.constraints if con.sense == "="]
    A_ub, b_ub = matrix(inequalities, lambda con: con.sense == ">=")
    A_eq, b_eq = matrix(equalities, lambda con: False)

    result = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs",
                     options={"primal_feasibility_tolerance": tolerance, "dual_feasibility_tolerance": tolerance})
    status = {0: "optimal", 1: "cap-exceeded", 2: "infeasible", 3: "unbounded"}.get(result.status, "infeasible")
    if status != "optimal":
        return LPSolution(status, pivots=int(getattr(result, "nit", 0)), certifying=False)
    assignment = {name: float(value) for name, value in zip(inst.variables, result.x)}
    return LPSolution("optimal", optimum=float(result.fun), assignment=assignment,
                      pivots=int(getattr(result, "nit", 0)), certifying=False)
