from fractions import Fraction

import pytest

from RelCert.lp.instance import LPInstance
from RelCert.lp.lp_export import format_coefficient, to_lp_format
from RelCert.lp.simplex import solve_lp, solve_lp_float


def beale_instance():
    """Beale's example, on which the textbook pivoting rule cycles forever."""
    inst = LPInstance()
    x4, x5, x6, x7 = (inst.add_variable(name) for name in ("x4", "x5", "x6", "x7"))
    inst.add_constraint({x4: Fraction(1, 4), x5: -8, x6: -1, x7: 9}, "<=", 0)
    inst.add_constraint({x4: Fraction(1, 2), x5: -12, x6: Fraction(-1, 2), x7: 3}, "<=", 0)
    inst.add_constraint({x6: 1}, "<=", 1)
    inst.minimize({x4: Fraction(-3, 4), x5: 20, x6: Fraction(-1, 2), x7: 6})
    return inst


class TestExactSimplex:
    def test_blands_rule_does_not_cycle(self):
        inst = beale_instance()
        solution = solve_lp(inst)
        assert solution.is_optimal
        assert solution.optimum == Fraction(-5, 4)
        assert isinstance(solution.optimum, Fraction)
        assert inst.is_feasible(solution.assignment)
        assert inst.objective_value(solution.assignment) == Fraction(-5, 4)

    def test_equality_constraints_need_phase_one(self):
        inst = LPInstance()
        x, y = inst.add_variable("x"), inst.add_variable("y")
        inst.add_constraint({x: 1, y: 1}, "=", 1)
        inst.add_constraint({x: 1}, ">=", Fraction(1, 3))
        inst.minimize({x: 1, y: -1})
        solution = solve_lp(inst)
        assert solution.optimum == Fraction(-1, 3)
        assert solution.value("x") == Fraction(1, 3)

    def test_infeasible(self):
        inst = LPInstance()
        x = inst.add_variable("x")
        inst.add_constraint({x: 1}, ">=", 2)
        inst.add_constraint({x: 1}, "<=", 1)
        inst.minimize({x: 1})
        assert solve_lp(inst).status == "infeasible"

    def test_unbounded(self):
        inst = LPInstance()
        x = inst.add_variable("x")
        inst.add_constraint({x: 1}, ">=", 1)
        inst.minimize({x: -1})
        assert solve_lp(inst).status == "unbounded"

    def test_pivot_cap(self):
        solution = solve_lp(beale_instance(), pivot_cap=1)
        assert solution.status == "cap-exceeded"
        assert not solution.is_optimal

    def test_redundant_equalities(self):
        inst = LPInstance()
        x, y = inst.add_variable("x"), inst.add_variable("y")
        inst.add_constraint({x: 1, y: 1}, "=", 2)
        inst.add_constraint({x: 2, y: 2}, "=", 4)
        inst.minimize({x: 1})
        solution = solve_lp(inst)
        assert solution.optimum == 0
        assert solution.value("y") == 2


class TestInstance:
    def test_duplicate_variable(self):
        inst = LPInstance()
        inst.add_variable("t")
        with pytest.raises(ValueError):
            inst.add_variable("t")

    def test_undeclared_variable(self):
        inst = LPInstance()
        with pytest.raises(ValueError):
            inst.add_constraint({0: 1}, "<=", 1)

    def test_bad_sense(self):
        inst = LPInstance()
        x = inst.add_variable("x")
        with pytest.raises(ValueError):
            inst.add_constraint({x: 1}, "<", 1)

    def test_size(self):
        assert beale_instance().size == {"variables": 4, "constraints": 3, "nonzeros": 9}


class TestFloatSolver:
    def test_agrees_with_exact_solver(self):
        solution = solve_lp_float(beale_instance())
        assert solution.status == "optimal"
        assert not solution.certifying
        assert solution.optimum == pytest.approx(-1.25)


class TestExport:
    def test_lp_text(self):
        text = to_lp_format(beale_instance())
        assert "Minimize" in text
        assert "Subject To" in text
        assert text.rstrip().endswith("End")
        assert " c2: + 1 x2 <= 1" in text
        assert "\\ x0 = x4" in text

    def test_coefficients(self):
        assert format_coefficient(Fraction(3)) == "3"
        assert format_coefficient(Fraction(1, 4)) == "0.25"
