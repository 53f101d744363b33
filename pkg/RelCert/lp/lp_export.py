"""CPLEX LP text export for cross-checking with external solvers."""
from fractions import Fraction
from pathlib import Path
from typing import Union

from .instance import LPInstance


def format_coefficient(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return repr(float(value))


def _linear_form(coefficients) -> str:
    terms = []
    for j in sorted(coefficients):
        value = Fraction(coefficients[j])
        sign = "-" if value < 0 else "+"
        terms.append(f"{sign} {format_coefficient(abs(value))} x{j}")
    return " ".join(terms) if terms else "0 x0"


def to_lp_format(inst: LPInstance) -> str:
    """Variables are renamed x0, x1, ...; the original names are listed as comments."""
    lines = [f"\\ {key}: {value}" for key, value in sorted(inst.metadata.items()) if key != "cells"]
    lines += [f"\\ x{j} = {name}" for j, name in enumerate(inst.variables)]
    lines += ["Minimize", f" obj: {_linear_form(inst.objective)}", "Subject To"]
    for i, constraint in enumerate(inst.constraints):
        lines.append(f" c{i}: {_linear_form(constraint.coefficients)} {constraint.sense} {format_coefficient(constraint.rhs)}")
    lines += ["End", ""]
    return "\n".join(lines)


def export_lp(inst: LPInstance, path: Union[str, Path]):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(to_lp_format(inst))
