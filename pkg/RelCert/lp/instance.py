from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Union

SENSES = ("<=", ">=", "=")


@dataclass(frozen=True)
class Constraint:
    coefficients: Dict[int, Fraction]
    sense: str
    rhs: Fraction
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"Invalid constraint sense {self.sense!r}. Must be one of: {', '.join(SENSES)}")


@dataclass
class LPInstance:
    """
    minimize  Σ objective[j]·x_j
    subject to the constraints, x >= 0.

    Variables are referenced by position; ``variables`` holds their names, e.g. f[x][k],
    mu[k], s[x|y][k] or t.
    """
    variables: List[str] = field(default_factory=list)
    objective: Dict[int, Fraction] = field(default_factory=dict)
    constraints: List[Constraint] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self._positions = {name: j for j, name in enumerate(self.variables)}

    def add_variable(self, name: str) -> int:
        if name in self._positions:
            raise ValueError(f"Variable {name} is already declared")
        self._positions[name] = len(self.variables)
        self.variables.append(name)
        return self._positions[name]

    def index(self, name: str) -> int:
        return self._positions[name]

    def add_constraint(self, coefficients: Dict[int, Any], sense: str, rhs: Any = 0, name: str = ""):
        for j in coefficients:
            if not 0 <= j < len(self.variables):
                raise ValueError(f"Constraint {name or len(self.constraints)} references undeclared variable {j}")
        cleaned = {j: Fraction(value) for j, value in coefficients.items() if value}
        self.constraints.append(Constraint(cleaned, sense, Fraction(rhs), name))

    def minimize(self, coefficients: Dict[int, Any]):
        self.objective = {j: Fraction(value) for j, value in coefficients.items() if value}

    @property
    def size(self) -> Dict[str, int]:
        return {"variables": len(self.variables), "constraints": len(self.constraints),
                "nonzeros": sum(len(c.coefficients) for c in self.constraints)}

    def is_feasible(self, assignment: Dict[str, Fraction]) -> bool:
        """Exact check of an assignment given by variable name; missing names are zero."""
        values = [assignment.get(name, Fraction(0)) for name in self.variables]
        if any(value < 0 for value in values):
            return False
        for constraint in self.constraints:
            lhs = sum((coefficient * values[j] for j, coefficient in constraint.coefficients.items()), Fraction(0))
            if constraint.sense == "<=" and lhs > constraint.rhs:
                return False
            if constraint.sense == ">=" and lhs < constraint.rhs:
                return False
            if constraint.sense == "=" and lhs != constraint.rhs:
                return False
        return True

    def objective_value(self, assignment: Dict[str, Fraction]) -> Fraction:
        return sum((coefficient * assignment.get(self.variables[j], Fraction(0))
                    for j, coefficient in self.objective.items()), Fraction(0))


@dataclass
class LPSolution:
    status: str
    optimum: Optional[Union[Fraction, float]] = None
    assignment: Dict[str, Union[Fraction, float]] = field(default_factory=dict)
    pivots: int = 0
    certifying: bool = True

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, name: str):
        return self.assignment.get(name, Fraction(0) if self.certifying else 0.0)
