"""Finite-window linear programs for relative property A and invariant means.

Both programs minimise a shared bound t on ℓ¹ variations. Each ℓ¹ term is linearised with
one slack per (pair, point) and two inequalities  s ≥ a − b,  s ≥ b − a,  and the slacks of
a pair sum to at most t.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from ..certificates import Convention, ProbCertificate, window_pairs
from ..coset_space import CosetSpace, Vertex, act, vertices_within
from ..errors import EmptySupportError, InvariantBreachError, OutOfWindowError
from ..groups import Element, ball, normal_form
from ..logging import PipelineLogger
from .instance import LPInstance, LPSolution
from .simplex import solve_lp

_logger = PipelineLogger("lp_search").get_logger()


def _add_l1_bound(inst: LPInstance, label: str, terms: Sequence[Tuple[str, Dict[int, int]]], t: int):
    """Add Σ_k |Σ_j c_j x_j| ≤ t where each term is the linear form of one point's difference."""
    slacks = {}
    for point, form in terms:
        s = inst.add_variable(f"s[{label}][{point}]")
        slacks[s] = 1
        upper = dict(form)
        upper[s] = -1
        inst.add_constraint(upper, "<=", 0, f"{label}:{point}:+")
        lower = {j: -c for j, c in form.items()}
        lower[s] = -1
        inst.add_constraint(lower, "<=", 0, f"{label}:{point}:-")
    slacks[t] = -1
    inst.add_constraint(slacks, "<=", 0, f"{label}:sum")


def build_relA_lp(cs: CosetSpace, window: int, S: int, R: int) -> LPInstance:
    """min t over f(x) ∈ Prob({k : ρ(x,k) < S}) with ‖f(x) − f(y)‖₁ ≤ t whenever 1 ≤ d(x,y) ≤ R."""
    if S < 1:
        raise EmptySupportError(f"S = {S} leaves no admissible support (need rho(x,k) < S)")
    spec = cs.ambient
    elements = ball(spec, window)
    inst = LPInstance(metadata={"kind": "relA", "group": spec.text, "window": window, "S": S, "R": R,
                                "convention": Convention.REITER.value, "cells": []})

    supports: Dict[Element, List[Vertex]] = {}
    variables: Dict[Tuple[Element, Vertex], int] = {}
    for x in elements:
        supports[x] = vertices_within(cs, x, S - 1)
        if not supports[x]:
            raise EmptySupportError(f"No vertex k with rho({x}, k) < {S}")
        row = {}
        for k in supports[x]:
            j = inst.add_variable(f"f[{x}][{k.format(spec)}]")
            variables[(x, k)] = j
            inst.metadata["cells"].append((j, x, k))
            row[j] = 1
        inst.add_constraint(row, "=", 1, f"mass[{x}]")

    t = inst.add_variable("t")
    order = {x: i for i, x in enumerate(elements)}
    for x, y in window_pairs(spec, window, R):
        if order[x] > order[y]:
            continue
        terms = []
        for k in sorted(set(supports[x]) | set(supports[y]), key=Vertex.sort_key):
            form = {}
            if (x, k) in variables:
                form[variables[(x, k)]] = 1
            if (y, k) in variables:
                form[variables[(y, k)]] = -1
            terms.append((k.format(spec), form))
        _add_l1_bound(inst, f"{x}|{y}", terms, t)

    inst.minimize({t: 1})
    _logger.info(f"relA LP for {spec.text} (window {window}, S {S}, R {R}): {inst.size}")
    return inst


def build_mean_lp(cs: CosetSpace, support_radius: int, generators: Optional[Sequence[Element]] = None) -> LPInstance:
    """min t over mu ∈ Prob({k : ρ(e,k) ≤ r}) with ‖s·mu − mu‖₁ ≤ t for each generator s; mass pushed
    outside the support by s counts fully."""
    spec = cs.ambient
    if generators is None:
        generators = [normal_form(((g.index, 1),), spec) for g in spec.generators]
    support = [v for v in cs.vertices if len(v.key) <= support_radius]
    if not support:
        raise EmptySupportError(f"No vertex within support radius {support_radius}")
    if support_radius + 1 > cs.depth:
        raise OutOfWindowError(f"Support radius {support_radius} needs depth {support_radius + 1}, the space has {cs.depth}")

    inst = LPInstance(metadata={"kind": "mean", "group": spec.text, "support_radius": support_radius,
                                "generators": [str(s) for s in generators], "cells": []})
    mu = {}
    for k in support:
        mu[k] = inst.add_variable(f"mu[{k.format(spec)}]")
        inst.metadata["cells"].append((mu[k], None, k))
    inst.add_constraint({j: 1 for j in mu.values()}, "=", 1, "mass")

    t = inst.add_variable("t")
    for s in generators:
        # (s·mu)(v) = mu(s⁻¹v); the image of each support point is where its mass goes
        image = {act(cs, s, k): k for k in support}
        points = sorted(set(support) | set(image), key=Vertex.sort_key)
        terms = []
        for v in points:
            form = {}
            if v in image:
                form[mu[image[v]]] = 1
            if v in mu:
                form[mu[v]] = form.get(mu[v], 0) - 1
            terms.append((v.format(spec), {j: c for j, c in form.items() if c}))
        _add_l1_bound(inst, str(s), terms, t)

    inst.minimize({t: 1})
    _logger.info(f"Mean LP for {spec.text} (support radius {support_radius}): {inst.size}")
    return inst


def certificate_from_solution(inst: LPInstance, solution: LPSolution, cs: CosetSpace) -> ProbCertificate:
    if inst.metadata.get("kind") != "relA":
        raise ValueError("Only relative property A programs carry a certificate")
    if not solution.is_optimal or not solution.certifying:
        raise ValueError(f"A certificate needs an exact optimal solution, got status {solution.status}")
    entries: Dict[Element, Dict[Vertex, Fraction]] = {}
    for j, x, k in inst.metadata["cells"]:
        value = solution.value(inst.variables[j])
        if value:
            entries.setdefault(x, {})[k] = value
    return ProbCertificate(cs.ambient, entries, Convention.REITER)


def mean_from_solution(inst: LPInstance, solution: LPSolution) -> Dict[Vertex, Fraction]:
    if inst.metadata.get("kind") != "mean":
        raise ValueError("Not an invariant-mean program")
    return {k: solution.value(inst.variables[j]) for j, _, k in inst.metadata["cells"] if solution.value(inst.variables[j])}


@dataclass
class OptimumCurve:
    kind: str
    points: List[Tuple[int, int, Fraction]] = field(default_factory=list)

    @property
    def optima(self) -> List[Fraction]:
        return [optimum for _, _, optimum in self.points]

    @property
    def monotone(self) -> bool:
        return all(later <= earlier for earlier, later in zip(self.optima, self.optima[1:]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(window, S, Fraction(optimum).numerator, Fraction(optimum).denominator) for window, S, optimum in self.points],
            columns=["window", "S", "optimum_num", "optimum_den"])

    def save_csv(self, path: Union[str, Path]):
        self.to_frame().to_csv(path, index=False, lineterminator="\n")


def optimum_curve(cs: CosetSpace, windows: Sequence[int], S_policy: Callable[[int], int] = lambda w: w,
                  R: int = 1, kind: str = "relA",
                  solver: Callable[[LPInstance], LPSolution] = solve_lp) -> OptimumCurve:
    """Exact optima per window; for kind="mean" each window is a support radius and S echoes it."""
    curve = OptimumCurve(kind)
    for window in windows:
        if kind == "relA":
            S = S_policy(window)
            inst = build_relA_lp(cs, window, S, R)
        elif kind == "mean":
            S = window
            inst = build_mean_lp(cs, window)
        else:
            raise ValueError(f"Unknown curve kind {kind!r}. Must be one of: relA, mean")
        solution = solver(inst)
        if not solution.is_optimal:
            raise InvariantBreachError(f"LP at window {window} ended with status {solution.status}")
        curve.points.append((window, S, solution.optimum))
        _logger.info(f"{kind} optimum at window {window}, S {S}: {solution.optimum}")
    if not curve.monotone:
        _logger.warning(f"{kind} optimum curve is not non-increasing: {[str(v) for v in curve.optima]}")
    return curve
