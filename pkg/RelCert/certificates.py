"""Finite-window certificates of relative property A.

Three interchangeable forms are supported: set families A_x ⊆ K × ℕ, integer functions
ξ_x: K → ℕ and probability functions f(x) ∈ Prob(K). Points of K are usually coset
vertices; any hashable point works for certificates living on a space action.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, FrozenSet, Hashable, List, Optional, Tuple, Union

from .coset_space import CosetSpace, Vertex, act, rho
from .errors import (CertificateFormatError, ConventionMismatchError, EmptySupportError, SpecMismatchError)
from .groups import Element, GroupSpec, ball, element, identity, parse_group_spec
from .interfaces.abstract_space_action import AbstractSpaceAction
from .logging import PipelineLogger
from .services import helpers

Point = Hashable
Space = Union[CosetSpace, AbstractSpaceAction]

_logger = PipelineLogger("certificates").get_logger()


class Convention(str, Enum):
    REITER = "reiter-centered"
    IDENTITY = "identity-centered"


def point_key(point: Point):
    if isinstance(point, Vertex):
        return (0, point.sort_key(), "")
    return (1, (), str(point))


@dataclass(frozen=True)
class CertParams:
    R: int
    epsilon: Fraction
    S: int
    window: int

    def __post_init__(self):
        object.__setattr__(self, "epsilon", helpers.parse_rational(self.epsilon))
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.R < 1 or self.S < 0 or self.window < 0:
            raise ValueError(f"Invalid parameters R={self.R}, S={self.S}, window={self.window}")
        if self.window < self.R:
            raise ValueError(f"window must be >= R, got window={self.window} < R={self.R}")

    def to_dict(self) -> Dict[str, Any]:
        return {"R": self.R, "S": self.S, "epsilon": helpers.fraction_to_str(self.epsilon), "window": self.window}

    @classmethod
    def from_dict(cls, data: Dict) -> "CertParams":
        return cls(int(data["R"]), helpers.str_to_fraction(str(data["epsilon"])), int(data["S"]), int(data["window"]))


@dataclass(frozen=True)
class Certificate(ABC):
    spec: GroupSpec
    entries: Dict[Element, Any]
    convention: Convention = Convention.REITER
    form: str = field(default="", init=False)

    def window_elements(self) -> List[Element]:
        return sorted(self.entries, key=Element.sort_key)

    def support(self, x: Element) -> List[Point]:
        return sorted({self._point_of(item) for item in self.entries[x]}, key=point_key)

    @staticmethod
    def _point_of(item):
        return item

    @abstractmethod
    def distribution(self, x: Element) -> Dict[Point, Fraction]:
        """Unnormalised weight of each point; for sets this is the multiplicity."""

    def mass(self, x: Element) -> Fraction:
        return sum(self.distribution(x).values(), Fraction(0))


@dataclass(frozen=True)
class SetFamilyCertificate(Certificate):
    entries: Dict[Element, FrozenSet[Tuple[Point, int]]]
    form: str = field(default="sets", init=False)

    def __post_init__(self):
        for x, family in self.entries.items():
            if not family:
                raise EmptySupportError(f"A_x is empty for x = {x}")
            counts: Dict[Point, List[int]] = {}
            for point, j in family:
                counts.setdefault(point, []).append(j)
            for point, indices in counts.items():
                if sorted(indices) != list(range(1, len(indices) + 1)):
                    raise CertificateFormatError(f"Multiplicities of {point} at x = {x} are not an initial segment 1..m")

    @staticmethod
    def _point_of(item):
        return item[0]

    def distribution(self, x: Element) -> Dict[Point, Fraction]:
        weights: Dict[Point, Fraction] = {}
        for point, _ in self.entries[x]:
            weights[point] = weights.get(point, Fraction(0)) + 1
        return weights


@dataclass(frozen=True)
class IntegerCertificate(Certificate):
    entries: Dict[Element, Dict[Point, int]]
    form: str = field(default="integer", init=False)

    def __post_init__(self):
        cleaned = {}
        for x, xi in self.entries.items():
            if any(value < 0 for value in xi.values()):
                raise CertificateFormatError(f"Negative value in ξ_x for x = {x}")
            xi = {point: int(value) for point, value in xi.items() if value}
            if not xi:
                raise EmptySupportError(f"ξ_x has zero mass for x = {x}")
            cleaned[x] = xi
        object.__setattr__(self, "entries", cleaned)

    def distribution(self, x: Element) -> Dict[Point, Fraction]:
        return {point: Fraction(value) for point, value in self.entries[x].items()}


@dataclass(frozen=True)
class ProbCertificate(Certificate):
    entries: Dict[Element, Dict[Point, Fraction]]
    form: str = field(default="prob", init=False)

    def __post_init__(self):
        cleaned = {}
        for x, f in self.entries.items():
            f = {point: Fraction(value) for point, value in f.items() if value}
            if any(value < 0 for value in f.values()):
                raise CertificateFormatError(f"Negative probability at x = {x}")
            total = sum(f.values(), Fraction(0))
            if total != 1:
                raise CertificateFormatError(f"f(x) has mass {total} != 1 at x = {x}")
            cleaned[x] = f
        object.__setattr__(self, "entries", cleaned)

    def distribution(self, x: Element) -> Dict[Point, Fraction]:
        return dict(self.entries[x])


@dataclass
class VerificationReport:
    params: CertParams
    convention: Convention
    form: str
    generators: List[str]
    support_ok: bool
    support_witness: Optional[Tuple[Element, Point, int]]
    variation_ok: bool
    variation_witness: Optional[Tuple[Element, Element]]
    achieved_variation: Fraction
    pairs_checked: int = 0
    spec: Optional[GroupSpec] = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.support_ok and self.variation_ok

    def to_dict(self) -> Dict:
        def fmt_point(point):
            return point.format(self.spec) if isinstance(point, Vertex) else str(point)

        support_witness = None
        if self.support_witness is not None:
            x, point, value = self.support_witness
            support_witness = {"x": str(x), "point": fmt_point(point), "rho": value}
        variation_witness = None
        if self.variation_witness is not None:
            x, y = self.variation_witness
            variation_witness = {"x": str(x), "y": str(y)}
        return {
            "params": self.params.to_dict(),
            "convention": self.convention.value,
            "form": self.form,
            "generators": self.generators,
            "passed": self.passed,
            "support_ok": self.support_ok,
            "support_witness": support_witness,
            "variation_ok": self.variation_ok,
            "variation_witness": variation_witness,
            "achieved_variation": helpers.fraction_to_str(self.achieved_variation),
            "pairs_checked": self.pairs_checked,
        }


def l1_distance(f: Dict[Point, Fraction], g: Dict[Point, Fraction]) -> Fraction:
    return sum((abs(f.get(point, 0) - g.get(point, 0)) for point in set(f) | set(g)), Fraction(0))


def translate(space: Space, g: Element, distribution: Dict[Point, Fraction]) -> Dict[Point, Fraction]:
    """Push a finitely supported function forward along k ↦ g·k, for a coset space or a space action."""
    moved: Dict[Point, Fraction] = {}
    for point, value in distribution.items():
        target = space.act(g, point) if isinstance(space, AbstractSpaceAction) else act(space, g, point)
        moved[target] = moved.get(target, 0) + value
    return moved


def sets_to_integer(c: SetFamilyCertificate) -> IntegerCertificate:
    entries = {}
    for x in c.entries:
        xi: Dict[Point, int] = {}
        for point, _ in c.entries[x]:
            xi[point] = xi.get(point, 0) + 1
        entries[x] = xi
    return IntegerCertificate(c.spec, entries, c.convention)


def integer_to_sets(c: IntegerCertificate) -> SetFamilyCertificate:
    entries = {x: frozenset((point, j) for point, value in xi.items() for j in range(1, value + 1))
               for x, xi in c.entries.items()}
    return SetFamilyCertificate(c.spec, entries, c.convention)


def integer_to_prob(c: IntegerCertificate) -> ProbCertificate:
    entries = {}
    for x, xi in c.entries.items():
        mass = sum(xi.values())
        if mass == 0:
            raise EmptySupportError(f"ξ_x has zero mass for x = {x}")
        entries[x] = {point: Fraction(value, mass) for point, value in xi.items()}
    return ProbCertificate(c.spec, entries, c.convention)


def prob_to_integer(c: ProbCertificate, M: int) -> IntegerCertificate:
    """Round M·f(x) to integers summing to M by largest remainder, ties to the earlier point."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    entries = {}
    for x, f in c.entries.items():
        points = sorted(f, key=point_key)
        scaled = [f[point] * M for point in points]
        rounded = [value.numerator // value.denominator for value in scaled]
        deficit = M - sum(rounded)
        order = sorted(range(len(points)), key=lambda i: (-(scaled[i] - rounded[i]), i))
        for i in order[:deficit]:
            rounded[i] += 1
        entries[x] = {point: value for point, value in zip(points, rounded) if value}
    return IntegerCertificate(c.spec, entries, c.convention)


def as_prob(c: Certificate) -> ProbCertificate:
    if isinstance(c, ProbCertificate):
        return c
    if isinstance(c, SetFamilyCertificate):
        c = sets_to_integer(c)
    return integer_to_prob(c)


def convert(c: Certificate, form: str, M: Optional[int] = None) -> Certificate:
    if form == c.form:
        return c
    if form == "prob":
        return as_prob(c)
    if c.form == "prob":
        if M is None:
            raise ValueError("Converting a probability certificate needs a scale M")
        c = prob_to_integer(c, M)
    if form == "integer":
        return c if c.form == "integer" else sets_to_integer(c)
    if form == "sets":
        return c if c.form == "sets" else integer_to_sets(c)
    raise CertificateFormatError(f"Unknown certificate form {form!r}. Must be one of: sets, integer, prob")


def reiter_distribution(c: Certificate, space: Space, x: Element) -> Dict[Point, Fraction]:
    """The weights of c at x in Reiter form; identity-centered certificates are flipped, x·c(x⁻¹)."""
    if c.convention == Convention.REITER:
        return c.distribution(x)
    source = x.inverse()
    if source not in c.entries:
        raise CertificateFormatError(f"Certificate has no entry for {source}, needed to flip the entry at {x}")
    return translate(space, x, c.distribution(source))


def pair_variation(c: Certificate, space: Space, x: Element, y: Element) -> Fraction:
    """|A_x Δ A_y| / |A_x| for sets and integers, ‖f(x) − f(y)‖₁ for probabilities."""
    fx = reiter_distribution(c, space, x)
    fy = reiter_distribution(c, space, y)
    difference = l1_distance(fx, fy)
    if c.form == "prob":
        return difference
    return difference / sum(fx.values(), Fraction(0))


def window_pairs(spec: GroupSpec, window: int, R: int) -> List[Tuple[Element, Element]]:
    """Ordered pairs (x, y) of the radius-`window` ball with 1 <= d(x, y) <= R, deterministic order."""
    elements = ball(spec, window)
    members = set(elements)
    steps = [u for u in ball(spec, R) if not u.is_identity()]
    pairs = []
    for x in elements:
        for u in steps:
            y = x * u
            if y in members:
                pairs.append((x, y))
    return pairs


def verify(c: Certificate, cs: CosetSpace, p: CertParams, convention: Optional[Convention] = None) -> VerificationReport:
    if c.spec != cs.ambient:
        raise SpecMismatchError(f"Certificate over {c.spec.text} checked against a space over {cs.ambient.text}")
    if convention is not None and Convention(convention) != c.convention:
        raise ConventionMismatchError(f"Certificate is {c.convention.value}, but {Convention(convention).value} was requested")

    window = ball(cs.ambient, p.window)
    missing = [x for x in window if x not in c.entries]
    if missing:
        raise CertificateFormatError(f"Certificate has no entry for {missing[0]} in the radius-{p.window} window")

    e = identity(cs.ambient)
    support_witness = None
    for x in window:
        centre = x if c.convention == Convention.REITER else e
        for point in c.support(x):
            value = rho(cs, centre, point)
            if support_witness is None or value > support_witness[2]:
                support_witness = (x, point, value)
    support_ok = support_witness is None or support_witness[2] < p.S

    achieved = Fraction(0)
    variation_witness = None
    pairs = window_pairs(cs.ambient, p.window, p.R)
    for x, y in pairs:
        value = pair_variation(c, cs, x, y)
        if variation_witness is None or value > achieved:
            achieved, variation_witness = value, (x, y)
    variation_ok = not pairs or achieved < p.epsilon

    report = VerificationReport(
        params=p, convention=c.convention, form=c.form, generators=[g.symbol for g in cs.ambient.generators],
        support_ok=support_ok, support_witness=support_witness, variation_ok=variation_ok,
        variation_witness=variation_witness, achieved_variation=achieved, pairs_checked=len(pairs), spec=cs.ambient)
    _logger.info(f"Verified {c.form} certificate: support_ok={support_ok}, variation {achieved} "
                 f"over {len(pairs)} pairs, passed={report.passed}")
    return report


def _format_point(point: Point, spec: GroupSpec) -> str:
    return point.format(spec) if isinstance(point, Vertex) else str(point)


def _parse_point(text: str, spec: GroupSpec, points: str) -> Point:
    return Vertex.parse(text, spec) if points == "cosets" else text


def to_dict(c: Certificate, params: Optional[CertParams] = None) -> Dict:
    points = "cosets" if all(isinstance(point, Vertex) for x in c.entries for point in c.support(x)) else "labels"
    entries = {}
    for x in c.window_elements():
        if c.form == "sets":
            items = sorted(c.entries[x], key=lambda item: (point_key(item[0]), item[1]))
            entries[str(x)] = [[_format_point(point, c.spec), j] for point, j in items]
        else:
            values = c.entries[x]
            entries[str(x)] = [
                [_format_point(point, c.spec),
                 helpers.fraction_to_str(values[point]) if c.form == "prob" else str(values[point])]
                for point in sorted(values, key=point_key)]
    return {
        "form": c.form,
        "convention": c.convention.value,
        "group": c.spec.text,
        "generators": [g.symbol for g in c.spec.generators],
        "points": points,
        "params": params.to_dict() if params else None,
        "entries": entries,
    }


def from_dict(data: Dict) -> Tuple[Certificate, Optional[CertParams]]:
    try:
        form = data["form"]
        convention = Convention(data["convention"])
        spec = parse_group_spec(data["group"])
        points = data.get("points", "cosets")
        raw_entries = data["entries"]
        params = CertParams.from_dict(data["params"]) if data.get("params") else None
    except KeyError as error:
        raise CertificateFormatError(f"Certificate document is missing the field {error}")
    except ValueError as error:
        raise CertificateFormatError(f"Invalid certificate header: {error}")

    try:
        entries = {}
        for word, items in raw_entries.items():
            x = element(spec, word)
            if form == "sets":
                entries[x] = frozenset((_parse_point(point, spec, points), int(j)) for point, j in items)
            elif form == "integer":
                entries[x] = {_parse_point(point, spec, points): _integer_value(value) for point, value in items}
            elif form == "prob":
                entries[x] = {_parse_point(point, spec, points): helpers.str_to_fraction(value) for point, value in items}
            else:
                raise CertificateFormatError(f"Unknown certificate form {form!r}. Must be one of: sets, integer, prob")
        builder = {"sets": SetFamilyCertificate, "integer": IntegerCertificate, "prob": ProbCertificate}[form]
        return builder(spec, entries, convention), params
    except CertificateFormatError:
        raise
    except (ValueError, TypeError) as error:
        raise CertificateFormatError(f"Invalid certificate entry: {error}")


def save_certificate(c: Certificate, path: Union[str, Path], params: Optional[CertParams] = None):
    helpers.save_json(to_dict(c, params), path)


def load_certificate(path: Union[str, Path]) -> Tuple[Certificate, Optional[CertParams]]:
    return from_dict(helpers.load_json(path))


def _integer_value(text: str) -> int:
    value = helpers.str_to_fraction(text)
    if value.denominator != 1:
        raise CertificateFormatError(f"Integer certificate value {text!r} is not an integer")
    return value.numerator
