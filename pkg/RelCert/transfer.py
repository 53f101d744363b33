"""Constructions that turn one certificate, or one property A family, into another.

Everything here is exact. Each construction checks the identity or inequality that makes
it valid on the window it produces, and raises InvariantBreachError when that fails.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from .amenability import FiniteGraph
from .certificates import (Certificate, Convention, IntegerCertificate, ProbCertificate, Space, l1_distance,
                           pair_variation, translate, window_pairs)
from .coset_space import CosetSpace, Vertex, act
from .errors import (CertificateFormatError, EquivarianceError, FiniteSpaceError, InvariantBreachError,
                     OutOfWindowError, RankingError, SpecMismatchError)
from .groups import Element, GroupSpec, ball, normal_form, parse_group_spec, parse_word, sphere_letters
from .interfaces.abstract_space_action import AbstractSpaceAction
from .logging import PipelineLogger
from .services import helpers

Point = Hashable

_logger = PipelineLogger("transfer").get_logger()


class CosetSpaceAction(AbstractSpaceAction):
    """G acting on the vertices of a coset space, optionally with a metric other than the Schreier one."""

    def __init__(self, cs: CosetSpace, basepoint: Optional[Vertex] = None,
                 metric: Optional[Callable[[Vertex, Vertex], int]] = None):
        self.cs = cs
        self.spec = cs.ambient
        self._basepoint = basepoint if basepoint is not None else cs.representatives[0]
        self._metric = metric
        self._schreier: Optional[nx.Graph] = None

    @property
    def basepoint(self) -> Vertex:
        return self._basepoint

    def act(self, g: Element, x: Vertex) -> Vertex:
        return act(self.cs, g, x)

    def distance(self, x: Vertex, y: Vertex) -> int:
        if self._metric is not None:
            return self._metric(x, y)
        if self._schreier is None:
            self._schreier = nx.Graph()
            self._schreier.add_nodes_from(self.cs.vertices)
            self._schreier.add_edges_from((source, target) for (_, source), target in self.cs.schreier_edges.items())
        try:
            return nx.shortest_path_length(self._schreier, x, y)
        except (nx.NetworkXNoPath, nx.NodeNotFound):
            raise OutOfWindowError(f"No enumerated path between {x.format(self.spec)} and {y.format(self.spec)}")


class PermutationSpaceAction(AbstractSpaceAction):
    """
    A user-supplied action by partial permutations on labelled points.

    Each generator maps some points to others; inverses are read backwards. The metric is the
    graph metric of the given edges, or of the action graph when no edges are given.
    """

    def __init__(self, spec: GroupSpec, points: Sequence[str], generators: Mapping[str, Mapping[str, str]],
                 basepoint: str, stabilizers: Optional[Mapping[str, str]] = None,
                 edges: Optional[Sequence[Tuple[str, str]]] = None):
        self.spec = spec
        self.points = list(points)
        known = set(self.points)
        if basepoint not in known:
            raise ValueError(f"Basepoint {basepoint!r} is not one of the listed points")
        self._basepoint = basepoint
        self.stabilizers = dict(stabilizers or {})

        index = spec.symbol_index()
        self.forward: Dict[int, Dict[str, str]] = {i: {} for i in range(spec.rank)}
        self.backward: Dict[int, Dict[str, str]] = {i: {} for i in range(spec.rank)}
        for symbol, mapping in generators.items():
            if symbol not in index:
                raise SpecMismatchError(f"{symbol!r} is not a generator of {spec.text}")
            i = index[symbol]
            for source, target in mapping.items():
                if source not in known or target not in known:
                    raise ValueError(f"Generator {symbol} moves {source!r} to {target!r}, not both listed points")
                if target in self.backward[i]:
                    raise EquivarianceError(f"Generator {symbol} is not injective at {target!r}")
                self.forward[i][source] = target
                self.backward[i][target] = source

        self.graph = nx.Graph()
        self.graph.add_nodes_from(self.points)
        if edges:
            self.graph.add_edges_from(tuple(edge) for edge in edges)
        else:
            self.graph.add_edges_from((source, target) for mapping in self.forward.values()
                                      for source, target in mapping.items() if source != target)

    @property
    def basepoint(self) -> str:
        return self._basepoint

    def act(self, g: Element, x: str) -> str:
        if g.spec != self.spec:
            raise SpecMismatchError(f"Element of {g.spec.text} acting on a space for {self.spec.text}")
        current = x
        for i, sign in reversed(g.word):
            table = self.forward[i] if sign > 0 else self.backward[i]
            if current not in table:
                raise OutOfWindowError(f"{g} is undefined on {x!r}")
            current = table[current]
        return current

    def distance(self, x: str, y: str) -> int:
        try:
            return nx.shortest_path_length(self.graph, x, y)
        except nx.NetworkXNoPath:
            raise OutOfWindowError(f"Points {x!r} and {y!r} are not connected in the space")

    def check_relators(self) -> int:
        """Check the defining relations of cyclic products and abelian groups wherever they are defined."""
        relators: List[Tuple] = []
        if self.spec.kind == "cyclic-product":
            relators = [((i, 1),) * order for i, order in enumerate(self.spec.params) if order]
        elif self.spec.kind == "abelian":
            relators = [((i, 1), (j, 1), (i, -1), (j, -1))
                        for i in range(self.spec.rank) for j in range(i + 1, self.spec.rank)]
        checked = 0
        for relator in relators:
            for x in self.points:
                current = x
                for i, sign in reversed(relator):
                    table = self.forward[i] if sign > 0 else self.backward[i]
                    current = table.get(current)
                    if current is None:
                        break
                else:
                    checked += 1
                    if current != x:
                        raise EquivarianceError(f"A relator of {self.spec.text} moves {x!r} to {current!r}")
        return checked

    @classmethod
    def from_dict(cls, data: Dict) -> "PermutationSpaceAction":
        try:
            spec = parse_group_spec(data["group"])
            action = cls(spec, data["points"], data["generators"], data["basepoint"],
                         data.get("stabilizers"), data.get("edges"))
        except KeyError as error:
            raise ValueError(f"Space action document is missing the field {error}")
        action.check_relators()
        return action

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PermutationSpaceAction":
        return cls.from_dict(helpers.load_json(path))


@dataclass
class PropAFamily:
    """ξ(x) uniform on the points x, p^s(x), ..., p^{(n-1)s}(x) along a parent function p."""
    n: int
    parent: Callable[[Point], Point]
    stride: int = 1
    cache: Dict[Point, Dict[Point, Fraction]] = field(default_factory=dict, repr=False)

    @property
    def support_radius(self) -> int:
        return (self.n - 1) * self.stride

    def chain(self, x: Point) -> List[Point]:
        points = [x]
        current = x
        for _ in range(self.support_radius):
            current = self.parent(current)
            points.append(current)
        return points[::self.stride]

    def __call__(self, x: Point) -> Dict[Point, Fraction]:
        if x not in self.cache:
            chain = self.chain(x)
            if len(set(chain)) != len(chain):
                raise RankingError(f"The parent chain from {x} revisits a point")
            self.cache[x] = {point: Fraction(1, self.n) for point in chain}
        return self.cache[x]


def _mapping_parent(parent: Mapping[Point, Point]) -> Callable[[Point], Point]:
    def step(x: Point) -> Point:
        if x not in parent:
            raise OutOfWindowError(f"{x} has no parent inside the enumerated fragment")
        return parent[x]
    return step


def tree_certificates(tree: Optional[FiniteGraph], parent: Union[Mapping[Point, Point], Callable[[Point], Point]],
                      n: int, stride: int = 1) -> PropAFamily:
    """
    The property A family of a tree with a fixed end.

    With a finite tree fragment the parent ranking is checked: the fragment must be a tree, every
    parent a neighbour, and no vertex the parent of its own parent.
    """
    if n < 1 or stride < 1:
        raise ValueError(f"n and stride must be positive, got n={n}, stride={stride}")
    if tree is not None:
        if tree.graph.number_of_nodes() and not nx.is_tree(tree.graph):
            raise RankingError(f"{tree.name or 'The graph'} is not a tree")
        if isinstance(parent, Mapping):
            for x, p in parent.items():
                if not tree.graph.has_edge(x, p):
                    raise RankingError(f"Parent {p} of {x} is not adjacent to it")
                if parent.get(p) == x:
                    raise RankingError(f"{x} and {p} are each other's parent")
    step = _mapping_parent(parent) if isinstance(parent, Mapping) else parent
    return PropAFamily(n, step, stride)


def line_parent(g: FiniteGraph) -> Dict[int, int]:
    """Ranking of an integer path toward +∞."""
    return {x: x + 1 for x in g.graph.nodes if x + 1 in g.graph}


def adjacent_variation(fam: PropAFamily, tree: FiniteGraph) -> Fraction:
    """Largest ‖ξ(u) − ξ(v)‖₁ over tree edges whose two chains stay inside the fragment."""
    worst = Fraction(0)
    for u, v in tree.graph.edges:
        try:
            value = l1_distance(fam(u), fam(v))
        except OutOfWindowError:
            continue
        worst = max(worst, value)
    return worst


@dataclass
class InductionResult:
    certificate: ProbCertificate
    qi_constant: Fraction
    support_radius: int
    window: int

    @property
    def S(self) -> int:
        return self.support_radius + 1


def induce_from_space(action: AbstractSpaceAction, fam: PropAFamily, window: int) -> InductionResult:
    """μ(g) = g·ξ(g⁻¹x₀) for g in the window; the certificate is identity-centered."""
    spec = _spec_of(action)
    x0 = action.basepoint
    entries: Dict[Element, Dict[Point, Fraction]] = {}
    qi = Fraction(0)
    radius = 0
    for g in ball(spec, window):
        start = action.act(g.inverse(), x0)
        entries[g] = translate(action, g, fam(start))
        if not g.is_identity():
            qi = max(qi, Fraction(action.distance(x0, action.act(g, x0)), g.length))
        radius = max([radius] + [action.distance(x0, point) for point in entries[g]])
    if radius > fam.support_radius:
        raise InvariantBreachError(f"Induced support reaches {radius}, beyond the family's radius {fam.support_radius}")
    _logger.info(f"Induced certificate on window {window}: support radius {radius}, QI constant {qi}")
    return InductionResult(ProbCertificate(spec, entries, Convention.IDENTITY), qi, radius, window)


def check_induction_identity(action: AbstractSpaceAction, fam: PropAFamily, cert: ProbCertificate,
                             generators: Optional[Sequence[Element]] = None) -> int:
    """‖g·μ(w) − μ(gw)‖₁ = ‖ξ(w⁻¹x₀) − ξ(w⁻¹g⁻¹x₀)‖₁ for every w, gw in the window."""
    spec = cert.spec
    if generators is None:
        generators = sphere_letters(spec)
    x0 = action.basepoint
    checked = 0
    for w in cert.window_elements():
        for g in generators:
            gw = g * w
            if gw not in cert.entries:
                continue
            left = l1_distance(translate(action, g, cert.entries[w]), cert.entries[gw])
            right = l1_distance(fam(action.act(w.inverse(), x0)), fam(action.act(gw.inverse(), x0)))
            if left != right:
                raise InvariantBreachError(f"Induction identity fails at w={w}, g={g}: {left} != {right}")
            checked += 1
    return checked


def coset_projection(source: CosetSpace, target: CosetSpace,
                     component_map: Optional[Sequence[int]] = None) -> Callable[[Vertex], Vertex]:
    """g·H′_i ↦ g·H_{j(i)}, valid whenever H′_i ≤ H_{j(i)}."""
    if source.ambient != target.ambient:
        raise SpecMismatchError(f"Projection between spaces of {source.ambient.text} and {target.ambient.text}")
    if component_map is None:
        component_map = list(range(len(source.family)))
    if len(component_map) != len(source.family) or any(not 0 <= j < len(target.family) for j in component_map):
        raise ValueError(f"Invalid component map {list(component_map)}")

    def pi(v: Vertex) -> Vertex:
        return target.vertex_of(component_map[v.component], v.key)
    return pi


def pushforward_to_cosets(cert: ProbCertificate, pi: Callable[[Point], Vertex], source: Space,
                          target: CosetSpace, R: int = 1) -> ProbCertificate:
    """ζ(x)(y) = Σ_{π(k) = y} ξ(x)(k), after checking π·g = g·π on every support point."""
    if cert.spec != target.ambient:
        raise SpecMismatchError(f"Certificate over {cert.spec.text} pushed to a space over {target.ambient.text}")
    letters = sphere_letters(cert.spec)
    entries: Dict[Element, Dict[Vertex, Fraction]] = {}
    equivariance_checks = 0
    for x in cert.window_elements():
        fibre: Dict[Vertex, Fraction] = {}
        for point, value in cert.entries[x].items():
            image = pi(point)
            fibre[image] = fibre.get(image, Fraction(0)) + value
            for s in letters:
                try:
                    moved = _act(source, s, point)
                except OutOfWindowError:
                    continue
                if pi(moved) != act(target, s, image):
                    raise EquivarianceError(f"Projection does not commute with {s} at {point}")
                equivariance_checks += 1
        entries[x] = fibre
    pushed = ProbCertificate(cert.spec, entries, cert.convention)

    window = max((x.length for x in cert.entries), default=0)
    for x, y in window_pairs(cert.spec, window, R):
        if x not in cert.entries or y not in cert.entries:
            continue
        before = pair_variation(cert, source, x, y)
        after = pair_variation(pushed, target, x, y)
        if after > before:
            raise InvariantBreachError(f"Pushforward raised the variation at ({x}, {y}) from {before} to {after}")
    _logger.info(f"Pushed {len(entries)} entries to {target.ambient.text} cosets ({equivariance_checks} equivariance checks)")
    return pushed


def flip(cert: Certificate, space: Space) -> Certificate:
    """F(x) = x·c(x⁻¹), switching between the Reiter and identity-centered conventions."""
    other = Convention.IDENTITY if cert.convention == Convention.REITER else Convention.REITER
    entries = {}
    for x in cert.window_elements():
        source = x.inverse()
        if source not in cert.entries:
            raise OutOfWindowError(f"Flipping the entry at {x} needs the entry at {source}")
        moved = translate(space, x, cert.distribution(source))
        entries[x] = {point: int(value) for point, value in moved.items()} if cert.form == "integer" else moved
    if cert.form == "prob":
        return ProbCertificate(cert.spec, entries, other)
    if cert.form == "integer":
        return IntegerCertificate(cert.spec, entries, other)
    raise CertificateFormatError("Set-family certificates are flipped through their integer form")


def _quotient_map(spec: GroupSpec, quotient: GroupSpec, projection: Mapping[str, str]) -> Callable[[Element], Element]:
    images = {}
    for g in spec.generators:
        if g.symbol not in projection:
            raise ValueError(f"The projection does not say where {g.symbol} goes")
        images[g.index] = parse_word(projection[g.symbol], quotient)

    def project(x: Element) -> Element:
        word = []
        for i, sign in x.word:
            image = images[i]
            word.extend(image if sign > 0 else tuple((j, -s) for j, s in reversed(image)))
        return normal_form(word, quotient)
    return project


def lift_from_quotient(quot_cert: ProbCertificate, quot_cs: CosetSpace, cs: CosetSpace,
                       projection: Mapping[str, str], window: Optional[int] = None) -> ProbCertificate:
    """
    Pull a certificate for Q = G/H on K_Q = Q back to G relative to H.

    K = G/H is identified with Q by gH ↦ π(g); the identification is checked to be injective on
    the enumerated vertices and H is checked to lie in the kernel.
    """
    if len(cs.family) != 1 or len(quot_cs.family) != 1 or not quot_cs.family[0].is_trivial():
        raise ValueError("Lifting needs a single normal subgroup and the quotient's trivial subgroup")
    if quot_cert.spec != quot_cs.ambient:
        raise SpecMismatchError(f"Quotient certificate over {quot_cert.spec.text}, space over {quot_cs.ambient.text}")
    spec, quotient = cs.ambient, quot_cs.ambient
    project = _quotient_map(spec, quotient, projection)

    for h in cs.family[0].generators:
        if not project(Element(spec, h)).is_identity():
            raise EquivarianceError(f"The projection does not kill the subgroup generator {Element(spec, h)}")

    lifts: Dict[Vertex, Vertex] = {}
    for v in cs.vertices:
        q = Vertex(0, project(Element(spec, v.key)).word)
        if q in lifts:
            raise EquivarianceError(f"Cosets {lifts[q].format(spec)} and {v.format(spec)} project to the same point")
        lifts[q] = v

    if window is None:
        window = max((x.length for x in quot_cert.entries), default=0)
    entries: Dict[Element, Dict[Vertex, Fraction]] = {}
    for x in ball(spec, window):
        qx = project(x)
        if qx not in quot_cert.entries:
            raise OutOfWindowError(f"The quotient certificate has no entry for the image {qx} of {x}")
        lifted = {}
        for q, value in quot_cert.entries[qx].items():
            if q not in lifts:
                raise OutOfWindowError(f"No enumerated coset of {spec.text} projects to {q.format(quotient)}")
            lifted[lifts[q]] = value
        entries[x] = lifted
    _logger.info(f"Lifted a {quotient.text} certificate to {spec.text} on window {window}")
    return ProbCertificate(spec, entries, quot_cert.convention)


def check_lift_equality(lifted: ProbCertificate, cs: CosetSpace, quot_cert: ProbCertificate, quot_cs: CosetSpace,
                        projection: Mapping[str, str], R: int = 1) -> Fraction:
    """Every pair of the lifted window has the variation of its image pair; returns the largest."""
    project = _quotient_map(cs.ambient, quot_cs.ambient, projection)
    window = max((x.length for x in lifted.entries), default=0)
    worst = Fraction(0)
    for x, y in window_pairs(cs.ambient, window, R):
        value = pair_variation(lifted, cs, x, y)
        qx, qy = project(x), project(y)
        image = pair_variation(quot_cert, quot_cs, qx, qy) if qx != qy else Fraction(0)
        if value != image:
            raise InvariantBreachError(f"Lift changed the variation at ({x}, {y}): {image} became {value}")
        worst = max(worst, value)
    return worst


def finite_index_uniform(cs: CosetSpace, window: int) -> ProbCertificate:
    """The constant certificate x ↦ uniform measure on K, for K finite and fully enumerated."""
    if not cs.is_closed():
        raise FiniteSpaceError(f"The coset space of {cs.ambient.text} is not closed at depth {cs.depth}")
    p = {v: Fraction(1, len(cs)) for v in cs.vertices}
    entries = {x: dict(p) for x in ball(cs.ambient, window)}
    return ProbCertificate(cs.ambient, entries, Convention.REITER)


def space_variation(cert: Certificate, space: Space, R: int = 1) -> Fraction:
    """Largest pair variation of cert over its window, computed through any space."""
    window = max((x.length for x in cert.entries), default=0)
    worst = Fraction(0)
    for x, y in window_pairs(cert.spec, window, R):
        worst = max(worst, pair_variation(cert, space, x, y))
    return worst


def _spec_of(action: AbstractSpaceAction) -> GroupSpec:
    spec = getattr(action, "spec", None)
    if spec is None:
        raise SpecMismatchError(f"{type(action).__name__} does not name its group")
    return spec


def _act(space: Space, g: Element, point: Point) -> Point:
    return space.act(g, point) if isinstance(space, AbstractSpaceAction) else act(space, g, point)
