"""The cofinite G-set K = G/H_1 ⊔ ... ⊔ G/H_m, truncated to a finite depth.

A vertex is a pair (component, key) where key is the shortlex-least word of the coset
key·H_component. Since the least word of a coset is also a shortest one, the key doubles as
the minimal transporter g_v carrying the component's representative H_i to v, and the
vertex lies at Schreier distance len(key) from that representative.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .engines.abelian_engine import AbelianEngine
from .errors import CosetSearchExhaustedError, OutOfWindowError, ResourceLimitError, SpecMismatchError
from .groups import (Element, GroupSpec, Letter, Word, ball, format_word, invert_word, letter_key, parse_group_spec,
                     parse_word, shortlex_key)
from .interfaces.abstract_coset_resolver import AbstractCosetResolver
from .logging import PipelineLogger
from .services import helpers
from .services.configuration_manager import ConfigurationManager

_logger = PipelineLogger("coset_space").get_logger()


@dataclass(frozen=True)
class SubgroupSpec:
    label: str
    generators: Tuple[Word, ...] = ()

    def __post_init__(self):
        if not self.label:
            raise ValueError("A subgroup needs a nonempty label")

    @classmethod
    def from_words(cls, spec: GroupSpec, label: str, words: Iterable[str]) -> "SubgroupSpec":
        generators = []
        for text in words:
            word = spec.reduce(parse_word(text, spec))
            if word:
                generators.append(word)
        return cls(label, tuple(generators))

    def is_trivial(self) -> bool:
        return not self.generators

    def to_dict(self, spec: GroupSpec) -> Dict:
        return {"label": self.label, "generators": [format_word(w, spec) for w in self.generators]}


def trivial_subgroup(label: str = "1") -> SubgroupSpec:
    return SubgroupSpec(label, ())


@dataclass(frozen=True)
class Vertex:
    component: int
    key: Word

    def sort_key(self):
        return (self.component, shortlex_key(self.key))

    def format(self, spec: GroupSpec) -> str:
        return f"{self.component}:{format_word(self.key, spec)}"

    @classmethod
    def parse(cls, text: str, spec: GroupSpec) -> "Vertex":
        component, _, word = text.partition(":")
        return cls(int(component), spec.reduce(parse_word(word, spec)))


class TransversalResolver(AbstractCosetResolver):
    """
    Exact canonical keys for subgroups generated by single group generators of a free group,
    a free product of cyclics or a free abelian group, and for the trivial subgroup of any
    group. In the free and free-product cases the subgroup is a free factor, so the least
    word of wH is nf(w) with its maximal suffix over H's letters removed; in the abelian
    case H's coordinates are simply dropped.
    """
    name = "transversal"

    def __init__(self, spec: GroupSpec, family: Sequence[SubgroupSpec]):
        if not self.applies(spec, family):
            raise ValueError(f"No transversal is available for this family in {spec.text}")
        self.spec = spec
        self.letter_sets = [frozenset(word[0][0] for word in h.generators) for h in family]

    @staticmethod
    def applies(spec: GroupSpec, family: Sequence[SubgroupSpec]) -> bool:
        for subgroup in family:
            if subgroup.is_trivial():
                continue
            if spec.kind not in ("free", "cyclic-product", "abelian"):
                return False
            if any(len(word) != 1 for word in subgroup.generators):
                return False
        return True

    def canonical(self, component: int, word: Word) -> Word:
        reduced = self.spec.reduce(word)
        letters = self.letter_sets[component]
        if not letters:
            return reduced
        if self.spec.kind == "abelian":
            return tuple(letter for letter in reduced if letter[0] not in letters)
        end = len(reduced)
        while end > 0 and reduced[end - 1][0] in letters:
            end -= 1
        return reduced[:end]


class FoldedGraph:
    """
    The folded core graph of a subgroup of a free group. Every generator word is laid out
    as a loop at the base vertex 0 and edges with the same label and a common endpoint are
    identified until none remain, so reading a reduced word from the base is deterministic
    and the reduced loops at the base spell exactly the subgroup's elements.
    """

    def __init__(self, generators: Sequence[Word]):
        parent = [0]
        edges = []
        for word in generators:
            current = 0
            for position, (index, sign) in enumerate(word):
                if position == len(word) - 1:
                    target = 0
                else:
                    target = len(parent)
                    parent.append(target)
                edges.append((current, index, target) if sign > 0 else (target, index, current))
                current = target

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        folding = True
        while folding:
            folding = False
            outgoing, incoming = {}, {}
            for source, index, target in edges:
                source, target = find(source), find(target)
                for table, anchor, end in ((outgoing, source, target), (incoming, target, source)):
                    seen = table.setdefault((anchor, index), end)
                    if find(seen) != find(end):
                        parent[max(find(seen), find(end))] = min(find(seen), find(end))
                        folding = True

        self.forward: Dict[Tuple[int, int], int] = {}
        self.backward: Dict[Tuple[int, int], int] = {}
        for source, index, target in edges:
            self.forward[(find(source), index)] = find(target)
            self.backward[(find(target), index)] = find(source)
        self.distance = self._distances()

    def step(self, vertex: int, letter: Letter) -> Optional[int]:
        index, sign = letter
        return (self.forward if sign > 0 else self.backward).get((vertex, index))

    def _distances(self) -> Dict[int, int]:
        distance = {0: 0}
        frontier = [0]
        while frontier:
            next_frontier = []
            for vertex in frontier:
                for table in (self.forward, self.backward):
                    for (anchor, _), end in table.items():
                        if anchor == vertex and end not in distance:
                            distance[end] = distance[vertex] + 1
                            next_frontier.append(end)
            frontier = next_frontier
        return distance

    def read(self, word: Word) -> Tuple[int, Word]:
        """Follow word from the base as far as the graph allows; return the vertex reached and the unread suffix."""
        vertex = 0
        for position, letter in enumerate(word):
            target = self.step(vertex, letter)
            if target is None:
                return vertex, word[position:]
            vertex = target
        return vertex, ()

    def least_path_home(self, vertex: int, letters: Sequence[Letter]) -> Word:
        """The lexicographically least geodesic label from vertex back to the base."""
        path = []
        while vertex != 0:
            for letter in letters:
                target = self.step(vertex, letter)
                if target is not None and self.distance[target] == self.distance[vertex] - 1:
                    path.append(letter)
                    vertex = target
                    break
        return tuple(path)


class FoldingResolver(AbstractCosetResolver):
    """
    Exact canonical keys for any finitely generated subgroup of a free group. Reading w⁻¹
    through the folded graph of H stops at a vertex c with an unread suffix s; the shortest
    words of wH are then s⁻¹·p for the geodesic labels p from c back to the base, and the
    shortlex-least of them takes the least such p.
    """
    name = "folding"

    def __init__(self, spec: GroupSpec, family: Sequence[SubgroupSpec]):
        if spec.kind != "free":
            raise ValueError(f"Folding needs a free ambient group, got {spec.text}")
        self.spec = spec
        self.letters = sorted(spec.letters(), key=letter_key)
        self.graphs = [FoldedGraph(subgroup.generators) for subgroup in family]
        for subgroup, graph in zip(family, self.graphs):
            _logger.debug(f"Folded {subgroup.label} to {len(graph.distance)} vertices")

    def canonical(self, component: int, word: Word) -> Word:
        graph = self.graphs[component]
        vertex, rest = graph.read(invert_word(self.spec.reduce(word)))
        return self.spec.reduce(invert_word(rest) + graph.least_path_home(vertex, self.letters))


class LatticeResolver(AbstractCosetResolver):
    """
    Exact canonical keys for subgroups of a free abelian group. A subgroup is the lattice
    spanned by its generators' exponent vectors, kept in echelon form; reducing a vector by
    the pivots gives a residue that is zero exactly on the lattice and equal for vectors in
    the same coset. The key of a coset is the first word of the ball, in shortlex order,
    with the coset's residue.
    """
    name = "lattice"

    def __init__(self, spec: GroupSpec, family: Sequence[SubgroupSpec]):
        if spec.kind != "abelian":
            raise ValueError(f"Lattice reduction needs an abelian ambient group, got {spec.text}")
        self.spec = spec
        self.bases = [self._echelon([AbelianEngine.exponents(spec, w) for w in subgroup.generators], spec.rank)
                      for subgroup in family]
        self._ball: List[Word] = []
        self._ball_radius = -1
        self._keys: Dict[Tuple[int, Tuple[int, ...]], Word] = {}

    @staticmethod
    def _echelon(vectors: List[List[int]], rank: int) -> List[Tuple[int, List[int]]]:
        rows = [list(v) for v in vectors if any(v)]
        basis = []
        for column in range(rank):
            while True:
                active = [row for row in rows if row[column]]
                if len(active) <= 1:
                    break
                pivot = min(active, key=lambda row: abs(row[column]))
                for row in active:
                    if row is not pivot:
                        quotient = row[column] // pivot[column]
                        for i in range(len(row)):
                            row[i] -= quotient * pivot[i]
            active = [row for row in rows if row[column]]
            if active:
                pivot = active[0]
                if pivot[column] < 0:
                    pivot[:] = [-x for x in pivot]
                basis.append((column, pivot))
                rows = [row for row in rows if row is not pivot and any(row)]
        return basis

    def residue(self, component: int, word: Word) -> Tuple[int, ...]:
        vector = AbelianEngine.exponents(self.spec, word)
        for column, row in self.bases[component]:
            quotient = vector[column] // row[column]
            for i in range(len(vector)):
                vector[i] -= quotient * row[i]
        return tuple(vector)

    def contains(self, component: int, word: Word) -> bool:
        return not any(self.residue(component, word))

    def canonical(self, component: int, word: Word) -> Word:
        word = self.spec.reduce(word)
        target = self.residue(component, word)
        cached = self._keys.get((component, target))
        if cached is not None:
            return cached
        if len(word) > self._ball_radius:
            self._ball = [g.word for g in ball(self.spec, len(word))]
            self._ball_radius = len(word)
        key = next(u for u in self._ball if self.residue(component, u) == target)
        self._keys[(component, target)] = key
        return key


class MembershipResolver(AbstractCosetResolver):
    """
    Membership by enumeration, for finite subgroups of any ambient group. Breadth-first search
    over products of H's generators must close up, with no new products in a layer, before
    ``layer_cap`` layers; H is then listed in full and the key of wH is the shortlex-least
    nf(w·h). A search that does not close raises CosetSearchExhaustedError.
    """
    name = "membership"

    def __init__(self, spec: GroupSpec, family: Sequence[SubgroupSpec],
                 layer_cap: Optional[int] = None, element_cap: Optional[int] = None):
        self.spec = spec
        self.layer_cap = layer_cap or ConfigurationManager.get_setting("search", "membership_layer_cap")
        self.element_cap = element_cap or ConfigurationManager.get_setting("search", "membership_element_cap")
        self.elements = [self._search(subgroup) for subgroup in family]

    def _search(self, subgroup: SubgroupSpec) -> List[Word]:
        steps = list(subgroup.generators) + [invert_word(w) for w in subgroup.generators]
        seen = {()}
        frontier = [()]
        for layer in range(1, self.layer_cap + 1):
            next_frontier = []
            for word in frontier:
                for step in steps:
                    product = self.spec.reduce(word + step)
                    if product not in seen:
                        seen.add(product)
                        next_frontier.append(product)
            if len(seen) > self.element_cap:
                raise ResourceLimitError(f"Membership search for {subgroup.label} exceeded {self.element_cap} elements")
            if not next_frontier:
                _logger.debug(f"{subgroup.label} closed after {layer} layers with {len(seen)} elements")
                return sorted(seen, key=shortlex_key)
            frontier = next_frontier
        raise CosetSearchExhaustedError(
            f"Membership search for {subgroup.label} did not close after {self.layer_cap} layers ({len(seen)} elements)")

    def contains(self, component: int, word: Word) -> bool:
        return self.spec.reduce(word) in set(self.elements[component])

    def canonical(self, component: int, word: Word) -> Word:
        word = self.spec.reduce(word)
        return min((self.spec.reduce(word + h) for h in self.elements[component]), key=shortlex_key)


class CosetSpace:
    def __init__(self, ambient: GroupSpec, family: Sequence[SubgroupSpec], depth: int,
                 resolver: AbstractCosetResolver, reach: Optional[int] = None):
        self.ambient = ambient
        self.family = tuple(family)
        self.depth = depth
        self.resolver = resolver
        self.reach = reach if reach is not None else ConfigurationManager.get_setting("search", "on_demand_reach")
        self.vertices: List[Vertex] = []
        self.schreier_edges: Dict[Tuple[Letter, Vertex], Vertex] = {}
        self._index: Dict[Vertex, int] = {}
        self._on_demand: Dict[Vertex, None] = {}

    @property
    def representatives(self) -> List[Vertex]:
        return [Vertex(i, ()) for i in range(len(self.family))]

    @property
    def transporters(self) -> Dict[Vertex, Element]:
        return {v: Element(self.ambient, v.key) for v in self.vertices}

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v: Vertex) -> bool:
        return v in self._index

    def index_of(self, v: Vertex) -> int:
        return self._index[v]

    def component_vertices(self, component: int) -> List[Vertex]:
        return [v for v in self.vertices if v.component == component]

    def _set_vertices(self, vertices: Iterable[Vertex]):
        self.vertices = sorted(vertices, key=Vertex.sort_key)
        self._index = {v: i for i, v in enumerate(self.vertices)}

    def vertex_of(self, component: int, word: Word) -> Vertex:
        """The vertex word·H_component, materialised on demand beyond depth when possible."""
        key = self.resolver.canonical(component, word)
        vertex = Vertex(component, key)
        if vertex in self._index or vertex in self._on_demand:
            return vertex
        if len(key) <= self.depth:
            raise OutOfWindowError(f"Vertex {vertex.format(self.ambient)} is missing from the enumerated space")
        if len(key) > self.reach:
            raise OutOfWindowError(
                f"Vertex {vertex.format(self.ambient)} lies at distance {len(key)}, beyond the on-demand reach {self.reach}")
        self._on_demand[vertex] = None
        return vertex

    def is_closed(self) -> bool:
        """True when every enumerated vertex has every Schreier edge, i.e. K is finite and fully enumerated."""
        letters = self.ambient.letters()
        return all((letter, v) in self.schreier_edges for v in self.vertices for letter in letters)

    def to_dict(self) -> Dict:
        spec = self.ambient
        letter_text = lambda letter: format_word((letter,), spec)
        return {
            "ambient": spec.text,
            "generators": [g.symbol for g in spec.generators],
            "family": [h.to_dict(spec) for h in self.family],
            "depth": self.depth,
            "resolver": self.resolver.name,
            "vertices": [[v.component, format_word(v.key, spec)] for v in self.vertices],
            "representatives": [[v.component, format_word(v.key, spec)] for v in self.representatives],
            "transporters": [[v.format(spec), format_word(v.key, spec)] for v in self.vertices],
            "edges": [[letter_text(letter), source.format(spec), target.format(spec)]
                      for (letter, source), target in sorted(
                          self.schreier_edges.items(),
                          key=lambda item: (self._index[item[0][1]], letter_key(item[0][0])))],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CosetSpace":
        try:
            spec = parse_group_spec(data["ambient"])
            family = [SubgroupSpec.from_words(spec, h["label"], h["generators"]) for h in data["family"]]
            depth = int(data["depth"])
            resolver = make_resolver(spec, family, data.get("resolver", "auto"))
            space = cls(spec, family, depth, resolver)
            space._set_vertices(Vertex(int(c), spec.reduce(parse_word(k, spec))) for c, k in data["vertices"])
            for letter_text, source, target in data["edges"]:
                letter = parse_word(letter_text, spec)[0]
                space.schreier_edges[(letter, Vertex.parse(source, spec))] = Vertex.parse(target, spec)
        except KeyError as error:
            raise ValueError(f"Coset space document is missing the field {error}")
        return space

    def save(self, path: Union[str, Path]):
        helpers.save_json(self.to_dict(), path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CosetSpace":
        return cls.from_dict(helpers.load_json(path))


RESOLVERS = {"transversal": TransversalResolver, "folding": FoldingResolver, "lattice": LatticeResolver,
             "membership": MembershipResolver}


def make_resolver(spec: GroupSpec, family: Sequence[SubgroupSpec], kind: str = "auto") -> AbstractCosetResolver:
    if kind != "auto" and kind not in RESOLVERS:
        raise ValueError(f"Unknown resolver {kind!r}. Must be one of: auto, {', '.join(RESOLVERS)}")
    if kind == "auto":
        if TransversalResolver.applies(spec, family):
            kind = "transversal"
        elif spec.kind == "free":
            kind = "folding"
        elif spec.kind == "abelian":
            kind = "lattice"
        else:
            kind = "membership"
    return RESOLVERS[kind](spec, family)


def build_coset_space(spec: GroupSpec, family: Sequence[SubgroupSpec], depth: int,
                      resolver: str = "auto", reach: Optional[int] = None) -> CosetSpace:
    if depth < 1:
        raise ValueError(f"Depth must be >= 1, got {depth}")
    if not family:
        raise ValueError("The subgroup family must be nonempty")

    cap = ConfigurationManager.get_setting("search", "max_cells")
    space = CosetSpace(spec, family, depth, make_resolver(spec, family, resolver), reach)
    letters = spec.letters()

    found = {v: None for v in space.representatives}
    frontier = list(found)
    for _ in range(depth):
        next_frontier = []
        for vertex in frontier:
            for letter in letters:
                target = Vertex(vertex.component, space.resolver.canonical(vertex.component, (letter,) + vertex.key))
                if len(target.key) > depth:
                    continue
                space.schreier_edges[(letter, vertex)] = target
                if target not in found:
                    found[target] = None
                    next_frontier.append(target)
                    if len(found) > cap:
                        raise ResourceLimitError(f"Coset space of depth {depth} exceeds the cell cap {cap}")
        frontier = next_frontier

    # edges leaving the last layer
    for vertex in frontier:
        for letter in letters:
            target = Vertex(vertex.component, space.resolver.canonical(vertex.component, (letter,) + vertex.key))
            if target in found:
                space.schreier_edges[(letter, vertex)] = target

    space._set_vertices(found)
    _logger.info(f"Built coset space of {spec.text} with {len(space)} vertices at depth {depth} "
                 f"({type(space.resolver).__name__})")
    return space


def _check_spec(cs: CosetSpace, g: Element):
    if g.spec != cs.ambient:
        raise SpecMismatchError(f"Element of {g.spec.text} used on a coset space of {cs.ambient.text}")


def transporter(cs: CosetSpace, v: Vertex) -> Element:
    return Element(cs.ambient, v.key)


def act(cs: CosetSpace, g: Element, v: Vertex) -> Vertex:
    _check_spec(cs, g)
    return cs.vertex_of(v.component, g.word + v.key)


def rho(cs: CosetSpace, g: Element, v: Vertex) -> int:
    return len(act(cs, g.inverse(), v).key)


def vertices_within(cs: CosetSpace, g: Element, radius: int) -> List[Vertex]:
    """All k with rho(g, k) <= radius, i.e. k = g·u with len(transporter(u)) <= radius, sorted."""
    if radius > cs.depth:
        raise OutOfWindowError(f"Radius {radius} exceeds the enumerated depth {cs.depth}")
    found = {act(cs, g, u) for u in cs.vertices if len(u.key) <= radius}
    return sorted(found, key=Vertex.sort_key)
