"""The Bass–Serre tree of a two-factor free product, read off a coset space.

For G = A * B with A = ⟨a⟩ and B = ⟨b⟩ the tree has the cosets gA and gB as vertices and
an edge between gA and gB for every g. Those cosets are exactly the vertices of the coset space of G
relative to the family {A, B}, so the tree reuses its canonical keys: a key is reduced, and
it does not end in a letter of its own component's factor.
"""
from typing import Callable, List, Optional, Sequence, Tuple

import networkx as nx

from .amenability import FiniteGraph
from .coset_space import CosetSpace, Vertex, act
from .errors import RankingError, SpecMismatchError
from .groups import Element, Word, parse_word
from .logging import PipelineLogger

_logger = PipelineLogger("bass_serre").get_logger()


def syllables(word: Word) -> List[Tuple[int, Word]]:
    """Maximal runs of letters over a single generator."""
    runs: List[Tuple[int, Word]] = []
    for letter in word:
        if runs and runs[-1][0] == letter[0]:
            runs[-1] = (letter[0], runs[-1][1] + (letter,))
        else:
            runs.append((letter[0], (letter,)))
    return runs


class BassSerreTree:
    """
    The tree of cs.ambient relative to cs.family, with a fixed end given by a periodic ray.

    The ray starts at the representative whose factor contains the first period letter and
    walks x₀, p₁·H, p₂·H, ... where p_i is the length-i prefix of period^∞. Every vertex has
    a parent one step closer to that end.
    """

    def __init__(self, cs: CosetSpace, period: Sequence[str] = ("a", "b")):
        spec = cs.ambient
        if spec.kind not in ("free", "cyclic-product") or spec.rank != 2:
            raise SpecMismatchError(f"Bass–Serre trees are built for rank-2 free products, got {spec.text}")
        if len(cs.family) != 2 or any(len(h.generators) != 1 or len(h.generators[0]) != 1 for h in cs.family):
            raise SpecMismatchError("The family must be the two factors, each generated by one generator")
        self.factor_of = [h.generators[0][0][0] for h in cs.family]
        if sorted(self.factor_of) != [0, 1]:
            raise SpecMismatchError("The two subgroups must be generated by distinct generators")

        self.cs = cs
        self.period: Word = tuple(letter for symbol in period for letter in parse_word(symbol, spec))
        if len(self.period) < 2 or len(set(letter[0] for letter in self.period)) != 2:
            raise RankingError(f"The ray period {' '.join(period)} must involve both generators")
        self.start = self.factor_of.index(self.period[0][0])
        ray = self.ray_word(2 * len(self.period))
        if spec.reduce(ray) != ray or any(x[0] == y[0] for x, y in zip(ray, ray[1:])):
            raise RankingError(f"The ray period {' '.join(period)} does not give a reduced alternating ray")

    @property
    def basepoint(self) -> Vertex:
        return Vertex(self.start, ())

    def ray_word(self, length: int) -> Word:
        return tuple(self.period[i % len(self.period)] for i in range(length))

    def ray(self, i: int) -> Vertex:
        return Vertex(self.start if i % 2 == 0 else 1 - self.start, self.ray_word(i))

    def on_ray(self, v: Vertex) -> bool:
        return v == self.ray(len(v.key))

    def parent(self, v: Vertex) -> Vertex:
        """The neighbour of v one step closer to the end of the ray."""
        if self.on_ray(v):
            return self.ray(len(v.key) + 1)
        if not v.key:
            return Vertex(1 - v.component, ())
        runs = syllables(v.key)
        return Vertex(1 - v.component, v.key[:len(v.key) - len(runs[-1][1])])

    def distance_from_representative(self, component: int, v: Vertex) -> int:
        runs = syllables(v.key)
        first_in_factor = bool(runs) and runs[0][0] == self.factor_of[component]
        if v.component == component:
            return len(runs) + (1 if runs and not first_in_factor else 0)
        return len(runs) + (0 if first_in_factor else 1)

    def distance(self, u: Vertex, v: Vertex) -> int:
        moved = act(self.cs, Element(self.cs.ambient, u.key).inverse(), v)
        return self.distance_from_representative(u.component, moved)

    def fragment(self, radius: Optional[int] = None) -> FiniteGraph:
        """The enumerated vertices of cs joined to their parents, as a finite forest of the tree."""
        graph = nx.Graph()
        window = set()
        for v in self.cs.vertices:
            graph.add_node(v)
            if radius is None or self.distance(self.basepoint, v) <= radius:
                window.add(v)
        for v in self.cs.vertices:
            p = self.parent(v)
            if p in graph:
                graph.add_edge(v, p)
        _logger.info(f"Bass–Serre fragment with {graph.number_of_nodes()} vertices and {graph.number_of_edges()} edges")
        return FiniteGraph(graph, frozenset(window), self.basepoint, f"bass-serre({self.cs.ambient.text})")

    def parent_function(self) -> Callable[[Vertex], Vertex]:
        return self.parent
