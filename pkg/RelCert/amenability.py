"""Amenability of finite pieces of metric spaces: r-boundaries, Følner sets and the
degree-0 uniformly finite homology test.

A FiniteGraph is a window of an infinite graph surrounded by a halo. Subsets live in the
window, while distances and boundaries are measured in the whole graph so that a set
touching the window's edge still sees its outside.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, lcm
from pathlib import Path
from typing import Any, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Set, Tuple, Union
import random

import networkx as nx

from .coset_space import Vertex
from .errors import InvariantBreachError
from .groups import Element, GroupSpec, ball, sphere_letters
from .logging import PipelineLogger
from .services.configuration_manager import ConfigurationManager

Node = Hashable

_logger = PipelineLogger("amenability").get_logger()


def node_key(v: Node):
    if isinstance(v, Element):
        return (0, v.sort_key())
    if isinstance(v, Vertex):
        return (1, v.sort_key())
    return (2, type(v).__name__, v)


@dataclass
class FiniteGraph:
    graph: nx.Graph
    window: FrozenSet[Node] = None
    basepoint: Optional[Node] = None
    name: str = ""

    def __post_init__(self):
        if self.window is None:
            self.window = frozenset(self.graph.nodes)
        self.window = frozenset(self.window)
        missing = [v for v in self.window if v not in self.graph]
        if missing:
            raise ValueError(f"Window vertex {missing[0]} is not in the graph")

    @property
    def vertices(self) -> List[Node]:
        return sorted(self.graph.nodes, key=node_key)

    @property
    def max_degree(self) -> int:
        return max((d for _, d in self.graph.degree), default=0)

    @property
    def components(self) -> int:
        return nx.number_connected_components(self.graph)

    def distance(self, u: Node, v: Node) -> float:
        try:
            return nx.shortest_path_length(self.graph, u, v)
        except nx.NetworkXNoPath:
            return float("inf")

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "vertices": self.graph.number_of_nodes(), "window": len(self.window),
                "edges": self.graph.number_of_edges(), "max_degree": self.max_degree, "components": self.components}


def grid_graph(radius: int, halo: int = 2, king: bool = True) -> FiniteGraph:
    """ℤ² on [-radius, radius]², with the king-move (ℓ∞) adjacency by default."""
    extent = radius + halo
    graph = nx.Graph()
    steps = [(1, 0), (0, 1), (1, 1), (1, -1)] if king else [(1, 0), (0, 1)]
    for i in range(-extent, extent + 1):
        for j in range(-extent, extent + 1):
            graph.add_node((i, j))
            for di, dj in steps:
                if -extent <= i + di <= extent and -extent <= j + dj <= extent:
                    graph.add_edge((i, j), (i + di, j + dj))
    window = {(i, j) for i in range(-radius, radius + 1) for j in range(-radius, radius + 1)}
    return FiniteGraph(graph, frozenset(window), (0, 0), f"grid({radius}, halo {halo}, {'king' if king else 'plain'})")


def path_graph(radius: int, halo: int = 2) -> FiniteGraph:
    """ℤ on [-radius, radius]."""
    extent = radius + halo
    graph = nx.path_graph(range(-extent, extent + 1))
    return FiniteGraph(graph, frozenset(range(-radius, radius + 1)), 0, f"line({radius}, halo {halo})")


def segment_graph(length: int, halo: int = 2) -> FiniteGraph:
    """ℤ on [0, length − 1], for windows of any length."""
    if length < 1:
        raise ValueError(f"A segment needs length >= 1, got {length}")
    graph = nx.path_graph(range(-halo, length + halo))
    return FiniteGraph(graph, frozenset(range(length)), 0, f"segment({length}, halo {halo})")


def cayley_ball_graph(spec: GroupSpec, radius: int, halo: int = 2) -> FiniteGraph:
    """The Cayley graph on ball(radius + halo), with ball(radius) as the window."""
    elements = ball(spec, radius + halo)
    members = set(elements)
    letters = sphere_letters(spec)
    graph = nx.Graph()
    graph.add_nodes_from(elements)
    for g in elements:
        for s in letters:
            h = g * s
            if h in members:
                graph.add_edge(g, h)
    window = frozenset(g for g in elements if g.length <= radius)
    return FiniteGraph(graph, window, elements[0], f"cayley({spec.text}, {radius}, halo {halo})")


def read_edge_list(path: Union[str, Path], window: Optional[Iterable[Node]] = None) -> FiniteGraph:
    """One edge 'u v' per line; a single id declares an isolated vertex; '#' starts a comment."""
    graph = nx.Graph()
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, start=1):
            tokens = line.split("#", 1)[0].split()
            if not tokens:
                continue
            if len(tokens) == 1:
                graph.add_node(tokens[0])
            elif len(tokens) == 2:
                graph.add_edge(tokens[0], tokens[1])
            else:
                raise ValueError(f"Line {line_number} of {path} is not an edge: {line.strip()!r}")
    return FiniteGraph(graph, frozenset(window) if window is not None else None, name=str(path))


def boundary_set(g: FiniteGraph, U: Iterable[Node], r: float) -> Set[Node]:
    """∂_r U = {x : d(x, U) < r and d(x, X∖U) < r}; the distance to an empty set is infinite."""
    U = set(U)
    missing = [v for v in U if v not in g.graph]
    if missing:
        raise ValueError(f"Vertex {missing[0]} is not in the graph")
    if not U or len(U) == g.graph.number_of_nodes() or r <= 0:
        return set()
    cutoff = ceil(r) - 1
    if cutoff == 0:
        return set()

    near_U = nx.multi_source_dijkstra_path_length(g.graph, U, cutoff=cutoff)
    region = nx.multi_source_dijkstra_path_length(g.graph, U, cutoff=2 * cutoff)
    outside = [v for v in region if v not in U]
    if not outside:
        return set()
    near_outside = nx.multi_source_dijkstra_path_length(g.graph.subgraph(region), outside, cutoff=cutoff)
    return {v for v in near_U if v in near_outside}


def boundary_ratio(g: FiniteGraph, U: Iterable[Node], r: float) -> Fraction:
    U = set(U)
    if not U:
        raise ValueError("The ratio |∂U|/|U| needs a nonempty U")
    return Fraction(len(boundary_set(g, U, r)), len(U))


@dataclass
class FolnerResult:
    subset: FrozenSet[Node]
    r: float
    ratio: Optional[Fraction]
    status: str
    seed: Optional[Node] = None
    evaluations: int = 0
    history: List[Tuple[int, Fraction]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.status == "found"

    @property
    def size(self) -> int:
        return len(self.subset)

    def recount(self, g: FiniteGraph) -> Fraction:
        ratio = boundary_ratio(g, self.subset, self.r)
        if ratio != self.ratio:
            raise InvariantBreachError(f"Stored Følner ratio {self.ratio} differs from the recount {ratio}")
        return ratio


def double_sweep_center(g: FiniteGraph) -> Node:
    """Midpoint of a long path found by two breadth-first sweeps of the window."""
    window_graph = g.graph.subgraph(g.window)
    start = min(g.window, key=node_key)
    a = _farthest(window_graph, start)
    b = _farthest(window_graph, a)
    path = nx.shortest_path(window_graph, a, b)
    return path[len(path) // 2]


def _farthest(graph: nx.Graph, source: Node) -> Node:
    lengths = nx.single_source_shortest_path_length(graph, source)
    best = max(lengths.values())
    return min((v for v, d in lengths.items() if d == best), key=node_key)


def _is_connected(g: FiniteGraph, U: Set[Node]) -> bool:
    return bool(U) and nx.is_connected(g.graph.subgraph(U))


def _ball_growth(g: FiniteGraph, seed: Node, r: float, delta: Fraction, cap: int, result: FolnerResult) -> Set[Node]:
    lengths = nx.single_source_shortest_path_length(g.graph.subgraph(g.window), seed)
    best_U = {seed}
    for m in range(0, max(lengths.values()) + 1):
        U = {v for v, d in lengths.items() if d <= m}
        if len(U) > cap:
            break
        ratio = boundary_ratio(g, U, r)
        result.evaluations += 1
        result.history.append((len(U), ratio))
        _logger.debug(f"Følner growth m={m}: |U|={len(U)}, ratio {ratio}")
        if result.ratio is None or ratio < result.ratio:
            result.ratio, best_U = ratio, U
        if ratio < delta:
            break
    return best_U


def _local_swaps(g: FiniteGraph, U: Set[Node], r: float, cap: int, budget: int, rng: random.Random,
                 result: FolnerResult) -> Set[Node]:
    current, current_ratio = set(U), result.ratio
    improved = True
    while improved and result.evaluations < budget:
        improved = False
        candidates = sorted((v for v in boundary_set(g, current, r) if v in g.window), key=node_key)
        rng.shuffle(candidates)
        for v in candidates:
            if result.evaluations >= budget:
                break
            trial = current - {v} if v in current else current | {v}
            if len(trial) > cap or not _is_connected(g, trial):
                continue
            ratio = boundary_ratio(g, trial, r)
            result.evaluations += 1
            if ratio < current_ratio:
                current, current_ratio, improved = trial, ratio, True
                result.history.append((len(current), ratio))
                break
    result.ratio = current_ratio
    return current


def connected_subsets(g: FiniteGraph, seed: Node, limit: int) -> Iterator[FrozenSet[Node]]:
    """Every connected subset of the window that contains seed and has at most limit vertices, once each."""
    window_graph = g.graph.subgraph(g.window)

    def extend(current: FrozenSet[Node], candidates: List[Node], excluded: FrozenSet[Node]):
        yield current
        if len(current) == limit:
            return
        for i, v in enumerate(candidates):
            grown = current | {v}
            blocked = excluded | frozenset(candidates[:i])
            fresh = [w for w in window_graph.neighbors(v) if w not in grown and w not in blocked and w not in candidates]
            next_candidates = candidates[i + 1:] + sorted(fresh, key=node_key)
            yield from extend(grown, next_candidates, blocked)

    start = frozenset({seed})
    neighbours = sorted((w for w in window_graph.neighbors(seed) if w != seed), key=node_key)
    yield from extend(start, neighbours, start)


def folner_search(g: FiniteGraph, r: float, delta: Union[Fraction, str, int], cap: int, seed: Optional[Node] = None,
                  swap_budget: Optional[int] = None, exhaustive: bool = False, exhaustive_limit: Optional[int] = None,
                  rng_seed: int = 0) -> FolnerResult:
    """Greedy ball growth from a seed, then boundary-reducing swaps; optionally an exhaustive
    scan of small connected sets. Running out of cap is reported in the status."""
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if swap_budget is None:
        swap_budget = ConfigurationManager.get_setting("amenability", "swap_budget")
    if seed is None:
        seed = g.basepoint if g.basepoint is not None and g.basepoint in g.window else double_sweep_center(g)

    result = FolnerResult(frozenset(), r, None, "not-found-within-cap", seed)
    if exhaustive:
        max_limit = ConfigurationManager.get_setting("amenability", "exhaustive_limit")
        limit = min(cap, exhaustive_limit or max_limit)
        if limit > max_limit:
            raise ValueError(f"Exhaustive search is limited to |U| <= {max_limit}, got {limit}")
        best = None
        for U in connected_subsets(g, seed, limit):
            ratio = boundary_ratio(g, U, r)
            result.evaluations += 1
            candidate = (ratio, len(U), sorted(map(node_key, U)))
            if best is None or candidate < best[0]:
                best = (candidate, U)
        result.ratio, U = best[0][0], best[1]
    else:
        U = _ball_growth(g, seed, r, delta, cap, result)
        if result.ratio >= delta:
            U = _local_swaps(g, U, r, cap, result.evaluations + swap_budget, random.Random(rng_seed), result)

    result.subset = frozenset(U)
    result.status = "found" if result.ratio < delta else "not-found-within-cap"
    _logger.info(f"Følner search on {g.name}: {result.status}, |U|={result.size}, ratio {result.ratio} "
                 f"after {result.evaluations} evaluations")
    return result


@dataclass
class UFChain:
    degree: int
    coefficients: Dict[Any, Fraction]
    R: int = 1
    K: Fraction = Fraction(1)

    def __post_init__(self):
        if self.degree not in (0, 1):
            raise ValueError(f"Only degrees 0 and 1 are supported, got {self.degree}")
        self.coefficients = {cell: Fraction(value) for cell, value in self.coefficients.items() if value}
        self.K = Fraction(self.K)

    def boundary(self) -> Dict[Node, Fraction]:
        """∂[u, v] = [v] − [u]."""
        if self.degree != 1:
            raise ValueError("Only 1-chains have a boundary here")
        result: Dict[Node, Fraction] = {}
        for (u, v), a in self.coefficients.items():
            result[v] = result.get(v, 0) + a
            result[u] = result.get(u, 0) - a
        return {x: value for x, value in result.items() if value}


def fundamental_class(g: FiniteGraph, K: Union[int, Fraction] = 1) -> UFChain:
    return UFChain(0, {x: 1 for x in g.window}, 1, K)


def uf_interior(g: FiniteGraph, R: int) -> Set[Node]:
    """Window vertices whose closed (R − 1)-neighbourhood stays inside the window."""
    interior = set()
    for x in g.window:
        reach = nx.single_source_shortest_path_length(g.graph, x, cutoff=R - 1)
        if all(v in g.window for v in reach):
            interior.add(x)
    return interior


def uf_cells(g: FiniteGraph, R: int, policy: str) -> List[Tuple[Node, Node]]:
    """Unordered pairs (u, v) with 1 <= d(u, v) < R, oriented by vertex order, allowed by the policy."""
    if policy not in ("open", "closed"):
        raise ValueError(f"Invalid boundary policy {policy!r}. Must be one of: open, closed")
    cells = set()
    for u in g.graph.nodes:
        for v, d in nx.single_source_shortest_path_length(g.graph, u, cutoff=R - 1).items():
            if d < 1 or node_key(u) >= node_key(v):
                continue
            inside = (u in g.window) + (v in g.window)
            if inside == 2 or (policy == "open" and inside == 1):
                cells.add((u, v))
    return sorted(cells, key=lambda cell: (node_key(cell[0]), node_key(cell[1])))


@dataclass
class UFResult:
    feasible: bool
    witness: Optional[UFChain]
    interior: FrozenSet[Node]
    policy: str
    R: int
    K: Fraction
    level: str = "evidence"


def uf_boundary_solve(g: FiniteGraph, phi: UFChain, R: int, K: Union[int, Fraction], boundary_policy: str) -> UFResult:
    """Is there a 1-chain ψ with |coefficients| <= K and propagation < R whose boundary equals phi on
    the interior? Solved as a max-flow problem: every vertex outside the interior is merged into a
    hub that may absorb or emit any amount."""
    if phi.degree != 0:
        raise ValueError("phi must be a 0-chain")
    K = Fraction(K)
    cells = uf_cells(g, R, boundary_policy)
    interior = uf_interior(g, R)
    scale = lcm(K.denominator, *(value.denominator for value in phi.coefficients.values()))

    network = nx.DiGraph()
    source, sink, hub = ("source",), ("sink",), ("hub",)
    network.add_nodes_from([source, sink, hub])
    positive = negative = 0
    for x in g.graph.nodes:
        network.add_node(x)
        if x in interior:
            value = int(phi.coefficients.get(x, 0) * scale)
            if value > 0:
                network.add_edge(x, sink, capacity=value)
                positive += value
            elif value < 0:
                network.add_edge(source, x, capacity=-value)
                negative += -value
        else:
            network.add_edge(hub, x)
            network.add_edge(x, hub)
    if positive:
        network.add_edge(source, hub, capacity=positive)
    if negative:
        network.add_edge(hub, sink, capacity=negative)
    capacity = int(K * scale)
    for u, v in cells:
        network.add_edge(u, v, capacity=capacity)
        network.add_edge(v, u, capacity=capacity)

    flow_value, flow = nx.maximum_flow(network, source, sink)
    feasible = flow_value == positive + negative
    witness = None
    if feasible:
        coefficients = {(u, v): Fraction(flow[u][v] - flow[v][u], scale) for u, v in cells}
        witness = UFChain(1, coefficients, R, K)
        check = check_uf_witness(g, phi, witness, boundary_policy, interior)
        if not check["ok"]:
            raise InvariantBreachError(f"uf witness failed its own check: {check}")
    _logger.info(f"uf test on {g.name} ({boundary_policy}, R={R}, K={K}): feasible={feasible}, "
                 f"{len(cells)} cells, {len(interior)} interior vertices")
    return UFResult(feasible, witness, frozenset(interior), boundary_policy, R, K)


def check_uf_witness(g: FiniteGraph, phi: UFChain, psi: UFChain, boundary_policy: str,
                     interior: Optional[Set[Node]] = None) -> Dict[str, bool]:
    """Independent recheck of a witness: bounds, allowed cells, ∂ψ = phi on the interior and
    vanishing augmentation of ∂ψ."""
    if interior is None:
        interior = uf_interior(g, psi.R)
    allowed = set(uf_cells(g, psi.R, boundary_policy))
    boundary = psi.boundary()
    checks = {
        "coefficient_bound": all(abs(a) <= psi.K for a in psi.coefficients.values()),
        "propagation": all(cell in allowed for cell in psi.coefficients),
        "interior_equation": all(boundary.get(x, 0) == phi.coefficients.get(x, 0) for x in interior),
        "telescoping": sum(boundary.values(), Fraction(0)) == 0,
    }
    checks["ok"] = all(checks.values())
    return checks
