"""
EdgeOrdering - Edge orderings and frontier bookkeeping
Builds e_1..e_m from a path decomposition or a BFS heuristic and derives the
frontier sets W_i, the regions A_i / B_i and the last-touch indices i_u, i_S
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from errors import DecompositionError, OrderingError
from uncertain_graph import Component, Edge, UncertainDigraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PathDecomposition:
    """Ordered bags X_1..X_r of vertex ids"""

    bags: Tuple[FrozenSet[int], ...]

    @property
    def width(self) -> int:
        return max((len(bag) for bag in self.bags), default=0) - 1

    def bag_ranges(self, n: int) -> Tuple[List[int], List[int]]:
        """First and last bag index per vertex (-1 when absent)"""
        first = [-1] * n
        last = [-1] * n
        for index, bag in enumerate(self.bags):
            for v in bag:
                if first[v] < 0:
                    first[v] = index
                last[v] = index
        return first, last

    def validate(self, graph: UncertainDigraph):
        """
        Check the three path-decomposition conditions against a graph

        Raises:
            DecompositionError: Naming the first violation found
        """
        for index, bag in enumerate(self.bags):
            for v in bag:
                if not (0 <= v < graph.n):
                    raise DecompositionError(f"bag {index + 1} contains unknown vertex {v}")
        first, last = self.bag_ranges(graph.n)
        counts = [0] * graph.n
        for bag in self.bags:
            for v in bag:
                counts[v] += 1
        for v in range(graph.n):
            if first[v] < 0:
                raise DecompositionError(f"vertex {graph.labels[v]} appears in no bag")
            if counts[v] != last[v] - first[v] + 1:
                raise DecompositionError(
                    f"vertex {graph.labels[v]} occupies a non-contiguous run of bags "
                    f"({first[v] + 1}..{last[v] + 1} with gaps)"
                )
        for e in graph.edges:
            if max(first[e.tail], first[e.head]) > min(last[e.tail], last[e.head]):
                raise DecompositionError(
                    f"endpoints of edge {graph.labels[e.tail]}->{graph.labels[e.head]} never share a bag"
                )

    def restrict(self, component: Component) -> 'PathDecomposition':
        """Bags of a component in its local ids, empty bags dropped"""
        local = {v: k for k, v in enumerate(component.vertices)}
        bags = []
        for bag in self.bags:
            kept = frozenset(local[v] for v in bag if v in local)
            if kept:
                bags.append(kept)
        return PathDecomposition(tuple(bags))


@dataclass(frozen=True)
class EdgeOrdering:
    """
    A permutation e_1..e_m of the edges with its frontier bookkeeping

    Levels are 1-based: frontiers[i - 1] is W_i for i = 1..m+1. first_touch[v]
    and last_touch[v] are the smallest and largest i with e_i incident to v
    (0 for untouched vertices); last_touch[v] is i_v.
    """

    order: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    frontiers: Tuple[Tuple[int, ...], ...]
    first_touch: Tuple[int, ...]
    last_touch: Tuple[int, ...]
    omega: int
    i_s: Optional[int] = None

    @property
    def m(self) -> int:
        return len(self.order)

    def frontier(self, i: int) -> Tuple[int, ...]:
        return self.frontiers[i - 1]

    def edge(self, i: int) -> Edge:
        return self.edges[i - 1]

    @property
    def introduced_at(self) -> Dict[int, int]:
        return {v: f + 1 for v, f in enumerate(self.first_touch)
                if f and self.last_touch[v] > f}

    @property
    def retired_at(self) -> Dict[int, int]:
        return {v: self.last_touch[v] for v, f in enumerate(self.first_touch)
                if f and self.last_touch[v] > f}

    def region(self, v: int, i: int) -> str:
        """'A', 'W' or 'B' for vertex v at level i"""
        first, last = self.first_touch[v], self.last_touch[v]
        if not first:
            return 'A' if i == self.m + 1 else 'B'
        if i <= first:
            return 'B'
        if i <= last:
            return 'W'
        return 'A'

    def seed_horizon(self, seeds: Iterable[int]) -> int:
        """i_S = max over seeds of i_u"""
        return max((self.last_touch[s] for s in seeds), default=0)

    def with_seeds(self, seeds: Iterable[int]) -> 'EdgeOrdering':
        return EdgeOrdering(self.order, self.edges, self.frontiers, self.first_touch,
                            self.last_touch, self.omega, self.seed_horizon(seeds))


def compute_frontiers(graph: UncertainDigraph, order: Sequence[int],
                      seeds: Optional[Iterable[int]] = None) -> EdgeOrdering:
    """
    Derive W_1..W_{m+1}, i_u, i_S and omega for an edge permutation

    Args:
        graph: Graph whose edges are ordered
        order: Permutation of edge indices
        seeds: Optional seeds for i_S

    Returns:
        EdgeOrdering

    Raises:
        OrderingError: If order is not a permutation of the edges
    """
    order = tuple(order)
    if sorted(order) != list(range(graph.m)):
        raise OrderingError(f"edge order must be a permutation of 0..{graph.m - 1}")

    first = [0] * graph.n
    last = [0] * graph.n
    ordered_edges = tuple(graph.edges[j] for j in order)
    for i, e in enumerate(ordered_edges, start=1):
        for v in (e.tail, e.head):
            if not first[v]:
                first[v] = i
            last[v] = i

    frontiers = [()]
    current = set()
    for i, e in enumerate(ordered_edges, start=1):
        for v in (e.tail, e.head):
            if first[v] == i and last[v] > i:
                current.add(v)
            elif last[v] == i:
                current.discard(v)
        frontiers.append(tuple(sorted(current)))

    omega = max(len(w) for w in frontiers)
    ordering = EdgeOrdering(order, ordered_edges, tuple(frontiers), tuple(first), tuple(last), omega)
    if seeds is not None:
        ordering = ordering.with_seeds(seeds)
    return ordering


def ordering_from_decomposition(graph: UncertainDigraph, pd: PathDecomposition,
                                seeds: Optional[Iterable[int]] = None) -> EdgeOrdering:
    """
    Order edges by the first bag containing both endpoints

    Ties inside a bag keep input order; the result satisfies omega <= width + 1.
    """
    pd.validate(graph)
    first, _ = pd.bag_ranges(graph.n)
    keyed = sorted(range(graph.m),
                   key=lambda j: (max(first[graph.edges[j].tail], first[graph.edges[j].head]), j))
    ordering = compute_frontiers(graph, keyed, seeds)
    logger.info(f"Decomposition ordering: width={pd.width}, omega={ordering.omega}")
    return ordering


def heuristic_ordering(graph: UncertainDigraph, seeds: Optional[Iterable[int]] = None) -> EdgeOrdering:
    """
    BFS ordering over the underlying undirected graph

    Starts from a minimum-degree vertex (smallest id on ties) and emits every
    vertex's not-yet-emitted incident edges consecutively. No width guarantee.
    """
    degree = graph.degrees
    incident = graph.incident_edges
    visited = [False] * graph.n
    emitted = [False] * graph.m
    order: List[int] = []

    by_degree = sorted((v for v in range(graph.n) if degree[v] > 0), key=lambda v: (degree[v], v))
    for start in by_degree:
        if visited[start]:
            continue
        visited[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for j in incident[u]:
                if emitted[j]:
                    continue
                emitted[j] = True
                order.append(j)
                e = graph.edges[j]
                other = e.head if e.tail == u else e.tail
                if not visited[other]:
                    visited[other] = True
                    queue.append(other)

    ordering = compute_frontiers(graph, order, seeds)
    logger.info(f"Heuristic BFS ordering: omega={ordering.omega}")
    return ordering


def parse_path_decomposition(text: str, graph: UncertainDigraph) -> PathDecomposition:
    """One bag per line, whitespace-separated vertex labels, '#' comments"""
    bags = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        try:
            bags.append(frozenset(graph.vertex_id(label) for label in line.split()))
        except Exception as e:
            raise DecompositionError(f"line {line_number}: {e}")
    return PathDecomposition(tuple(bags))


def parse_edge_order(text: str, graph: UncertainDigraph) -> List[int]:
    """Whitespace-separated 0-based edge indices in the graph file's edge order"""
    tokens = []
    for raw in text.splitlines():
        tokens.extend(raw.split('#', 1)[0].split())
    try:
        order = [int(token) for token in tokens]
    except ValueError as e:
        raise OrderingError(f"edge order file must contain integers: {e}")
    if sorted(order) != list(range(graph.m)):
        raise OrderingError(f"edge order must list every edge index 0..{graph.m - 1} exactly once")
    return order


def restrict_order(order: Sequence[int], component: Component) -> List[int]:
    """Project a whole-graph edge order onto a component's local edge indices"""
    local = {j: k for k, j in enumerate(component.edges)}
    return [local[j] for j in order if j in local]
