"""
UncertainGraph - Directed uncertain graph model
Parses, validates and normalizes graphs whose edges are present independently
with probability p_e, and aggregates per-vertex reachability into influence spread
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

import networkx as nx

from errors import DiagramInvariantError, GraphFormatError, SeedError

logger = logging.getLogger(__name__)

LABELS_DIRECTIVE = '@labels'


class Edge(NamedTuple):
    tail: int
    head: int
    p: float


@dataclass(frozen=True)
class UncertainDigraph:
    """
    Directed graph with a presence probability on every edge

    Vertex ids are dense in [0, n). Parallel edges are distinct edges, each with
    its own probability. Self-loops never survive construction.
    """

    n: int
    edges: Tuple[Edge, ...]
    labels: Tuple[str, ...] = ()
    dropped_self_loops: int = 0

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, 'labels', tuple(str(v) for v in range(self.n)))
        if len(self.labels) != self.n:
            raise GraphFormatError(f"expected {self.n} labels, got {len(self.labels)}")
        for e in self.edges:
            if not (0 <= e.tail < self.n and 0 <= e.head < self.n):
                raise GraphFormatError(f"edge {e} references a vertex outside [0, {self.n})")
            if e.tail == e.head:
                raise GraphFormatError(f"self-loop on vertex {e.tail} was not removed")
            if not (0.0 <= e.p <= 1.0):
                raise GraphFormatError(f"probability out of range: {e.p}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int, float]],
                   labels: Tuple[str, ...] = ()) -> 'UncertainDigraph':
        """
        Build a graph from (tail, head, p) triples, dropping self-loops

        Args:
            n: Vertex count
            edges: Iterable of (tail, head, p)
            labels: Optional display labels, one per vertex

        Returns:
            UncertainDigraph: Validated graph
        """
        kept = []
        dropped = 0
        for tail, head, p in edges:
            if tail == head:
                dropped += 1
                continue
            kept.append(Edge(int(tail), int(head), float(p)))
        if dropped:
            logger.warning(f"Dropped {dropped} self-loop(s); they never affect reachability")
        return cls(n=n, edges=tuple(kept), labels=tuple(labels), dropped_self_loops=dropped)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def label_index(self) -> Dict[str, int]:
        return {label: v for v, label in enumerate(self.labels)}

    @cached_property
    def degrees(self) -> Tuple[int, ...]:
        """Number of incident edge ends per vertex (parallel edges counted separately)"""
        degree = [0] * self.n
        for e in self.edges:
            degree[e.tail] += 1
            degree[e.head] += 1
        return tuple(degree)

    @cached_property
    def incident_edges(self) -> Tuple[Tuple[int, ...], ...]:
        incident: List[List[int]] = [[] for _ in range(self.n)]
        for index, e in enumerate(self.edges):
            incident[e.tail].append(index)
            incident[e.head].append(index)
        return tuple(tuple(items) for items in incident)

    def vertex_id(self, label: str) -> int:
        """
        Translate an input label to a dense vertex id

        Raises:
            SeedError: If the label is unknown
        """
        label = str(label).strip()
        if label in self.label_index:
            return self.label_index[label]
        raise SeedError(f"unknown vertex label: {label!r}")

    def without_zero_edges(self) -> 'UncertainDigraph':
        """Copy without the edges that are never present (p = 0)"""
        kept = tuple(e for e in self.edges if e.p > 0.0)
        return UncertainDigraph(self.n, kept, self.labels, self.dropped_self_loops)

    def to_networkx(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(range(self.n))
        for index, e in enumerate(self.edges):
            graph.add_edge(e.tail, e.head, key=index, p=e.p)
        return graph


@dataclass(frozen=True)
class SeedSet:
    """Vertices that are initially injected information"""

    members: frozenset

    @classmethod
    def from_labels(cls, graph: UncertainDigraph, labels: Iterable[str]) -> 'SeedSet':
        members = frozenset(graph.vertex_id(label) for label in labels if str(label).strip())
        seeds = cls(members)
        seeds.validate(graph)
        return seeds

    @classmethod
    def parse(cls, graph: UncertainDigraph, text: str) -> 'SeedSet':
        """Parse a comma- or whitespace-separated seed list"""
        return cls.from_labels(graph, text.replace(',', ' ').split())

    def validate(self, graph: UncertainDigraph):
        if not self.members:
            raise SeedError("seed set must not be empty")
        for v in self.members:
            if not (0 <= v < graph.n):
                raise SeedError(f"seed {v} is not a vertex of the graph")

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class SpreadResult:
    """Per-vertex reachability probabilities and the influence spread"""

    probs: Dict[int, float]
    sigma: float
    include_seeds_sigma: float
    seeds: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class Component:
    """
    Weakly connected piece of a graph with locally re-indexed vertices

    vertices[k] is the original id of local vertex k; edges[j] is the original
    index of local edge j.
    """

    graph: UncertainDigraph
    seeds: frozenset
    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]

    @property
    def has_seeds(self) -> bool:
        return bool(self.seeds)


def _strip_comment(line: str) -> str:
    return line.split('#', 1)[0].strip()


def _is_int(token: str) -> bool:
    try:
        int(token)
        return True
    except ValueError:
        return False


def parse_graph(text: str) -> UncertainDigraph:
    """
    Parse the graph file format

    The first non-comment line is the vertex count n. An optional
    "@labels l0 l1 ..." line may follow and fixes the label of every id.
    Every further line is "tail head p". Without a label line, endpoints are
    integer ids when every endpoint in the file is an integer in [0, n);
    otherwise all of them are labels mapped to ids in order of first appearance.

    Args:
        text: Graph file content

    Returns:
        UncertainDigraph: Validated graph with self-loops removed

    Raises:
        GraphFormatError: Naming the offending line
    """
    n: Optional[int] = None
    declared: Optional[Dict[str, int]] = None
    rows = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        tokens = line.split()
        if n is None:
            if len(tokens) != 1 or not _is_int(tokens[0]) or int(tokens[0]) < 0:
                raise GraphFormatError("first line must be the vertex count", line_number)
            n = int(tokens[0])
            continue
        if tokens[0] == LABELS_DIRECTIVE and declared is None and not rows:
            names = tokens[1:]
            if len(names) != n or len(set(names)) != n:
                raise GraphFormatError(f"label line must list {n} distinct labels", line_number)
            declared = {name: v for v, name in enumerate(names)}
            continue
        if len(tokens) != 3:
            raise GraphFormatError(f"malformed edge line {line!r}; expected 'tail head p'", line_number)
        rows.append((line_number, tokens))

    if n is None:
        raise GraphFormatError("empty graph file: missing vertex count")

    numeric = declared is None and all(_is_int(t) and 0 <= int(t) < n
                                       for _, tokens in rows for t in tokens[:2])
    symbols: Dict[str, int] = dict(declared or {})

    def resolve(token: str, line_number: int) -> int:
        if numeric:
            return int(token)
        if token not in symbols:
            if declared is not None:
                raise GraphFormatError(f"label {token!r} missing from the label line", line_number)
            if len(symbols) >= n:
                raise GraphFormatError(f"vertex id overflow: more than {n} distinct labels", line_number)
            symbols[token] = len(symbols)
        return symbols[token]

    triples = []
    for line_number, (tail_token, head_token, p_token) in rows:
        tail = resolve(tail_token, line_number)
        head = resolve(head_token, line_number)
        try:
            p = float(p_token)
        except ValueError:
            raise GraphFormatError(f"probability is not a number: {p_token!r}", line_number)
        if not math.isfinite(p) or not (0.0 <= p <= 1.0):
            raise GraphFormatError(f"probability out of range: {p_token}", line_number)
        triples.append((tail, head, p))

    if numeric:
        labels = tuple(str(v) for v in range(n))
    else:
        names = [None] * n
        for token, v in symbols.items():
            names[v] = token
        labels = tuple(name if name is not None else _placeholder(v, symbols) for v, name in enumerate(names))

    graph = UncertainDigraph.from_edges(n, triples, labels)
    logger.info(f"Parsed graph: n={graph.n}, m={graph.m}, self-loops dropped={graph.dropped_self_loops}")
    return graph


def _placeholder(v: int, taken: Dict[str, int]) -> str:
    name = f"_{v}"
    while name in taken:
        name = '_' + name
    return name


def serialize_graph(graph: UncertainDigraph) -> str:
    """Write a graph back in the file format (probabilities in round-trip form)"""
    lines = [str(graph.n)]
    if graph.labels != tuple(str(v) for v in range(graph.n)):
        lines.append(' '.join((LABELS_DIRECTIVE,) + graph.labels))
    for e in graph.edges:
        lines.append(f"{graph.labels[e.tail]} {graph.labels[e.head]} {e.p!r}")
    return "\n".join(lines) + "\n"


def split_components(graph: UncertainDigraph, seeds: SeedSet) -> List[Component]:
    """
    Partition the graph by weak connectivity

    Components are ordered by their smallest original vertex id. A connected
    graph comes back as a single component sharing the original graph object.

    Args:
        graph: Input graph
        seeds: Seed set over the whole graph

    Returns:
        List of Component, each with local ids and translation tables
    """
    undirected = nx.Graph()
    undirected.add_nodes_from(range(graph.n))
    undirected.add_edges_from((e.tail, e.head) for e in graph.edges)
    parts = sorted((sorted(part) for part in nx.connected_components(undirected)), key=lambda part: part[0])

    if len(parts) == 1:
        return [Component(graph, frozenset(seeds.members), tuple(range(graph.n)), tuple(range(graph.m)))]

    owner = [0] * graph.n
    local = [0] * graph.n
    for index, part in enumerate(parts):
        for k, v in enumerate(part):
            owner[v] = index
            local[v] = k

    edge_lists: List[List[int]] = [[] for _ in parts]
    for index, e in enumerate(graph.edges):
        edge_lists[owner[e.tail]].append(index)

    components = []
    for index, part in enumerate(parts):
        sub_edges = [
            Edge(local[graph.edges[j].tail], local[graph.edges[j].head], graph.edges[j].p)
            for j in edge_lists[index]
        ]
        subgraph = UncertainDigraph(len(part), tuple(sub_edges), tuple(graph.labels[v] for v in part))
        sub_seeds = frozenset(local[v] for v in part if v in seeds.members)
        components.append(Component(subgraph, sub_seeds, tuple(part), tuple(edge_lists[index])))

    logger.debug(f"Split graph into {len(components)} weakly connected components")
    return components


def assemble_spread(per_vertex: Dict[int, float], seeds: SeedSet, n: int) -> SpreadResult:
    """
    Sum reachability probabilities into the influence spread

    Args:
        per_vertex: Map vertex -> P(S ~> v), covering every non-seed vertex
        seeds: Seed set
        n: Vertex count

    Returns:
        SpreadResult: sigma excludes seeds; include_seeds_sigma adds |S|

    Raises:
        DiagramInvariantError: If a non-seed vertex has no entry
    """
    probs = {}
    for v in range(n):
        if v in seeds.members:
            continue
        if v not in per_vertex:
            raise DiagramInvariantError(f"no probability computed for vertex {v}")
        probs[v] = min(1.0, max(0.0, per_vertex[v]))
    sigma = math.fsum(probs.values())
    return SpreadResult(probs, sigma, sigma + len(seeds.members), frozenset(seeds.members))
