"""
Generators - Graph families for benchmarks and randomized verification
Each family returns the graph together with a path decomposition of known width
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from edge_ordering import PathDecomposition
from uncertain_graph import UncertainDigraph

logger = logging.getLogger(__name__)

FAMILIES = ('path', 'cycle', 'ladder', 'random-pw')

Generated = Tuple[UncertainDigraph, PathDecomposition]


def path_graph(m: int, p: float = 0.5) -> Generated:
    """0 -> 1 -> ... -> m with every edge present with probability p"""
    graph = UncertainDigraph.from_edges(m + 1, [(v, v + 1, p) for v in range(m)])
    bags = tuple(frozenset((v, v + 1)) for v in range(max(m, 1)))
    if m == 0:
        bags = (frozenset((0,)),)
    return graph, PathDecomposition(bags)


def cycle_graph(m: int, p: float = 0.5) -> Generated:
    """Directed cycle on m >= 3 vertices; bags all carry vertex 0"""
    if m < 3:
        raise ValueError("a cycle needs at least 3 edges")
    graph = UncertainDigraph.from_edges(m, [(v, (v + 1) % m, p) for v in range(m)])
    bags = tuple(frozenset((0, v, v + 1)) for v in range(1, m - 1))
    return graph, PathDecomposition(bags)


def ladder_graph(length: int, width: int = 2, p: float = 0.5) -> Generated:
    """
    width x length grid with rightward and downward edges

    Vertex (r, c) has id c * width + r; bags are consecutive column pairs, so
    the frontier width grows with `width` while m grows with `length`.
    """
    def vid(r: int, c: int) -> int:
        return c * width + r

    edges = []
    for c in range(length):
        for r in range(width):
            if r + 1 < width:
                edges.append((vid(r, c), vid(r + 1, c), p))
            if c + 1 < length:
                edges.append((vid(r, c), vid(r, c + 1), p))
    graph = UncertainDigraph.from_edges(width * length, edges)
    if length == 1:
        bags = (frozenset(range(width)),)
    else:
        bags = tuple(frozenset(vid(r, cc) for r in range(width) for cc in (c, c + 1)) for c in range(length - 1))
    return graph, PathDecomposition(bags)


def random_pathwidth_graph(n: int, width: int = 2, extra: float = 0.5,
                           rng: Optional[np.random.Generator] = None) -> Generated:
    """
    Connected random digraph of pathwidth at most `width`

    Vertex v links to v - 1 and, with probability `extra`, to further vertices
    inside the window of the previous `width` vertices; directions and
    probabilities are random.
    """
    rng = rng if rng is not None else np.random.default_rng()
    edges = []
    for v in range(1, n):
        lows = [v - 1] + [u for u in range(max(0, v - width), v - 1) if rng.random() < extra]
        for u in lows:
            p = float(rng.random())
            edges.append((u, v, p) if rng.random() < 0.5 else (v, u, p))
    graph = UncertainDigraph.from_edges(n, edges)
    bags = tuple(frozenset(range(max(0, v - width), v + 1)) for v in range(max(n, 1)))
    return graph, PathDecomposition(bags[1:] if n > 1 else bags)


def random_small_graph(rng: np.random.Generator, n_range: Tuple[int, int] = (2, 8),
                       m_range: Tuple[int, int] = (1, 14), pendants: int = 0,
                       prob_choices: Optional[List[float]] = None) -> UncertainDigraph:
    """
    Random digraph for oracle checks, parallel edges allowed, no self-loops

    Args:
        rng: numpy Generator
        n_range: Inclusive vertex-count range
        m_range: Inclusive edge-count range
        pendants: Extra degree-1 vertices hung off random vertices
        prob_choices: Draw probabilities from this list instead of uniform [0, 1]
    """
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = int(rng.integers(m_range[0], m_range[1] + 1))
    edges = []
    for _ in range(m):
        tail, head = (int(x) for x in rng.choice(n, size=2, replace=False))
        p = float(rng.choice(prob_choices)) if prob_choices else float(rng.random())
        edges.append((tail, head, p))
    for k in range(pendants):
        anchor = int(rng.integers(0, n + k))
        pendant = n + k
        p = float(rng.random())
        edges.append((anchor, pendant, p) if rng.random() < 0.7 else (pendant, anchor, p))
    return UncertainDigraph.from_edges(n + pendants, edges)


def random_seeds(graph: UncertainDigraph, rng: np.random.Generator, max_size: int = 2) -> frozenset:
    size = int(rng.integers(1, min(max_size, graph.n) + 1))
    return frozenset(int(v) for v in rng.choice(graph.n, size=size, replace=False))


GENERATORS: Dict[str, Callable[..., Generated]] = {
    'path': lambda m, rng=None, width=2: path_graph(m),
    'cycle': lambda m, rng=None, width=2: cycle_graph(max(m, 3)),
    'ladder': lambda m, rng=None, width=2: ladder_graph(max(1, m // (2 * width - 1)), width),
    'random-pw': lambda m, rng=None, width=2: random_pathwidth_graph(m, width, rng=rng),
}


def generate(family: str, size: int, rng: Optional[np.random.Generator] = None, width: int = 2) -> Generated:
    """
    Build a family member of roughly `size` edges

    Raises:
        ValueError: Unknown family
    """
    if family not in GENERATORS:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    graph, pd = GENERATORS[family](size, rng=rng, width=width)
    logger.debug(f"Generated {family}: n={graph.n}, m={graph.m}, pathwidth<={pd.width}")
    return graph, pd
