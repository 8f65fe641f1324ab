"""
Oracle - Ground-truth reachability probabilities
Exhaustive subset enumeration, enumeration conditioned on a processed prefix,
Monte-Carlo estimation, and definition-level TC / STC construction used to
check the diagram engine
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Union

import networkx as nx
import numpy as np

from edge_ordering import EdgeOrdering
from errors import OracleGuardError
from state_engine import BOTTOM, IMAGINARY_TARGET, STC, TC, TOP, Terminal, initial_stc, initial_tc
from uncertain_graph import UncertainDigraph

logger = logging.getLogger(__name__)

RNG_ALGORITHM = 'PCG64'


@dataclass
class OracleResult:
    """Exact probabilities from exhaustive enumeration"""

    probs: Dict[int, float]
    sigma: float
    subsets_evaluated: int
    contributing: Dict[int, int] = field(default_factory=dict)
    total_probability: float = 1.0


@dataclass
class MonteCarloResult:
    """Sample means with standard errors"""

    estimates: Dict[int, float]
    stderr: Dict[int, float]
    sigma: float
    sigma_stderr: float
    samples: int
    rng_seed: Optional[int]
    rng_algorithm: str = RNG_ALGORITHM


def _propagate(present: np.ndarray, reach: np.ndarray, tails: np.ndarray, heads: np.ndarray) -> np.ndarray:
    """
    Close boolean reach rows (samples x n) over the present edges (samples x m)

    Sweeps the edges until a sweep changes nothing; at most n sweeps.
    """
    m = len(tails)
    while True:
        before = int(reach.sum())
        for j in range(m):
            reach[:, heads[j]] |= reach[:, tails[j]] & present[:, j]
        if int(reach.sum()) == before:
            return reach


def _enumerate(graph: UncertainDigraph, seeds: Iterable[int], free: Sequence[int],
               fixed: Sequence[int], block_bits: int):
    """
    Sum over every subset of the free edges, with `fixed` edges always present

    Returns:
        (per-vertex probability array, per-vertex contributing counts, total probability)
    """
    n = graph.n
    free = list(free)
    fixed = list(fixed)
    used = fixed + free
    tails = np.array([graph.edges[j].tail for j in used], dtype=np.int64)
    heads = np.array([graph.edges[j].head for j in used], dtype=np.int64)
    probs = np.array([graph.edges[j].p for j in free], dtype=np.float64)
    seed_list = np.array(sorted(seeds), dtype=np.int64)

    k = len(free)
    total = 1 << k
    block = 1 << block_bits
    shifts = np.arange(k, dtype=np.int64)

    sums = np.zeros(n, dtype=np.float64)
    counts = np.zeros(n, dtype=np.int64)
    mass = 0.0
    for start in range(0, total, block):
        masks = np.arange(start, min(start + block, total), dtype=np.int64)
        free_present = ((masks[:, None] >> shifts) & 1).astype(bool)
        present = np.concatenate([np.ones((len(masks), len(fixed)), dtype=bool), free_present], axis=1)
        weight = np.prod(np.where(free_present, probs, 1.0 - probs), axis=1)
        reach = np.zeros((len(masks), n), dtype=bool)
        reach[:, seed_list] = True
        _propagate(present, reach, tails, heads)
        sums += weight @ reach
        counts += reach.sum(axis=0)
        mass += float(weight.sum())
    return sums, counts, mass


def brute_force(graph: UncertainDigraph, seeds: FrozenSet[int], max_edges: int = 24,
                block_bits: int = 16) -> OracleResult:
    """
    Exact P(S ~> v) by summing P(E') over all 2^m edge subsets

    Args:
        graph: Input graph
        seeds: Seed ids
        max_edges: Refuse above this many edges
        block_bits: log2 of the number of subsets evaluated per numpy block

    Returns:
        OracleResult; probs and contributing counts cover every non-seed vertex

    Raises:
        OracleGuardError: If m > max_edges
    """
    if graph.m > max_edges:
        raise OracleGuardError(graph.m, max_edges)
    sums, counts, mass = _enumerate(graph, seeds, range(graph.m), (), block_bits)
    if abs(mass - 1.0) > 1e-12:
        logger.warning(f"Subset probabilities sum to {mass!r}, not 1")
    probs = {v: float(sums[v]) for v in range(graph.n) if v not in seeds}
    contributing = {v: int(counts[v]) for v in range(graph.n) if v not in seeds}
    logger.info(f"Brute force: evaluated {1 << graph.m} subsets")
    return OracleResult(probs, math.fsum(probs.values()), 1 << graph.m, contributing, mass)


def edges_before(ordering: EdgeOrdering, level: int) -> tuple:
    """Original indices of E_{<level}"""
    return tuple(ordering.order[:level - 1])


def conditional_brute_force(graph: UncertainDigraph, ordering: EdgeOrdering, level: int,
                            present: Iterable[int], seeds: FrozenSet[int], max_edges: int = 24,
                            block_bits: int = 16) -> Dict[int, float]:
    """
    P(S ~> v | E' present, E_{<level} minus E' absent) for every vertex

    Args:
        graph: Input graph
        ordering: Edge ordering defining E_{<level}
        level: 1..m+1
        present: Original edge indices of E', a subset of E_{<level}
        seeds: Seed ids

    Returns:
        Map vertex -> conditional probability (seeds map to 1)
    """
    before = set(edges_before(ordering, level))
    present = sorted(set(present))
    stray = [j for j in present if j not in before]
    if stray:
        raise ValueError(f"edges {stray} are not among the first {level - 1} ordered edges")
    free = list(ordering.order[level - 1:])
    if len(free) > max_edges:
        raise OracleGuardError(len(free), max_edges)
    sums, _, _ = _enumerate(graph, seeds, free, present, block_bits)
    return {v: float(sums[v]) for v in range(graph.n)}


def monte_carlo(graph: UncertainDigraph, seeds: FrozenSet[int], samples: int,
                rng_seed: Optional[int] = None, batch: int = 10000) -> MonteCarloResult:
    """
    Estimate P(S ~> v) by sampling edge subsets with independent coin flips

    Deterministic for a given rng_seed (numpy PCG64 via default_rng).
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if samples < 100:
        logger.warning(f"Monte Carlo with only {samples} samples; expect large standard errors")
    rng = np.random.default_rng(rng_seed)
    n = graph.n
    tails = np.array([e.tail for e in graph.edges], dtype=np.int64)
    heads = np.array([e.head for e in graph.edges], dtype=np.int64)
    probs = np.array([e.p for e in graph.edges], dtype=np.float64)
    seed_list = np.array(sorted(seeds), dtype=np.int64)
    non_seed = np.ones(n, dtype=bool)
    non_seed[seed_list] = False

    hits = np.zeros(n, dtype=np.int64)
    spread_sum = 0.0
    spread_sq = 0.0
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        present = rng.random((size, graph.m)) < probs
        reach = np.zeros((size, n), dtype=bool)
        reach[:, seed_list] = True
        _propagate(present, reach, tails, heads)
        hits += reach.sum(axis=0)
        spread = reach[:, non_seed].sum(axis=1).astype(np.float64)
        spread_sum += float(spread.sum())
        spread_sq += float((spread * spread).sum())
        done += size

    estimates = {}
    stderr = {}
    for v in range(n):
        if v in seeds:
            continue
        mean = hits[v] / samples
        estimates[v] = float(mean)
        stderr[v] = math.sqrt(mean * (1.0 - mean) / samples)
    sigma = spread_sum / samples
    variance = max(0.0, spread_sq / samples - sigma * sigma)
    logger.info(f"Monte Carlo: {samples} samples, rng={RNG_ALGORITHM} seed={rng_seed}")
    return MonteCarloResult(estimates, stderr, sigma, math.sqrt(variance / samples), samples, rng_seed)


def _reachability(graph: UncertainDigraph, present: Iterable[int], seeds: FrozenSet[int]):
    sub = nx.DiGraph()
    sub.add_nodes_from(range(graph.n))
    sub.add_edges_from((graph.edges[j].tail, graph.edges[j].head) for j in present)
    reached = set(seeds)
    for s in seeds:
        reached |= nx.descendants(sub, s)
    return sub, reached


def stc_by_definition(graph: UncertainDigraph, ordering: EdgeOrdering, level: int,
                      present: Iterable[int], seeds: FrozenSet[int]) -> Union[STC, Terminal]:
    """
    STC at `level` read directly off the subgraph of present edges, in stored normal form

    BOTTOM when the previous level is at or past i_S and S reaches no frontier vertex.
    """
    if level == 1:
        return initial_stc()
    frontier = ordering.frontier(level)
    sub, reached = _reachability(graph, present, seeds)
    reached_mask = 0
    for k, v in enumerate(frontier):
        if v in reached:
            reached_mask |= 1 << k
    if level - 1 >= ordering.seed_horizon(seeds) and not reached_mask:
        return BOTTOM
    rows = []
    for k, v in enumerate(frontier):
        if (reached_mask >> k) & 1:
            rows.append(0)
            continue
        below = nx.descendants(sub, v) | {v}
        rows.append(sum(1 << j for j, w in enumerate(frontier)
                        if w in below and not (reached_mask >> j) & 1))
    return STC(reached_mask, tuple(rows))


def tc_by_definition(graph: UncertainDigraph, ordering: EdgeOrdering, level: int,
                     present: Iterable[int], seeds: FrozenSet[int], target: int) -> Union[TC, Terminal]:
    """TC for `target` at `level` read directly off the present edges, pruned like the diagram"""
    if level == 1:
        return initial_tc(target)
    frontier = ordering.frontier(level)
    sub, reached = _reachability(graph, present, seeds)
    if target in reached:
        return TOP
    reached_mask = 0
    reaching_mask = 0
    for k, v in enumerate(frontier):
        if v in reached:
            reached_mask |= 1 << k
        elif v == target or target in nx.descendants(sub, v):
            reaching_mask |= 1 << k
    if level - 1 >= ordering.seed_horizon(seeds) and not reached_mask:
        return BOTTOM
    retired = target == IMAGINARY_TARGET or ordering.last_touch[target] <= level - 1
    if retired and not reaching_mask:
        return BOTTOM
    skip = reached_mask | reaching_mask
    rows = []
    for k, v in enumerate(frontier):
        if (skip >> k) & 1:
            rows.append(0)
            continue
        below = nx.descendants(sub, v) | {v}
        rows.append(sum(1 << j for j, w in enumerate(frontier) if w in below and not (skip >> j) & 1))
    return TC(reached_mask, reaching_mask, tuple(rows), target)
