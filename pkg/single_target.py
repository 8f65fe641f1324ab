"""
SingleTarget - Per-target TC diagram and top-down DP
Computes P(S ~> v) for one target by building the pruned TC diagram level by
level and pushing edge probabilities down it; the baseline for all-targets
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, TextIO, Union

from edge_ordering import EdgeOrdering
from errors import DiagramInvariantError, SeedError
from state_engine import (BOTTOM, HI, LO, TC, TOP, LevelStep, Terminal,
                          canonical_encode, initial_tc, link_label, state_bound,
                          tc_transition)
from uncertain_graph import UncertainDigraph

logger = logging.getLogger(__name__)

TcLink = Union[TC, Terminal]


@dataclass
class TcNode:
    """A stored TC with its two successor links"""

    state: TC
    lo: Optional[TcLink] = None
    hi: Optional[TcLink] = None


@dataclass
class TcDiagram:
    """
    Levels 1..m of a single-target TC diagram

    levels[i - 1] maps each TC at level i to its node; the root is the empty level-1 TC.
    """

    target: int
    levels: List[Dict[TC, TcNode]]
    steps: List[LevelStep]
    root: TC

    @property
    def level_sizes(self) -> List[int]:
        return [len(level) for level in self.levels]

    @property
    def peak_states(self) -> int:
        return max(self.level_sizes, default=0)

    @property
    def total_states(self) -> int:
        return sum(self.level_sizes)

    def dump(self, stream: TextIO):
        """Write one line per stored TC: level, encoding, lo and hi links"""
        stream.write(f"# TC diagram for target {self.target}\n")
        for i, level in enumerate(self.levels, start=1):
            for node in level.values():
                stream.write(
                    f"{i} {canonical_encode(node.state).decode('ascii')} "
                    f"lo={link_label(node.lo)} hi={link_label(node.hi)}\n"
                )


@dataclass
class TopDownTable:
    """P per level and the mass absorbed into TOP / BOTTOM"""

    probs: List[Dict[TC, float]] = field(default_factory=list)
    p_top: float = 0.0
    p_bottom: float = 0.0
    max_mass_error: float = 0.0


def check_state_bound(kind: str, level: int, count: int, width: int, factor: int):
    bound = state_bound(width, factor)
    if count > bound:
        logger.warning(f"{kind} level {level}: {count} states exceed the soft bound {bound} for width {width}")


def build_tc_diagram(graph: UncertainDigraph, ordering: EdgeOrdering, seeds: FrozenSet[int],
                     target: int, bound_factor: Optional[int] = 4) -> TcDiagram:
    """
    Build the pruned TC diagram for one target

    Args:
        graph: Graph the ordering was built for
        ordering: Edge ordering with frontiers
        seeds: Seed vertex ids
        target: Target vertex id, not a seed
        bound_factor: Soft state-count factor for warnings, None to skip the check

    Returns:
        TcDiagram
    """
    if target in seeds:
        raise SeedError(f"target {graph.labels[target]} is a seed; its probability is 1 by definition")
    seeds = frozenset(seeds)
    root = initial_tc(target)
    levels: List[Dict[TC, TcNode]] = [{root: TcNode(root)}]
    steps: List[LevelStep] = []

    for i in range(1, ordering.m + 1):
        step = LevelStep.build(ordering, seeds, i)
        steps.append(step)
        nxt: Dict[TC, TcNode] = {}
        for node in levels[i - 1].values():
            for branch in (LO, HI):
                child = tc_transition(node.state, step, branch)
                if isinstance(child, TC):
                    child = nxt.setdefault(child, TcNode(child)).state
                setattr(node, branch, child)
        if i < ordering.m:
            levels.append(nxt)
            if bound_factor is not None:
                check_state_bound('TC', i + 1, len(nxt), len(step.next_frontier), bound_factor)
        elif nxt:
            raise DiagramInvariantError(f"{len(nxt)} TC(s) survive past the last edge")
        logger.debug(f"TC level {i + 1}: {len(nxt)} states")

    return TcDiagram(target, levels, steps, root)


def top_down_dp(diagram: TcDiagram, ordering: EdgeOrdering, tolerance: float = 1e-9) -> TopDownTable:
    """
    Push probability mass from the root to the sentinels

    Returns:
        TopDownTable whose p_top is P(S ~> target)

    Raises:
        DiagramInvariantError: If level mass drifts from 1 by more than tolerance
    """
    table = TopDownTable()
    current: Dict[TC, float] = {diagram.root: 1.0}
    for i in range(1, ordering.m + 1):
        table.probs.append(current)
        p = ordering.edge(i).p
        level = diagram.levels[i - 1]
        nxt: Dict[TC, float] = {}
        for state, mass in current.items():
            node = level[state]
            for child, weight in ((node.lo, 1.0 - p), (node.hi, p)):
                share = weight * mass
                if child is TOP:
                    table.p_top += share
                elif child is BOTTOM:
                    table.p_bottom += share
                elif child is None:
                    raise DiagramInvariantError(f"TC at level {i} has a dangling link")
                else:
                    nxt[child] = nxt.get(child, 0.0) + share
        error = abs(sum(nxt.values()) + table.p_top + table.p_bottom - 1.0)
        table.max_mass_error = max(table.max_mass_error, error)
        if error > tolerance:
            raise DiagramInvariantError(f"probability mass off by {error:.3e} after level {i}")
        current = nxt
    return table


class SingleTargetSolver:
    """
    Baseline solver answering one (S, v) query per diagram
    """

    def __init__(self, config: Dict):
        """
        Initialize solver with engine configuration

        Args:
            config: Engine configuration dictionary
        """
        self.config = config
        self.bound_factor = config.get('state_bound_factor', 4) if config.get('check_state_bound', True) else None
        self.tolerance = config.get('mass_tolerance', 1e-9)
        self.logger = logging.getLogger(__name__)
        self.last_diagram: Optional[TcDiagram] = None

    def probability(self, graph: UncertainDigraph, ordering: EdgeOrdering,
                    seeds: FrozenSet[int], target: int) -> float:
        """
        P(S ~> target) on a graph with a matching ordering

        Returns:
            float: Exact probability up to floating point
        """
        if ordering.m == 0:
            return 0.0
        start = time.perf_counter()
        diagram = build_tc_diagram(graph, ordering, seeds, target, self.bound_factor)
        table = top_down_dp(diagram, ordering, self.tolerance)
        self.last_diagram = diagram
        self.logger.debug(
            f"Target {target}: {diagram.total_states} TCs, peak {diagram.peak_states}, "
            f"{time.perf_counter() - start:.4f}s"
        )
        return min(1.0, max(0.0, table.p_top))

    def all_probabilities(self, graph: UncertainDigraph, ordering: EdgeOrdering,
                          seeds: FrozenSet[int]) -> Dict[int, float]:
        """Run the per-target query for every non-seed vertex"""
        return {v: self.probability(graph, ordering, seeds, v)
                for v in range(graph.n) if v not in seeds}
