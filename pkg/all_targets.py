"""
AllTargets - Shared STC diagram with P, Q and R dynamic programs
Computes P(S ~> v) for every vertex at once: one STC diagram shared by all
targets, one change_t-standardized TC diagram, a top-down P pass, bottom-up
Q and R passes, assembly at each vertex's first frontier level, and the
degree-1 post-processing
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, TextIO, Union

from edge_ordering import EdgeOrdering
from errors import DiagramInvariantError
from single_target import check_state_bound
from state_engine import (BOTTOM, BRANCHES, HI, LO, STC, TC, TOP, LevelStep,
                          SccLink, SccRef, TcRef, Terminal, canonical_encode,
                          change_t, initial_stc, link_label, recover_tc,
                          stc_transition, successive_scc, tc_transition)
from uncertain_graph import UncertainDigraph

logger = logging.getLogger(__name__)


@dataclass
class StcNode:
    """
    A stored STC, its lo/hi successors and per-SCC successor links

    scc_links[c] is the (lo, hi) pair of links for SCC c of the state.
    """

    state: STC
    lo: Union[STC, Terminal, None] = None
    hi: Union[STC, Terminal, None] = None
    scc_links: List[List[SccLink]] = field(default_factory=list)


@dataclass
class TcNode:
    state: TC
    lo: Union[TC, Terminal, None] = None
    hi: Union[TC, Terminal, None] = None


@dataclass
class SharedDiagrams:
    """
    Stored STC levels 1..m and standardized TC levels (target t)

    stc_levels[i - 1] and tc_levels[i - 1] hold level i.
    """

    steps: List[LevelStep]
    stc_levels: List[Dict[STC, StcNode]]
    tc_levels: List[Dict[TC, TcNode]]

    @property
    def m(self) -> int:
        return len(self.steps)

    @property
    def stc_sizes(self) -> List[int]:
        return [len(level) for level in self.stc_levels]

    @property
    def tc_sizes(self) -> List[int]:
        return [len(level) for level in self.tc_levels]

    def dump(self, stream: TextIO):
        """Write every stored state with its links, STCs first then TCs"""
        stream.write("# STC diagram: level encoding lo hi [scc: lo hi]\n")
        for i, level in enumerate(self.stc_levels, start=1):
            for node in level.values():
                links = ' '.join(
                    f"[{c}:{link_label(lo)} {link_label(hi)}]" for c, (lo, hi) in enumerate(node.scc_links)
                )
                stream.write(
                    f"{i} {canonical_encode(node.state).decode('ascii')} "
                    f"lo={link_label(node.lo)} hi={link_label(node.hi)} {links}\n".rstrip() + "\n"
                )
        stream.write("# TC diagram (target t): level encoding lo hi\n")
        for i, level in enumerate(self.tc_levels, start=1):
            for node in level.values():
                stream.write(
                    f"{i} {canonical_encode(node.state).decode('ascii')} "
                    f"lo={link_label(node.lo)} hi={link_label(node.hi)}\n"
                )


@dataclass
class DpTables:
    """P, Q, R per level (index i - 1 for level i) and the final answers"""

    p: List[Dict[STC, float]] = field(default_factory=list)
    q: List[Dict[TC, float]] = field(default_factory=list)
    r: List[Dict[STC, List[float]]] = field(default_factory=list)
    res: Dict[int, float] = field(default_factory=dict)
    absorbed: float = 0.0
    max_mass_error: float = 0.0


def _intern(level: dict, state, factory):
    node = level.get(state)
    if node is None:
        node = factory(state)
        level[state] = node
    return node.state


def build_shared_diagrams(graph: UncertainDigraph, ordering: EdgeOrdering, seeds: FrozenSet[int],
                          bound_factor: Optional[int] = 4) -> SharedDiagrams:
    """
    Build M' and N' level by level

    For every STC and branch the successor STC is stored, then every SCC gets
    its successor link. An SCC that leaves the frontier entirely has its TC
    materialized from its smallest member, transitioned, pruned and, unless it
    hits a sentinel, stored change_t-standardized one level below. The TCs of
    each level are then advanced with target t.

    Args:
        graph: Component graph
        ordering: Edge ordering of that graph
        seeds: Seed ids of the component
        bound_factor: Soft state-count factor, None to skip the check

    Returns:
        SharedDiagrams
    """
    seeds = frozenset(seeds)
    m = ordering.m
    if m == 0:
        return SharedDiagrams([], [], [])
    root = initial_stc()
    stc_levels: List[Dict[STC, StcNode]] = [{root: StcNode(root)}] + [{} for _ in range(m)]
    tc_levels: List[Dict[TC, TcNode]] = [{} for _ in range(m + 1)]
    steps: List[LevelStep] = []

    for i in range(1, m + 1):
        step = LevelStep.build(ordering, seeds, i)
        steps.append(step)
        stc_next = stc_levels[i]
        tc_next = tc_levels[i]

        for node in stc_levels[i - 1].values():
            psi = node.state
            children = {}
            for branch in BRANCHES:
                child = stc_transition(psi, step, branch)
                if isinstance(child, STC):
                    child = _intern(stc_next, child, StcNode)
                children[branch] = child
            node.lo, node.hi = children[LO], children[HI]

            links = []
            for index, members in enumerate(psi.sccs):
                pair = []
                for branch in BRANCHES:
                    link = successive_scc(psi, index, step, branch, children[branch])
                    if link is None:
                        rank = (members & -members).bit_length() - 1
                        phi = tc_transition(recover_tc(psi, rank, step.frontier[rank]), step, branch)
                        if isinstance(phi, Terminal):
                            link = phi
                        else:
                            link = TcRef(_intern(tc_next, change_t(phi), TcNode))
                    pair.append(link)
                links.append(pair)
            node.scc_links = links

        for node in tc_levels[i - 1].values():
            for branch in BRANCHES:
                child = tc_transition(node.state, step, branch)
                if isinstance(child, TC):
                    child = _intern(tc_next, child, TcNode)
                setattr(node, branch, child)

        if bound_factor is not None:
            width = len(step.next_frontier)
            check_state_bound('STC', i + 1, len(stc_next), width, bound_factor)
            check_state_bound('TC', i + 1, len(tc_next), width, bound_factor)
        logger.debug(f"Level {i + 1}: {len(stc_next)} STCs, {len(tc_next)} TCs")

    if stc_levels[m] or tc_levels[m]:
        raise DiagramInvariantError("states survive past the last edge")
    return SharedDiagrams(steps, stc_levels[:m], tc_levels[:m])


def run_p_dp(diagrams: SharedDiagrams, ordering: EdgeOrdering, tables: DpTables,
             tolerance: float = 1e-9) -> DpTables:
    """
    Top-down P pass: the root STC gets mass 1, then (1 - p) flows to lo and p to hi

    Raises:
        DiagramInvariantError: If live plus absorbed mass drifts from 1
    """
    m = diagrams.m
    tables.p = [dict() for _ in range(m)]
    if m == 0:
        return tables
    tables.p[0] = {node.state: 1.0 for node in diagrams.stc_levels[0].values()}
    absorbed = 0.0
    for i in range(1, m + 1):
        p = ordering.edge(i).p
        level = diagrams.stc_levels[i - 1]
        nxt: Dict[STC, float] = {} if i == m else tables.p[i]
        for state, mass in tables.p[i - 1].items():
            node = level[state]
            for child, weight in ((node.lo, 1.0 - p), (node.hi, p)):
                share = weight * mass
                if isinstance(child, STC):
                    nxt[child] = nxt.get(child, 0.0) + share
                elif child is BOTTOM:
                    absorbed += share
                else:
                    raise DiagramInvariantError(f"STC at level {i} has link {child!r}")
        error = abs(sum(nxt.values()) + absorbed - 1.0)
        tables.max_mass_error = max(tables.max_mass_error, error)
        if error > tolerance:
            raise DiagramInvariantError(f"P-DP mass off by {error:.3e} after level {i}")
    tables.absorbed = absorbed
    return tables


def _link_value(link, nxt: Dict, what: str, level: int) -> float:
    if link is TOP:
        return 1.0
    if link is BOTTOM:
        return 0.0
    try:
        return nxt[link]
    except KeyError:
        raise DiagramInvariantError(f"dangling {what} link at level {level}")


def run_q_dp(diagrams: SharedDiagrams, ordering: EdgeOrdering, tables: DpTables) -> DpTables:
    """Bottom-up Q pass over N': Q[TOP] = 1, Q[BOTTOM] = 0"""
    m = diagrams.m
    tables.q = [dict() for _ in range(m + 1)]
    for i in range(m, 0, -1):
        p = ordering.edge(i).p
        below = tables.q[i]
        out = tables.q[i - 1]
        for state, node in diagrams.tc_levels[i - 1].items():
            out[state] = ((1.0 - p) * _link_value(node.lo, below, 'Q', i)
                          + p * _link_value(node.hi, below, 'Q', i))
    return tables


def _scc_value(link: SccLink, q_below: Dict[TC, float], r_below: Dict[STC, List[float]], level: int) -> float:
    if link is TOP:
        return 1.0
    if link is BOTTOM:
        return 0.0
    if isinstance(link, TcRef):
        if link.state not in q_below:
            raise DiagramInvariantError(f"SCC link at level {level} points at a TC missing from level {level + 1}")
        return q_below[link.state]
    if isinstance(link, SccRef):
        values = r_below.get(link.state)
        if values is None or link.index >= len(values):
            raise DiagramInvariantError(f"SCC link at level {level} points at a missing STC SCC")
        return values[link.index]
    raise DiagramInvariantError(f"dangling SCC link at level {level}")


def run_r_dp(diagrams: SharedDiagrams, ordering: EdgeOrdering, tables: DpTables) -> DpTables:
    """Bottom-up R pass: per SCC, (1 - p) times the lo link value plus p times the hi link value"""
    m = diagrams.m
    tables.r = [dict() for _ in range(m + 1)]
    for i in range(m, 0, -1):
        p = ordering.edge(i).p
        q_below = tables.q[i]
        r_below = tables.r[i]
        out = tables.r[i - 1]
        for state, node in diagrams.stc_levels[i - 1].items():
            out[state] = [
                (1.0 - p) * _scc_value(lo, q_below, r_below, i) + p * _scc_value(hi, q_below, r_below, i)
                for lo, hi in node.scc_links
            ]
    return tables


def assemble_results(graph: UncertainDigraph, diagrams: SharedDiagrams, tables: DpTables,
                     ordering: EdgeOrdering, seeds: FrozenSet[int]) -> Dict[int, float]:
    """
    P(S ~> v) for every non-seed vertex of degree >= 2

    Uses the first level where v is on the frontier; pruned mass counts 0.
    """
    degree = graph.degrees
    res: Dict[int, float] = {}
    for v in range(graph.n):
        if v in seeds or degree[v] < 2:
            continue
        level = ordering.first_touch[v] + 1
        if not ordering.first_touch[v] or level > ordering.last_touch[v] or level > diagrams.m:
            raise DiagramInvariantError(f"vertex {v} of degree {degree[v]} is on no frontier")
        frontier = ordering.frontier(level)
        try:
            rank = frontier.index(v)
        except ValueError:
            raise DiagramInvariantError(f"vertex {v} missing from frontier W_{level}")
        total = 0.0
        r_level = tables.r[level - 1]
        for state, mass in tables.p[level - 1].items():
            if (state.reached >> rank) & 1:
                total += mass
            else:
                total += mass * r_level[state][state.scc_of[rank]]
        res[v] = total
    tables.res = res
    return res


def fix_degree_one(graph: UncertainDigraph, seeds: FrozenSet[int], res: Dict[int, float]) -> Dict[int, float]:
    """
    Fill in pendant vertices from their unique neighbour

    A pendant that is the tail of its edge has no incoming edge; a pendant head
    is reached exactly when its neighbour is reached and the edge is present.
    Tails go first so a single-edge graph resolves its head from them.
    """
    degree = graph.degrees
    incident = graph.incident_edges
    out = dict(res)
    pendants = [v for v in range(graph.n) if degree[v] <= 1 and v not in seeds]
    for v in pendants:
        if degree[v] == 0 or graph.edges[incident[v][0]].tail == v:
            out[v] = 0.0
    for v in pendants:
        if degree[v] == 0:
            continue
        e = graph.edges[incident[v][0]]
        if e.head != v:
            continue
        w = e.tail
        if w in seeds:
            reach_w = 1.0
        elif w in out:
            reach_w = out[w]
        else:
            raise DiagramInvariantError(f"neighbour {w} of pendant {v} has no probability")
        out[v] = e.p * reach_w
    return out


@dataclass
class AllTargetsRun:
    """Answers plus the statistics a report needs"""

    probs: Dict[int, float]
    stc_sizes: List[int]
    tc_sizes: List[int]
    timings: Dict[str, float]
    max_mass_error: float
    diagrams: Optional[SharedDiagrams] = None
    tables: Optional[DpTables] = None


class AllTargetsSolver:
    """
    Linear-time solver for P(S ~> v) over all vertices of one component
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
        self.keep_diagrams = config.get('keep_diagrams', False)
        self.logger = logging.getLogger(__name__)

    def solve(self, graph: UncertainDigraph, ordering: EdgeOrdering, seeds: FrozenSet[int]) -> AllTargetsRun:
        """
        Run all phases on one component

        Returns:
            AllTargetsRun with probabilities for every non-seed vertex
        """
        seeds = frozenset(seeds)
        timings: Dict[str, float] = {}

        start = time.perf_counter()
        diagrams = build_shared_diagrams(graph, ordering, seeds, self.bound_factor)
        timings['build'] = time.perf_counter() - start

        start = time.perf_counter()
        tables = run_p_dp(diagrams, ordering, DpTables(), self.tolerance)
        timings['p_dp'] = time.perf_counter() - start

        start = time.perf_counter()
        run_q_dp(diagrams, ordering, tables)
        timings['q_dp'] = time.perf_counter() - start

        start = time.perf_counter()
        run_r_dp(diagrams, ordering, tables)
        timings['r_dp'] = time.perf_counter() - start

        start = time.perf_counter()
        res = assemble_results(graph, diagrams, tables, ordering, seeds)
        probs = fix_degree_one(graph, seeds, res)
        timings['assemble'] = time.perf_counter() - start

        self.logger.info(
            f"All-targets: m={ordering.m}, omega={ordering.omega}, "
            f"peak STCs={max(diagrams.stc_sizes, default=0)}, peak TCs={max(diagrams.tc_sizes, default=0)}, "
            f"{sum(timings.values()):.4f}s"
        )
        keep = self.keep_diagrams
        return AllTargetsRun(
            probs=probs,
            stc_sizes=diagrams.stc_sizes,
            tc_sizes=diagrams.tc_sizes,
            timings=timings,
            max_mass_error=tables.max_mass_error,
            diagrams=diagrams if keep else None,
            tables=tables if keep else None,
        )
