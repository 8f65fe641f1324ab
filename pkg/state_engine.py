"""
StateEngine - Transversal configurations and their transitions
Represents TCs and shared TCs (STCs) as bit rows keyed by frontier rank,
computes lo/hi transitions by transitive closure of a small per-level graph
over the frontier, applies top/bottom pruning, and derives SCCs and successive-SCC links
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, List, Tuple, Union

from edge_ordering import EdgeOrdering
from errors import DiagramInvariantError
from uncertain_graph import Edge

logger = logging.getLogger(__name__)

LO = 'lo'
HI = 'hi'
BRANCHES = (LO, HI)

# Column label of a target standardized by change_t
IMAGINARY_TARGET = 't'


class Terminal(Enum):
    """Pruned states: S ~> target certain (TOP) or impossible (BOTTOM)"""

    TOP = 'T'
    BOTTOM = 'B'

    @property
    def kind(self) -> str:
        return 'top' if self is Terminal.TOP else 'bottom'


TOP = Terminal.TOP
BOTTOM = Terminal.BOTTOM


def _bits(mask: int) -> List[int]:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


@dataclass(frozen=True)
class TC:
    """
    Transversal configuration over one level's frontier

    Frontier vertices fall in three classes: reached from S (mask `reached`),
    reaching the target (mask `reaching`), or neither. rows[k] holds the
    reachability mask of a "neither" vertex among "neither" vertices (its own
    bit included) and is 0 for the other two classes. Bits that cannot change
    any future S ~> target event are stored as 0.
    """

    reached: int
    reaching: int
    rows: Tuple[int, ...]
    target: Union[int, str]

    kind = 'matrix'

    @property
    def width(self) -> int:
        return len(self.rows)

    def matrix(self) -> Tuple[tuple, tuple, Tuple[Tuple[int, ...], ...]]:
        """
        Row labels, column labels and 0/1 entries in definition layout

        Rows are 'S' followed by ranks not reached from S; columns are ranks
        not reaching the target followed by the target label.
        """
        width = self.width
        row_ids = ['S'] + [k for k in range(width) if not (self.reached >> k) & 1]
        col_ids = [k for k in range(width) if not (self.reaching >> k) & 1] + [self.target]
        bits = []
        for r in row_ids:
            line = []
            for c in col_ids:
                if r == 'S':
                    line.append(1 if c != self.target and (self.reached >> c) & 1 else 0)
                elif c == self.target:
                    line.append((self.reaching >> r) & 1)
                else:
                    line.append((self.rows[r] >> c) & 1)
            bits.append(tuple(line))
        return tuple(row_ids), tuple(col_ids), tuple(bits)


@dataclass(frozen=True)
class STC:
    """
    Shared transversal configuration: a TC without a target column

    rows[k] is the reachability mask of an unreached vertex among unreached
    vertices (own bit included); rows of reached vertices are 0.
    """

    reached: int
    rows: Tuple[int, ...]

    kind = 'matrix'

    @property
    def width(self) -> int:
        return len(self.rows)

    @cached_property
    def sccs(self) -> Tuple[int, ...]:
        """SCC masks among unreached frontier vertices, ordered by smallest member rank"""
        assigned = 0
        components = []
        for k in range(len(self.rows)):
            if (self.reached >> k) & 1 or (assigned >> k) & 1:
                continue
            mask = 0
            for x in _bits(self.rows[k]):
                if (self.rows[x] >> k) & 1:
                    mask |= 1 << x
            assigned |= mask
            components.append(mask)
        return tuple(components)

    @cached_property
    def scc_of(self) -> Tuple[int, ...]:
        """SCC index per rank, -1 for reached vertices"""
        index = [-1] * len(self.rows)
        for c, mask in enumerate(self.sccs):
            for k in _bits(mask):
                index[k] = c
        return tuple(index)

    def matrix(self) -> Tuple[tuple, tuple, Tuple[Tuple[int, ...], ...]]:
        width = self.width
        row_ids = ['S'] + [k for k in range(width) if not (self.reached >> k) & 1]
        col_ids = list(range(width))
        bits = []
        for r in row_ids:
            if r == 'S':
                bits.append(tuple((self.reached >> c) & 1 for c in col_ids))
            else:
                bits.append(tuple((self.rows[r] >> c) & 1 for c in col_ids))
        return tuple(row_ids), tuple(col_ids), tuple(bits)


@dataclass(frozen=True)
class SccRef:
    """SCC `index` of an STC stored one level below"""

    state: STC
    index: int


@dataclass(frozen=True)
class TcRef:
    """A change_t-standardized TC stored one level below"""

    state: TC


State = Union[TC, STC, Terminal]
SccLink = Union[SccRef, TcRef, Terminal, None]


@dataclass(frozen=True)
class LevelStep:
    """
    Shared node layout of the per-level closure graph

    Local nodes are W_i in rank order followed by endpoints of e_i that are
    not in W_i; the S sentinel and a spare target node come after them.
    """

    level: int
    edge: Edge
    frontier: Tuple[int, ...]
    next_frontier: Tuple[int, ...]
    vertex_node: Dict[int, int]
    next_nodes: Tuple[int, ...]
    survivor: Tuple[int, ...]
    seed_mask: int
    seeds_done: bool
    seeds: FrozenSet[int]
    last_touch: Tuple[int, ...]

    @classmethod
    def build(cls, ordering: EdgeOrdering, seeds: FrozenSet[int], i: int) -> 'LevelStep':
        frontier = ordering.frontier(i)
        next_frontier = ordering.frontier(i + 1)
        edge = ordering.edge(i)
        vertex_node = {v: k for k, v in enumerate(frontier)}
        for v in (edge.tail, edge.head):
            if v not in vertex_node:
                vertex_node[v] = len(vertex_node)
        next_rank = {v: j for j, v in enumerate(next_frontier)}
        survivor = [-1] * len(vertex_node)
        for v, node in vertex_node.items():
            survivor[node] = next_rank.get(v, -1)
        seed_mask = 0
        for v in (edge.tail, edge.head):
            if v in seeds:
                seed_mask |= 1 << vertex_node[v]
        horizon = ordering.seed_horizon(seeds)
        return cls(
            level=i,
            edge=edge,
            frontier=frontier,
            next_frontier=next_frontier,
            vertex_node=vertex_node,
            next_nodes=tuple(vertex_node[v] for v in next_frontier),
            survivor=tuple(survivor),
            seed_mask=seed_mask,
            seeds_done=i >= horizon,
            seeds=frozenset(seeds),
            last_touch=ordering.last_touch,
        )

    @property
    def width(self) -> int:
        return len(self.frontier)

    @property
    def node_count(self) -> int:
        return len(self.vertex_node)

    def target_retired(self, target: Union[int, str]) -> bool:
        return target == IMAGINARY_TARGET or self.last_touch[target] <= self.level


def _close(adj: List[int]) -> List[int]:
    """Warshall closure on bit rows (reflexive bits expected on input)"""
    size = len(adj)
    for mid in range(size):
        bit = 1 << mid
        src = adj[mid]
        for x in range(size):
            if adj[x] & bit:
                adj[x] |= src
    return adj


def _project(adj: List[int], step: LevelStep, skip: int) -> Tuple[int, ...]:
    """Rows over W_{i+1} ranks for vertices outside `skip`, restricted to the same vertices"""
    next_nodes = step.next_nodes
    rows = []
    for j, node in enumerate(next_nodes):
        if (skip >> j) & 1:
            rows.append(0)
            continue
        reach = adj[node]
        row = 0
        for j2, node2 in enumerate(next_nodes):
            if not (skip >> j2) & 1 and (reach >> node2) & 1:
                row |= 1 << j2
        rows.append(row)
    return tuple(rows)


def _check_width(state: Union[TC, STC], step: LevelStep):
    if state.width != step.width:
        raise DiagramInvariantError(
            f"state of width {state.width} used at level {step.level} whose frontier has {step.width} vertices"
        )


def stc_transition(psi: STC, step: LevelStep, branch: str) -> Union[STC, Terminal]:
    """
    lo/hi transition of an STC across edge e_i

    Returns:
        STC over W_{i+1}, or BOTTOM when i >= i_S and S reaches no frontier vertex
    """
    _check_width(psi, step)
    s_node = step.node_count
    adj = [1 << x for x in range(s_node + 1)]
    adj[s_node] |= psi.reached | step.seed_mask
    for k, row in enumerate(psi.rows):
        if row:
            adj[k] |= row
    if branch == HI:
        adj[step.vertex_node[step.edge.tail]] |= 1 << step.vertex_node[step.edge.head]
    _close(adj)

    reach_s = adj[s_node]
    reached = 0
    for j, node in enumerate(step.next_nodes):
        if (reach_s >> node) & 1:
            reached |= 1 << j
    if step.seeds_done and not reached:
        return BOTTOM
    return STC(reached, _project(adj, step, reached))


def tc_transition(phi: TC, step: LevelStep, branch: str) -> Union[TC, Terminal]:
    """
    lo/hi transition of a TC across edge e_i with top/bottom pruning

    The target node is the target's own local node when it is a frontier
    vertex or an endpoint of e_i, and a spare isolated node otherwise.
    """
    _check_width(phi, step)
    s_node = step.node_count
    spare = s_node + 1
    adj = [1 << x for x in range(s_node + 2)]
    target_node = spare
    if phi.target != IMAGINARY_TARGET:
        target_node = step.vertex_node.get(phi.target, spare)
    target_bit = 1 << target_node

    adj[s_node] |= phi.reached | step.seed_mask
    for k, row in enumerate(phi.rows):
        if (phi.reaching >> k) & 1:
            adj[k] |= target_bit
        elif row:
            adj[k] |= row
    if branch == HI:
        adj[step.vertex_node[step.edge.tail]] |= 1 << step.vertex_node[step.edge.head]
    _close(adj)

    reach_s = adj[s_node]
    if reach_s & target_bit:
        return TOP
    reached = 0
    reaching = 0
    for j, node in enumerate(step.next_nodes):
        if (reach_s >> node) & 1:
            reached |= 1 << j
        elif adj[node] & target_bit:
            reaching |= 1 << j
    if step.seeds_done and not reached:
        return BOTTOM
    if not reaching and step.target_retired(phi.target):
        return BOTTOM
    return TC(reached, reaching, _project(adj, step, reached | reaching), phi.target)


def successive_scc(psi: STC, index: int, step: LevelStep, branch: str,
                   psi_next: Union[STC, Terminal]) -> SccLink:
    """
    Successor of SCC `index` of psi under one branch

    Args:
        psi: STC at level i
        index: SCC index in psi.sccs
        step: Level layout
        branch: LO or HI
        psi_next: stc_transition(psi, step, branch), already computed

    Returns:
        TOP (case i or the member becomes reached), BOTTOM (case ii),
        SccRef (case iii) or None when no member stays on the frontier
    """
    members = psi.sccs[index]
    if branch == HI:
        tail_node = step.vertex_node[step.edge.tail]
        head_node = step.vertex_node[step.edge.head]
        tail_reached = step.edge.tail in step.seeds or (
            tail_node < step.width and (psi.reached >> tail_node) & 1)
        if tail_reached and head_node < step.width and (members >> head_node) & 1:
            return TOP
    if psi_next is BOTTOM:
        return BOTTOM
    for k in _bits(members):
        j = step.survivor[k]
        if j < 0:
            continue
        if (psi_next.reached >> j) & 1:
            return TOP
        return SccRef(psi_next, psi_next.scc_of[j])
    return None


def recover_tc(psi: STC, rank: int, target: Union[int, str]) -> TC:
    """
    TC with target at frontier rank `rank`, recovered from an STC

    Columns of vertices that reach the target are dropped.

    Raises:
        DiagramInvariantError: If the vertex is already reached from S
    """
    if (psi.reached >> rank) & 1:
        raise DiagramInvariantError(f"vertex at rank {rank} is reached from S; its probability is 1")
    reaching = 0
    for k, row in enumerate(psi.rows):
        if (row >> rank) & 1:
            reaching |= 1 << k
    rows = tuple(0 if (reaching >> k) & 1 else row for k, row in enumerate(psi.rows))
    return TC(psi.reached, reaching, rows, target)


def change_t(phi: TC) -> TC:
    """Relabel the target column to the imaginary vertex t"""
    if phi.target == IMAGINARY_TARGET:
        return phi
    return TC(phi.reached, phi.reaching, phi.rows, IMAGINARY_TARGET)


def canonical_encode(state: State) -> bytes:
    """
    Deterministic byte encoding: row ids, column ids, then row-major bits

    Terminals encode to a single byte.
    """
    if isinstance(state, Terminal):
        return state.value.encode('ascii')
    row_ids, col_ids, bits = state.matrix()
    prefix = 'C' if isinstance(state, TC) else 'P'
    body = (
        ','.join(str(r) for r in row_ids)
        + '|' + ','.join(str(c) for c in col_ids)
        + '|' + ''.join(str(b) for line in bits for b in line)
    )
    return (prefix + str(state.width) + ':' + body).encode('ascii')


def state_bound(width: int, factor: int = 4) -> int:
    """Soft cap factor * 2^(width^2) on the number of stored states per level"""
    return factor * (1 << (width * width))


def initial_tc(target: Union[int, str]) -> TC:
    """Level-1 TC: the frontier before the first edge is empty"""
    return TC(0, 0, (), target)


def initial_stc() -> STC:
    return STC(0, ())


def link_label(link) -> str:
    """Short text form of a successor link for diagram dumps"""
    if link is None:
        return '-'
    if isinstance(link, Terminal):
        return link.value
    if isinstance(link, SccRef):
        return canonical_encode(link.state).decode('ascii') + f"#{link.index}"
    if isinstance(link, TcRef):
        return canonical_encode(link.state).decode('ascii')
    return canonical_encode(link).decode('ascii')
