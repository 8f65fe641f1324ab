"""
Tests for TC / STC values, transitions, SCCs and encodings

Transition soundness is checked against configurations read directly off
every subgraph (V, E') of small graphs.
"""

from itertools import combinations

import networkx as nx
import pytest

from edge_ordering import compute_frontiers, heuristic_ordering
from errors import DiagramInvariantError
from generators import random_seeds, random_small_graph
from oracle import conditional_brute_force, edges_before, stc_by_definition, tc_by_definition
from state_engine import (BOTTOM, BRANCHES, HI, IMAGINARY_TARGET, LO, STC, TC, TOP, LevelStep,
                          Terminal, canonical_encode, change_t, initial_stc, initial_tc, recover_tc, state_bound,
                          stc_transition, successive_scc, SccRef, tc_transition)
from uncertain_graph import UncertainDigraph


def subsets(items):
    items = list(items)
    for size in range(len(items) + 1):
        yield from combinations(items, size)


def test_sentinel_encodings_are_single_bytes():
    assert canonical_encode(TOP) == b'T'
    assert canonical_encode(BOTTOM) == b'B'
    assert TOP.kind == 'top'


def test_encoding_distinguishes_states():
    a = STC(0b01, (0, 0b10))
    b = STC(0b01, (0, 0b10))
    c = STC(0b10, (0b01, 0))
    assert canonical_encode(a) == canonical_encode(b)
    assert canonical_encode(a) != canonical_encode(c)
    tc = TC(0, 0b1, (0, 0b10), 5)
    assert canonical_encode(tc) != canonical_encode(change_t(tc))


def test_tc_matrix_layout():
    tc = TC(reached=0b001, reaching=0b010, rows=(0, 0, 0b100), target=7)
    rows, cols, bits = tc.matrix()
    assert rows == ('S', 1, 2)
    assert cols == (0, 2, 7)
    assert bits == ((1, 0, 0), (0, 0, 1), (0, 1, 0))


def test_sccs_ordered_by_smallest_member():
    psi = STC(0, (0b101, 0b111, 0b101))
    assert psi.sccs == (0b101, 0b010)
    assert psi.scc_of == (0, 1, 0)


def test_sccs_match_networkx(rng):
    for _ in range(30):
        width = int(rng.integers(1, 6))
        reached = int(rng.integers(0, 1 << width))
        graph = nx.DiGraph()
        unreached = [k for k in range(width) if not (reached >> k) & 1]
        graph.add_nodes_from(unreached)
        for x in unreached:
            for y in unreached:
                if x != y and rng.random() < 0.4:
                    graph.add_edge(x, y)
        closure = nx.transitive_closure(graph, reflexive=True)
        rows = [0] * width
        for x in unreached:
            rows[x] = sum(1 << y for y in closure.successors(x))
        psi = STC(reached, tuple(rows))
        expected = sorted(sum(1 << k for k in comp)
                          for comp in nx.strongly_connected_components(graph))
        assert sorted(psi.sccs) == expected
        mins = [(mask & -mask) for mask in psi.sccs]
        assert mins == sorted(mins)


def test_state_bound():
    assert state_bound(0) == 4
    assert state_bound(2, 4) == 64


def test_width_mismatch_is_an_invariant_error(path3):
    ordering = compute_frontiers(path3, [0, 1])
    step = LevelStep.build(ordering, frozenset({0}), 2)
    with pytest.raises(DiagramInvariantError):
        stc_transition(initial_stc(), step, LO)


def test_path_level_two_states(path3):
    ordering = compute_frontiers(path3, [0, 1])
    step = LevelStep.build(ordering, frozenset({0}), 1)
    assert stc_transition(initial_stc(), step, LO) is BOTTOM
    assert stc_transition(initial_stc(), step, HI) == STC(0b1, (0,))


def test_single_edge_prunes_both_ways(single_edge):
    ordering = compute_frontiers(single_edge, [0])
    step = LevelStep.build(ordering, frozenset({0}), 1)
    root = TC(0, 0, (), 1)
    assert tc_transition(root, step, HI) is TOP
    assert tc_transition(root, step, LO) is BOTTOM


def check_transitions_against_definition(graph, ordering, seeds):
    targets = [v for v in range(graph.n) if v not in seeds]
    for i in range(1, ordering.m + 1):
        step = LevelStep.build(ordering, seeds, i)
        edge_index = ordering.order[i - 1]
        for present in subsets(edges_before(ordering, i)):
            psi = stc_by_definition(graph, ordering, i, present, seeds)
            for branch in BRANCHES:
                after = present + (edge_index,) if branch == HI else present
                if isinstance(psi, STC):
                    assert stc_transition(psi, step, branch) == \
                        stc_by_definition(graph, ordering, i + 1, after, seeds)
                for v in targets:
                    phi = tc_by_definition(graph, ordering, i, present, seeds, v)
                    if isinstance(phi, Terminal):
                        continue
                    assert tc_transition(phi, step, branch) == \
                        tc_by_definition(graph, ordering, i + 1, after, seeds, v)


def test_transitions_match_definition_on_fixed_graphs(diamond, triangle, star):
    for graph, seeds in ((diamond, {0}), (triangle, {1}), (star, {0}), (diamond, {1, 2})):
        seeds = frozenset(seeds)
        check_transitions_against_definition(graph, heuristic_ordering(graph), seeds)


def test_transitions_match_definition_on_random_graphs(rng):
    for _ in range(25):
        graph = random_small_graph(rng, (2, 5), (1, 7))
        seeds = random_seeds(graph, rng)
        check_transitions_against_definition(graph, heuristic_ordering(graph), seeds)


def terminal_outcomes(graph, ordering, seeds, target):
    """(level, present edges, terminal) for every branch sequence that ends in TOP or BOTTOM"""
    steps = {i: LevelStep.build(ordering, seeds, i) for i in range(1, ordering.m + 1)}
    stack = [(initial_tc(target), 1, ())]
    while stack:
        state, i, present = stack.pop()
        if isinstance(state, Terminal):
            yield i, present, state
            continue
        if i > ordering.m:
            continue
        for branch in BRANCHES:
            after = present + (ordering.order[i - 1],) if branch == HI else present
            stack.append((tc_transition(state, steps[i], branch), i + 1, after))


def check_terminals_against_enumeration(graph, ordering, seeds):
    seen = set()
    for v in range(graph.n):
        if v in seeds:
            continue
        for level, present, terminal in terminal_outcomes(graph, ordering, seeds, v):
            conditional = conditional_brute_force(graph, ordering, level, present, seeds)[v]
            expected = 1.0 if terminal is TOP else 0.0
            assert conditional == pytest.approx(expected, abs=1e-12), (v, level, present)
            seen.add(terminal)
    return seen


def test_terminal_states_are_certain_outcomes(diamond, triangle, star):
    seen = set()
    for graph, seeds in ((diamond, {0}), (triangle, {1}), (star, {0}), (diamond, {1, 2})):
        seen |= check_terminals_against_enumeration(graph, heuristic_ordering(graph), frozenset(seeds))
    assert seen == {TOP, BOTTOM}


def test_terminal_states_are_certain_outcomes_on_random_graphs(rng):
    for _ in range(25):
        graph = random_small_graph(rng, (2, 6), (1, 8))
        seeds = random_seeds(graph, rng)
        check_terminals_against_enumeration(graph, heuristic_ordering(graph), seeds)


def test_recover_tc_matches_definition(rng):
    for _ in range(20):
        graph = random_small_graph(rng, (3, 6), (2, 7))
        seeds = random_seeds(graph, rng)
        ordering = heuristic_ordering(graph)
        for i in range(2, ordering.m + 1):
            frontier = ordering.frontier(i)
            for present in subsets(edges_before(ordering, i)):
                psi = stc_by_definition(graph, ordering, i, present, seeds)
                if not isinstance(psi, STC):
                    continue
                for rank, u in enumerate(frontier):
                    if (psi.reached >> rank) & 1:
                        with pytest.raises(DiagramInvariantError):
                            recover_tc(psi, rank, u)
                        continue
                    assert recover_tc(psi, rank, u) == tc_by_definition(graph, ordering, i, present, seeds, u)


def test_change_t_relabels_target_only():
    phi = TC(0b1, 0b10, (0, 0, 0b100), 4)
    standard = change_t(phi)
    assert standard.target == IMAGINARY_TARGET
    assert (standard.reached, standard.reaching, standard.rows) == (phi.reached, phi.reaching, phi.rows)
    assert change_t(standard) is standard


def test_successive_scc_cases(triangle):
    # 0->1->2->0 in that order, seed 1: at level 2 vertex 0 is unreached
    ordering = compute_frontiers(triangle, [0, 1, 2])
    seeds = frozenset({1})
    step1 = LevelStep.build(ordering, seeds, 1)
    psi = stc_transition(initial_stc(), step1, LO)
    assert psi == STC(0b10, (0b01, 0))
    assert psi.sccs == (0b01,)

    step2 = LevelStep.build(ordering, seeds, 2)
    # without 1->2 nothing reaches the frontier after the last seed edge
    lo2 = stc_transition(psi, step2, LO)
    assert lo2 is BOTTOM
    assert successive_scc(psi, 0, step2, LO, lo2) is BOTTOM
    link = successive_scc(psi, 0, step2, HI, stc_transition(psi, step2, HI))
    assert isinstance(link, SccRef)
    assert link.state.sccs[link.index] == 0b01

    # level 3 closes the cycle 2->0 with 2 reached on the hi branch of level 2
    psi3 = stc_transition(psi, step2, HI)
    step3 = LevelStep.build(ordering, seeds, 3)
    hi = stc_transition(psi3, step3, HI)
    assert successive_scc(psi3, 0, step3, HI, hi) is TOP
    lo = stc_transition(psi3, step3, LO)
    assert lo is BOTTOM
    assert successive_scc(psi3, 0, step3, LO, lo) is BOTTOM


def test_successive_scc_none_when_scc_leaves_frontier():
    graph = UncertainDigraph.from_edges(4, [(0, 1, 0.5), (0, 2, 0.5), (1, 2, 0.5), (2, 3, 0.5)])
    ordering = compute_frontiers(graph, [0, 1, 2, 3])
    seeds = frozenset({0})
    psi1 = stc_transition(initial_stc(), LevelStep.build(ordering, seeds, 1), LO)
    psi2 = stc_transition(psi1, LevelStep.build(ordering, seeds, 2), HI)
    # vertex 1 unreached, vertex 2 reached; vertex 1 leaves the frontier at level 3
    assert psi2 == STC(0b10, (0b01, 0))
    step3 = LevelStep.build(ordering, seeds, 3)
    for branch in BRANCHES:
        nxt = stc_transition(psi2, step3, branch)
        assert nxt == STC(0b1, (0,))
        assert successive_scc(psi2, 0, step3, branch, nxt) is None
