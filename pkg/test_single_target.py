"""
Tests for the per-target TC diagram and its top-down pass
"""

import io

import pytest

from edge_ordering import compute_frontiers, heuristic_ordering
from errors import SeedError
from generators import random_seeds, random_small_graph
from oracle import brute_force
from single_target import SingleTargetSolver, build_tc_diagram, top_down_dp
from state_engine import BOTTOM, TC, TOP, state_bound


def test_single_edge_diagram(single_edge):
    ordering = compute_frontiers(single_edge, [0])
    diagram = build_tc_diagram(single_edge, ordering, frozenset({0}), 1)
    node = diagram.levels[0][diagram.root]
    assert diagram.root == TC(0, 0, (), 1)
    assert node.hi is TOP
    assert node.lo is BOTTOM
    assert top_down_dp(diagram, ordering).p_top == pytest.approx(0.7, abs=1e-15)


def test_path_target(path3):
    ordering = compute_frontiers(path3, [0, 1])
    diagram = build_tc_diagram(path3, ordering, frozenset({0}), 2)
    assert diagram.level_sizes == [1, 1]
    table = top_down_dp(diagram, ordering)
    assert table.p_top == pytest.approx(0.25, abs=1e-15)
    assert table.p_bottom == pytest.approx(0.75, abs=1e-15)


def test_diamond_sink(diamond, engine_config):
    solver = SingleTargetSolver(engine_config)
    ordering = heuristic_ordering(diamond)
    assert solver.probability(diamond, ordering, frozenset({0}), 3) == pytest.approx(0.4375, abs=1e-12)
    assert solver.last_diagram.target == 3


def test_all_probabilities_skip_seeds(diamond, engine_config):
    probs = SingleTargetSolver(engine_config).all_probabilities(diamond, heuristic_ordering(diamond), frozenset({0}))
    assert set(probs) == {1, 2, 3}
    assert probs[1] == pytest.approx(0.5, abs=1e-12)


def test_mass_is_conserved(diamond):
    ordering = heuristic_ordering(diamond)
    table = top_down_dp(build_tc_diagram(diamond, ordering, frozenset({0}), 3), ordering)
    assert table.max_mass_error <= 1e-12
    assert table.p_top + table.p_bottom == pytest.approx(1.0, abs=1e-12)


def test_seed_target_is_rejected(diamond):
    with pytest.raises(SeedError):
        build_tc_diagram(diamond, heuristic_ordering(diamond), frozenset({0}), 0)


def test_dump_lists_every_state(diamond):
    ordering = heuristic_ordering(diamond)
    diagram = build_tc_diagram(diamond, ordering, frozenset({0}), 3)
    stream = io.StringIO()
    diagram.dump(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0].startswith("# TC diagram")
    assert len(lines) == 1 + diagram.total_states


def test_random_graphs_match_brute_force(rng, engine_config):
    solver = SingleTargetSolver(engine_config)
    for _ in range(40):
        graph = random_small_graph(rng, (2, 7), (1, 10))
        seeds = random_seeds(graph, rng)
        ordering = heuristic_ordering(graph)
        exact = brute_force(graph, seeds).probs
        for v, expected in exact.items():
            assert solver.probability(graph, ordering, seeds, v) == pytest.approx(expected, abs=1e-12)


def test_levels_respect_state_bound(rng):
    for _ in range(20):
        graph = random_small_graph(rng, (3, 8), (4, 14))
        seeds = random_seeds(graph, rng)
        ordering = heuristic_ordering(graph)
        for v in range(graph.n):
            if v in seeds:
                continue
            diagram = build_tc_diagram(graph, ordering, seeds, v, bound_factor=None)
            for i, size in enumerate(diagram.level_sizes, start=1):
                assert size <= state_bound(len(ordering.frontier(i)))
