"""
Tests for graph parsing, seeds, components and spread aggregation
"""

import pytest

from errors import DiagramInvariantError, GraphFormatError, SeedError
from uncertain_graph import (SeedSet, UncertainDigraph, assemble_spread, parse_graph, serialize_graph,
                             split_components)


def test_parse_numeric_graph():
    graph = parse_graph("# diamond\n4\n0 1 0.5\n0 2 0.5\n1 3 0.5\n2 3 0.25  # last\n")
    assert graph.n == 4
    assert graph.m == 4
    assert graph.edges[3].p == 0.25
    assert graph.labels == ('0', '1', '2', '3')


def test_parse_symbolic_labels_in_order_of_appearance():
    graph = parse_graph("3\nalice bob 0.9\nbob carol 0.1\n")
    assert graph.labels == ('alice', 'bob', 'carol')
    assert graph.edges[1].tail == 1 and graph.edges[1].head == 2


def test_self_loops_are_dropped():
    graph = parse_graph("2\n0 0 0.5\n0 1 0.5\n1 1 1.0\n")
    assert graph.m == 1
    assert graph.dropped_self_loops == 2


def test_parallel_edges_are_kept():
    graph = parse_graph("2\n0 1 0.5\n0 1 0.5\n")
    assert graph.m == 2
    assert graph.to_networkx().number_of_edges() == 2


@pytest.mark.parametrize("text, fragment", [
    ("2\n0 1 1.5\n", "line 2: probability out of range"),
    ("2\n0 1 -0.1\n", "probability out of range"),
    ("2\n0 5 0.5\n5 7 0.5\n", "vertex id overflow"),
    ("2\n@labels a\na a 0.5\n", "2 distinct labels"),
    ("2\n@labels a b\na c 0.5\n", "missing from the label line"),
    ("2\n0 1\n", "malformed edge line"),
    ("", "missing vertex count"),
    ("x\n", "vertex count"),
    ("2\na b 0.5\nb c 0.5\n", "vertex id overflow"),
    ("2\n0 1 abc\n", "not a number"),
])
def test_parse_errors_name_the_problem(text, fragment):
    with pytest.raises(GraphFormatError) as info:
        parse_graph(text)
    assert fragment in str(info.value)


def test_serialize_keeps_edges_and_probabilities(diamond):
    again = parse_graph(serialize_graph(diamond))
    assert again.edges == diamond.edges


def test_serialize_round_trips_text_labels_without_self_loops():
    graph = parse_graph("3\nx x 0.9\n10 20 0.5\nx 10 0.4\n")
    assert graph.labels == ('x', '10', '20')
    text = serialize_graph(graph)
    assert text.splitlines()[1] == "@labels x 10 20"
    again = parse_graph(text)
    assert again.labels == graph.labels
    assert again.edges == graph.edges
    assert parse_graph(serialize_graph(again)) == again


def test_numeric_tokens_become_labels_when_any_endpoint_is_not_an_id():
    graph = parse_graph("3\n7 9 0.5\nx 9 0.5\n")
    assert graph.labels == ('7', '9', 'x')
    assert [(e.tail, e.head) for e in graph.edges] == [(0, 1), (2, 1)]


def test_isolated_labelled_vertices_survive_serialization():
    graph = parse_graph("3\nalice bob 0.5\n")
    assert graph.labels == ('alice', 'bob', '_2')
    again = parse_graph(serialize_graph(graph))
    assert again.labels == graph.labels
    assert again.edges == graph.edges


def test_seed_parsing_accepts_commas_and_spaces(diamond):
    assert SeedSet.parse(diamond, "0, 2").members == frozenset({0, 2})
    assert SeedSet.parse(diamond, "1 3").members == frozenset({1, 3})


def test_seed_errors(diamond):
    with pytest.raises(SeedError):
        SeedSet.parse(diamond, "")
    with pytest.raises(SeedError, match="unknown vertex label"):
        SeedSet.parse(diamond, "7")


def test_split_components_keeps_connected_graph(diamond):
    parts = split_components(diamond, SeedSet(frozenset({0})))
    assert len(parts) == 1
    assert parts[0].graph is diamond


def test_split_components_reindexes():
    graph = UncertainDigraph.from_edges(5, [(3, 4, 0.5), (0, 1, 0.2)])
    parts = split_components(graph, SeedSet(frozenset({4})))
    assert [p.vertices for p in parts] == [(0, 1), (2,), (3, 4)]
    last = parts[2]
    assert last.seeds == frozenset({1})
    assert last.graph.edges[0].tail == 0 and last.graph.edges[0].head == 1
    assert last.edges == (0,)
    assert not parts[0].has_seeds


def test_assemble_spread_excludes_seeds():
    result = assemble_spread({1: 0.5, 2: 0.25}, SeedSet(frozenset({0})), 3)
    assert result.sigma == pytest.approx(0.75)
    assert result.include_seeds_sigma == pytest.approx(1.75)


def test_assemble_spread_rejects_missing_vertex():
    with pytest.raises(DiagramInvariantError):
        assemble_spread({1: 0.5}, SeedSet(frozenset({0})), 3)
