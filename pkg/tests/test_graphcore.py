import itertools
import json

import networkx as nx
import pytest

from isotower.core import ValidationError
from isotower.graphs import graphcore


def _directed(edges, nodes=None):
    graph = graphcore.new_graph()
    graph.add_nodes_from(nodes if nodes is not None else {v for e in edges for v in e})
    for u, v in edges:
        graphcore.add_edge(graph, u, v)
    return graph


def _brute_force_trees(nodes, edges):
    count = 0
    for subset in itertools.combinations(edges, len(nodes) - 1):
        forest = nx.Graph()
        forest.add_nodes_from(nodes)
        forest.add_edges_from(subset)
        if nx.is_tree(forest):
            count += 1
    return count


def _cycle(colors, n):
    graph = graphcore.new_graph()
    graph.add_nodes_from(range(n))
    for v in range(n):
        graphcore.add_edge(graph, v, (v + 1) % n, colors)
    return graph


class TestSpanningTrees:
    def test_triangle(self):
        assert graphcore.spanning_tree_count(_directed([(0, 1), (1, 2), (2, 0)])) == 3

    def test_complete_graph_k4(self):
        edges = list(itertools.combinations(range(4), 2))
        assert graphcore.spanning_tree_count(_directed(edges)) == 16

    def test_parallel_edges_and_loops(self):
        graph = _directed([(0, 1), (1, 0), (0, 0)])
        assert graphcore.spanning_tree_count(graph) == 2

    def test_single_vertex(self):
        assert graphcore.spanning_tree_count(_directed([], nodes=[0])) == 1

    def test_disconnected_rejected(self):
        with pytest.raises(ValidationError):
            graphcore.spanning_tree_count(_directed([(0, 1)], nodes=[0, 1, 2]))
        with pytest.raises(ValidationError):
            graphcore.spanning_tree_count(graphcore.new_graph())

    def test_matches_brute_force(self):
        checked = 0
        for small in nx.graph_atlas_g()[1:]:
            if not nx.is_connected(small) or small.number_of_edges() > 8:
                continue
            edges = list(small.edges())
            expected = _brute_force_trees(list(small.nodes), edges)
            assert graphcore.spanning_tree_count(_directed(edges, nodes=small.nodes)) == expected
            checked += 1
        assert checked > 50


class TestComponents:
    def test_weak_components_sorted(self):
        graph = _directed([(3, 4), (0, 1)], nodes=[4, 3, 2, 1, 0])
        assert graphcore.components(graph) == [[0, 1], [2], [3, 4]]

    def test_add_edge_validation(self):
        graph = _directed([], nodes=[0])
        with pytest.raises(ValidationError):
            graphcore.add_edge(graph, 0, 1)
        with pytest.raises(ValidationError):
            graphcore.add_edge(graph, 0, 0, color="red")


class TestColoredIsomorphism:
    def test_relabelled_copy(self):
        graph = _cycle("blue", 5)
        other = nx.relabel_nodes(graph, {v: (3 * v) % 5 for v in range(5)})
        mapping = graphcore.colored_digraph_iso(graph, other)
        assert mapping is not None
        assert graphcore._edges_preserved(graph, other, mapping)

    def test_component_order_does_not_matter(self):
        graph = graphcore.new_graph()
        graph.add_nodes_from(range(4))
        graphcore.add_edge(graph, 0, 1, "blue")
        graphcore.add_edge(graph, 2, 3, "blue")
        graphcore.add_edge(graph, 3, 2, "green")
        other = graphcore.new_graph()
        other.add_nodes_from(range(4))
        graphcore.add_edge(other, 0, 1, "blue")
        graphcore.add_edge(other, 1, 0, "green")
        graphcore.add_edge(other, 2, 3, "blue")

        mapping = graphcore.colored_digraph_iso(graph, other)
        assert mapping == {0: 2, 1: 3, 2: 0, 3: 1}
        assert graphcore._edges_preserved(graph, other, mapping)

    def test_colors_must_match(self):
        assert graphcore.colored_digraph_iso(_cycle("blue", 4), _cycle("green", 4)) is None

    def test_direction_matters_for_general_matcher(self):
        graph = _directed([(0, 1), (0, 2)])
        other = _directed([(1, 0), (2, 0)])
        assert graphcore.colored_digraph_iso(graph, other) is None

    def test_matcher_limit(self):
        edges = [(0, v) for v in range(1, 70)]
        with pytest.raises(ValidationError):
            graphcore.colored_digraph_iso(_directed(edges), _directed(edges), fallback_limit=64)


class TestExport:
    def test_json_round_trip(self):
        graph = graphcore.new_graph(p=5, l=2, extra="x")
        graph.add_node(0, j="5^1:3", point="inf", level=0, component=0)
        graph.add_node(1, j="5^1:1", point="inf", level=1, component=0)
        graphcore.add_edge(graph, 0, 1, kernel="k1")
        graphcore.add_edge(graph, 0, 0, "blue", kernel="k0")
        text = graphcore.export_json(graph)
        document = json.loads(text)
        assert document["p"] == 5
        assert document["meta"] == {"extra": "x"}
        assert [e["dst"] for e in document["edges"]] == [0, 1]
        again = graphcore.load_json(text)
        assert graphcore.to_document(again) == document

    def test_export_is_deterministic(self):
        first = _directed([(2, 0), (0, 1), (1, 2)])
        second = _directed([(1, 2), (2, 0), (0, 1)])
        assert graphcore.export_json(first) == graphcore.export_json(second)

    def test_dot(self):
        dot = graphcore.export_dot(_cycle("green", 3), name="tri")
        assert dot.startswith("digraph tri {")
        assert dot.count("color=green") == 3

    def test_bad_inputs(self):
        with pytest.raises(ValidationError):
            graphcore.load_json("{not json")
        with pytest.raises(ValidationError):
            graphcore.load_json('{"vertices": []}')
        with pytest.raises(ValidationError):
            graphcore.export(_cycle("blue", 2), "svg")
