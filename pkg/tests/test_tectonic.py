import networkx as nx
import pytest

from isotower.core import BudgetExceededError, ValidationError
from isotower.graphs import graphcore
from isotower.graphs.crater import classify_component
from isotower.graphs.tectonic import (
    CMOracleInput,
    SearchBounds,
    TectonicParams,
    cm_order_profile,
    fundamental_discriminants,
    generate,
    inverse_search,
    load_params,
    prime_norm_generators,
    recognize,
    residue_degree_of_class,
    sweep,
)
from isotower.graphs.volcano import kronecker


class TestParams:
    @pytest.mark.parametrize(
        "values",
        [(4, 1, 1, 2), (3, 1, 1, 4), (0, 1, 1, 1), (2, 0, 1, 1), (6, 1, 1, 3)],
    )
    def test_invalid(self, values):
        with pytest.raises(ValidationError):
            TectonicParams(*values).validate()

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            TectonicParams(1, 1001, 1001, 1).validate()

    def test_load_params(self):
        assert load_params({"omega": "3", "s": 2, "t": 2, "c": 1}) == TectonicParams(3, 2, 2, 1)
        with pytest.raises(ValidationError):
            load_params({"omega": 3})


class TestGenerate:
    def test_counts(self):
        graph = generate(TectonicParams(3, 2, 2, 1))
        assert graph.number_of_nodes() == 12
        colors = [c for _, _, c in graph.edges(data="color")]
        assert colors.count("blue") == 12
        assert colors.count("green") == 12
        assert graph.graph["tectonic"] == {"omega": 3, "s": 2, "t": 2, "c": 1}

    def test_single_vertex(self):
        graph = generate(TectonicParams(1, 1, 1, 1))
        assert list(graph.nodes) == [0]
        assert sorted(c for _, _, c in graph.edges(data="color")) == ["blue", "green"]
        assert all(u == v for u, v in graph.edges())

    def test_colors_commute(self):
        graph = generate(TectonicParams(5, 3, 2, 2))
        blue = {u: v for u, v, c in graph.edges(data="color") if c == "blue"}
        green = {u: v for u, v, c in graph.edges(data="color") if c == "green"}
        assert all(blue[green[v]] == green[blue[v]] for v in graph.nodes)

    def test_json_export(self):
        text = graphcore.export_json(generate(TectonicParams(3, 4, 2, 1)))
        again = graphcore.load_json(text)
        assert recognize(again) == TectonicParams(3, 4, 2, 1)


class TestRecognize:
    def test_sweep(self):
        params = sweep(60)
        assert TectonicParams(3, 2, 2, 1) in params
        for p in params:
            assert recognize(generate(p)) == p, p

    @pytest.mark.slow
    def test_full_sweep(self):
        for p in sweep(200):
            assert recognize(generate(p)) == p, p

    def test_relabelled(self):
        params = TectonicParams(5, 2, 3, 2)
        graph = generate(params)
        order = sorted(graph.nodes, key=lambda v: (v * 7) % graph.number_of_nodes())
        assert recognize(graphcore.relabel_sorted(graph, order)) == params

    def test_twist_changes_graph(self):
        first, second = generate(TectonicParams(5, 2, 1, 1)), generate(TectonicParams(5, 2, 1, 2))
        assert graphcore.colored_digraph_iso(first, second) is None

    def test_rejects_other_graphs(self):
        cycle = graphcore.new_graph()
        cycle.add_nodes_from(range(3))
        for v in range(3):
            graphcore.add_edge(cycle, v, (v + 1) % 3, "blue")
        assert recognize(cycle) is None
        assert recognize(graphcore.new_graph()) is None

        uncolored = generate(TectonicParams(2, 1, 1, 1))
        nx.set_edge_attributes(uncolored, "none", "color")
        assert recognize(uncolored) is None

    def test_rejects_disconnected(self):
        left = generate(TectonicParams(2, 1, 1, 1))
        both = nx.disjoint_union(left, left)
        assert recognize(both) is None

    def test_rejects_non_commuting(self):
        graph = graphcore.new_graph()
        graph.add_nodes_from(range(3))
        for v in range(3):
            graphcore.add_edge(graph, v, (v + 1) % 3, "blue")
        for u, v in ((0, 0), (1, 2), (2, 1)):
            graphcore.add_edge(graph, u, v, "green")
        assert recognize(graph) is None


TWELVE_BLUE = [
    (1, 4), (4, 2), (2, 5), (5, 3), (3, 6), (6, 1),
    (10, 7), (7, 11), (11, 8), (8, 12), (12, 9), (9, 10),
]
TWELVE_GREEN = [
    (10, 4), (4, 11), (11, 5), (5, 12), (12, 6), (6, 10),
    (9, 1), (1, 7), (7, 2), (2, 8), (8, 3), (3, 9),
]
TWENTY_FOUR_BLUE = [
    (1, 4), (4, 5), (5, 6), (6, 2), (2, 7), (7, 8),
    (8, 9), (9, 3), (3, 10), (10, 11), (11, 12), (12, 1),
    (15, 16), (16, 17), (17, 18), (18, 13), (13, 19), (19, 20),
    (20, 21), (21, 14), (14, 22), (22, 23), (23, 24), (24, 15),
]
TWENTY_FOUR_GREEN = [
    (1, 13), (13, 2), (2, 14), (14, 3), (3, 15), (15, 1),
    (9, 24), (24, 12), (12, 18), (18, 6), (6, 21), (21, 9),
    (16, 4), (4, 19), (19, 7), (7, 22), (22, 10), (10, 16),
    (17, 5), (5, 20), (20, 8), (8, 23), (23, 11), (11, 17),
]


def _drawn_crater(blue, green):
    graph = graphcore.new_graph()
    graph.add_nodes_from({v for edge in blue + green for v in edge})
    for u, v in blue:
        graphcore.add_edge(graph, u, v, "blue")
    for u, v in green:
        graphcore.add_edge(graph, u, v, "green")
    return graph


class TestDrawnCraters:
    @pytest.mark.parametrize(
        "blue, green, params",
        [
            (TWELVE_BLUE, TWELVE_GREEN, TectonicParams(3, 2, 2, 1)),
            (TWENTY_FOUR_BLUE, TWENTY_FOUR_GREEN, TectonicParams(3, 4, 2, 1)),
        ],
    )
    def test_matches_generated(self, blue, green, params):
        drawn = _drawn_crater(blue, green)
        generated = generate(params)
        assert recognize(drawn) == params
        mapping = graphcore.colored_digraph_iso(drawn, generated)
        assert mapping is not None
        assert mapping[1] in generated.nodes

    def test_census_of_larger_drawing(self):
        profile = classify_component(_drawn_crater(TWENTY_FOUR_BLUE, TWENTY_FOUR_GREEN), anchor=1)
        assert profile.census == {
            "central": 3,
            "blue_primary": 9,
            "green_primary": 3,
            "secondary": 9,
        }
        assert {v for v, name in profile.classes.items() if name == "central"} == {1, 2, 3}

    def test_other_twist_is_not_the_drawing(self):
        drawn = _drawn_crater(TWELVE_BLUE, TWELVE_GREEN)
        assert graphcore.colored_digraph_iso(drawn, generate(TectonicParams(3, 2, 2, 2))) is None


class TestOracle:
    def test_minus_40(self):
        profile = cm_order_profile(CMOracleInput(-40, 13, (1, 1)))
        assert (profile.u_x, profile.u_xbar) == (10, 5)
        assert (profile.h1, profile.h2) == (3, 2)
        assert profile.params == TectonicParams(1, 3, 2, 1)
        assert profile.to_dict()["modulus"] == 13

    @pytest.mark.parametrize("m, h", [(2, 3), (3, 9), (4, 27)])
    def test_minus_20_powers_of_three(self, m, h):
        profile = cm_order_profile(CMOracleInput(-20, 3, (2, 9), m=m))
        assert profile.h1 == h
        assert profile.h2 == h

    def test_norm(self):
        assert CMOracleInput(-20, 3, (2, 9)).norm() == 409
        assert CMOracleInput(-7, 2, (1, 1)).norm() == 4

    @pytest.mark.parametrize(
        "inp",
        [
            CMOracleInput(-4, 5, (1, 1)),
            CMOracleInput(-12, 13, (1, 1)),
            CMOracleInput(-40, 3, (1, 1)),
            CMOracleInput(-40, 13, (13, 0)),
            CMOracleInput(-40, 13, (1, 1), m=0),
            CMOracleInput(-40, 13, (1, 1), N=13),
        ],
    )
    def test_invalid_inputs(self, inp):
        with pytest.raises(ValidationError):
            cm_order_profile(inp)

    def test_tame_level(self):
        profile = cm_order_profile(CMOracleInput(-40, 13, (1, 1), N=7))
        assert profile.modulus == 91
        assert profile.params.vertex_count == profile.h1 * profile.t

    def test_prime_power_level(self):
        profile = cm_order_profile(CMOracleInput(-40, 13, (1, 1), N=49))
        assert profile.modulus == 637
        assert profile.params.vertex_count == profile.h1 * profile.t

    def test_level_with_inert_factor(self):
        with pytest.raises(ValidationError, match="factor 3 of N"):
            cm_order_profile(CMOracleInput(-40, 13, (1, 1), N=21))


class TestSearch:
    def test_discriminants(self):
        found = fundamental_discriminants(24)
        assert -3 not in found and -4 not in found
        assert found[:5] == [-7, -8, -11, -15, -19]
        assert -20 in found and -24 in found and -12 not in found

    def test_prime_norm_generators(self):
        gens = prime_norm_generators(-40, 11)
        assert (11, 1, 1) in gens
        assert (11, -1, 1) in gens
        assert all(b >= 1 for _, _, b in gens)

    def test_residue_degree(self):
        assert residue_degree_of_class(-7, 2) == 1
        assert residue_degree_of_class(-20, 3) == 2

    def test_finds_known_witness(self):
        target = TectonicParams(1, 3, 2, 1)
        bounds = SearchBounds(max_p=13, max_l=11, max_N=1, max_dK=40, m=1)
        witnesses = inverse_search(target, bounds)
        assert any(w.d_K == -40 and w.p == 13 and w.x == (1, 1) for w in witnesses)
        assert all(w.profile.params == target for w in witnesses)
        keys = [(-w.d_K, w.p, w.N, w.ell, w.x) for w in witnesses]
        assert keys == sorted(keys)
        assert all(w.confirmed is None for w in witnesses)

    def test_witness_document(self):
        target = TectonicParams(1, 3, 2, 1)
        bounds = SearchBounds(max_p=13, max_l=11, max_N=1, max_dK=40, m=1)
        document = inverse_search(target, bounds)[0].to_dict()
        assert set(document) == {"dK", "p", "N", "l", "x", "profile", "confirmed", "notes"}

    def test_levels_use_split_primes_only(self):
        target = TectonicParams(1, 3, 2, 1)
        bounds = SearchBounds(max_p=13, max_l=11, max_N=4, max_dK=40, m=1)
        witnesses = inverse_search(target, bounds)
        assert any(w.d_K == -40 and w.p == 13 and w.N == 1 for w in witnesses)
        for w in witnesses:
            assert all(kronecker(w.d_K, q) == 1 for q in (2, 3) if w.N % q == 0)
