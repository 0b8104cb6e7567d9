from collections import Counter

import pytest

from isotower.core import BudgetExceededError, ValidationError
from isotower.graphs.volcano import (
    BuildParams,
    assign_levels,
    build_graph,
    check_dual_closure,
    check_edge_counts,
    expected_crater_degree,
    fundamental_discriminant,
    kronecker,
    non_isolated_curves,
    predicted_vertex_count,
    project,
    projection_map,
    select_curves,
    verify_covering,
)
from isotower.graphs import graphcore
from isotower.utilities import Settings

J_1, J_2, J_1728, J_4 = "5^1:1", "5^1:2", "5^1:3", "5^1:4"


class TestParams:
    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"p": 5, "ell": 5}, "l must differ from p"),
            ({"p": 3, "ell": 2}, "prime greater than 3"),
            ({"p": 5, "ell": 4}, "l must be a prime"),
            ({"p": 5, "ell": 2, "N": 4}, "coprime"),
            ({"p": 5, "ell": 2, "m": -1}, "m must be >= 0"),
        ],
    )
    def test_rejects(self, kwargs, message):
        with pytest.raises(ValidationError, match=message):
            BuildParams(**kwargs).validate()

    def test_level(self):
        assert BuildParams(p=7, ell=2, N=3, m=2).level == 147

    def test_predicted_vertex_count(self):
        assert predicted_vertex_count(BuildParams(p=5, ell=2, m=0), 4) == 4
        assert predicted_vertex_count(BuildParams(p=5, ell=2, m=1), 4) == 8


class TestDiscriminants:
    @pytest.mark.parametrize(
        "d, expected",
        [(-16, (-4, 2)), (-40, (-40, 1)), (-20, (-20, 1)), (-75, (-3, 5)), (-7, (-7, 1))],
    )
    def test_fundamental_discriminant(self, d, expected):
        assert fundamental_discriminant(d) == expected

    @pytest.mark.parametrize("d", [5, -6, 0])
    def test_not_a_discriminant(self, d):
        with pytest.raises(ValidationError):
            fundamental_discriminant(d)

    @pytest.mark.parametrize(
        "d, ell, expected",
        [(-4, 2, 0), (-7, 2, 1), (-3, 2, -1), (-40, 13, 1), (-40, 3, -1), (-20, 5, 0)],
    )
    def test_kronecker(self, d, ell, expected):
        assert kronecker(d, ell) == expected


class TestCurveSelection:
    def test_ordinary_curves_over_f5(self, settings):
        curves = select_curves(BuildParams(p=5, ell=2), settings)
        assert sorted(curves) == [J_1, J_2, J_1728, J_4]

    def test_filters(self, settings):
        assert sorted(select_curves(BuildParams(p=5, ell=2, exclude_special_j=True), settings)) == [J_1, J_2, J_4]
        assert sorted(select_curves(BuildParams(p=5, ell=2, j_filter=(1, 3)), settings)) == [J_1, J_1728]
        with pytest.raises(ValidationError):
            select_curves(BuildParams(p=5, ell=2, j_filter=(9,)), settings)
        with pytest.raises(ValidationError):
            select_curves(BuildParams(p=5, ell=2, j_filter=(0,)), settings)


class TestLevelZeroGraph:
    def test_vertices(self, g50):
        assert g50.working_degree == 6
        assert g50.graph.number_of_nodes() == 4
        assert [v.j for v in g50.vertices] == [J_1, J_2, J_1728, J_4]

    def test_edges_out_of_1728(self, g50):
        assert sorted(w for _, w in g50.graph.out_edges(2)) == [0, 0, 2]

    def test_components_and_levels(self, g50):
        assert sorted(sorted(info.curves) for info in g50.components) == [
            [J_1, J_1728], [J_2], [J_4],
        ]
        assert g50.levels[J_1728] == 0
        assert g50.levels[J_1] == 1

    def test_assign_levels_rewrites_vertices(self, settings):
        ig = build_graph(BuildParams(p=5, ell=2), settings)
        for v in ig.graph.nodes:
            ig.graph.nodes[v]["level"] = -1
        ig.levels = {}
        assert assign_levels(ig) is ig
        assert ig.levels[J_1728] == 0
        assert [ig.graph.nodes[v]["level"] for v in range(4)] == [1, 0, 0, 0]

    def test_component_of_1728(self, g50):
        info = g50.component_of(2)
        assert info.fundamental_disc == -4
        assert info.kronecker == 0
        assert info.depth == 1

    def test_dual_closure(self, g50):
        assert check_dual_closure(g50) == []

    def test_non_isolated_curves(self, g50):
        assert {J_1, J_1728} <= set(non_isolated_curves(g50))

    def test_edge_provenance(self, g50):
        for _, _, attrs in g50.graph.edges(data=True):
            assert attrs["kernel"]
            assert attrs["color"] == "none"

    def test_export_is_reproducible(self, g50, settings):
        again = build_graph(BuildParams(p=5, ell=2), settings)
        assert again.to_json() == g50.to_json()
        document = graphcore.to_document(graphcore.load_json(g50.to_json()))
        assert document == graphcore.to_document(g50.graph)

    def test_summary(self, g50):
        summary = g50.summary()
        assert summary["vertices"] == 4
        assert summary["working_degree"] == 6


class TestLevelOneGraph:
    def test_vertex_count(self, g51):
        assert g51.working_degree == 12
        assert g51.graph.number_of_nodes() == 7
        per_curve = Counter(v.j for v in g51.vertices)
        assert per_curve == {J_1: 2, J_2: 2, J_1728: 1, J_4: 2}

    def test_points_have_exact_order(self, g51):
        for v in g51.graph.nodes:
            curve, point = g51.curve_of(v), g51.point_of(v)
            assert not point.is_infinity
            assert curve.mul(5, point).is_infinity

    def test_dual_closure(self, g51):
        assert check_dual_closure(g51) == []

    def test_projection_through_1728_is_not_a_cover(self, g51, settings):
        mapping, low = project(g51, 1, 0, settings)
        assert low.working_degree == g51.working_degree
        assert set(mapping.values()) == set(low.graph.nodes)
        fibers = Counter(low.vertices[w].j for w in mapping.values())
        assert fibers[J_1728] == 1
        assert fibers[J_2] == 2
        assert not verify_covering(g51.graph, low.graph, mapping).is_cover

    def test_projection_needs_one_field(self, g50, g51):
        with pytest.raises(ValidationError):
            projection_map(g51, g50)

    def test_project_validation(self, g51):
        with pytest.raises(ValidationError):
            project(g51, 1, 2)
        with pytest.raises(ValidationError):
            project(g51, 2, 0)
        mapping, same = project(g51, 1, 1)
        assert same is g51
        assert all(k == v for k, v in mapping.items())


class TestBudgets:
    def test_degree_budget(self):
        with pytest.raises(BudgetExceededError):
            build_graph(BuildParams(p=5, ell=2, m=1), Settings(max_degree=4))

    def test_vertex_budget(self):
        with pytest.raises(BudgetExceededError):
            build_graph(BuildParams(p=5, ell=2, m=2), Settings(vertex_budget=10))

    def test_forced_small_degree(self, settings):
        with pytest.raises(ValidationError):
            build_graph(BuildParams(p=5, ell=2, m=1), settings, working_degree=2)


class TestCraterDegree:
    def test_expected_values(self, g50):
        info = g50.component_of(2)
        assert expected_crater_degree(info, "1728", 2) == 4
        split = type(info)(**{**info.__dict__, "kronecker": 1, "depth": 0})
        assert expected_crater_degree(split, None, 2) == 4
        inert = type(info)(**{**info.__dict__, "kronecker": -1, "depth": 2})
        assert expected_crater_degree(inert, None, 2) == 3


@pytest.mark.slow
class TestJZeroOverF7:
    @pytest.fixture(scope="class")
    def g73(self, settings):
        return build_graph(BuildParams(p=7, ell=3), settings)

    def test_levels(self, g73):
        assert g73.levels["7^1:0"] == 0
        assert g73.levels["7^1:3"] == 1

    def test_component_arithmetic(self, g73):
        info = g73.component_of(0)
        assert sorted(info.curves) == ["7^1:0", "7^1:3"]
        assert (info.fundamental_disc, info.conductor, info.depth, info.kronecker) == (-3, 3, 1, 0)
        assert info.special_j == "0"

    def test_crater_degree_of_j_zero(self, g73):
        graph = g73.graph
        horizontal = sum(1 for _, w in graph.out_edges(0) if g73.level_of(w) == 0)
        horizontal += sum(1 for u, _ in graph.in_edges(0) if g73.level_of(u) == 0)
        vertical = sum(1 for _, w in graph.out_edges(0) if g73.level_of(w) == 1)
        assert (horizontal, vertical) == (2, 3)
        assert expected_crater_degree(g73.component_of(0), "0", 3) == 5

    def test_edge_counts(self, g73):
        assert check_edge_counts(g73) == []


class TestSplitCraterOverF7:
    @pytest.fixture(scope="class")
    def g75(self, settings):
        return build_graph(BuildParams(p=7, ell=5, j_filter=(4, 5)), settings)

    def test_component(self, g75):
        assert g75.working_degree == 4
        assert g75.graph.number_of_nodes() == 2
        info = g75.component_of(0)
        assert (info.fundamental_disc, info.kronecker, info.depth) == (-24, 1, 0)

    def test_edge_counts(self, g75):
        assert check_edge_counts(g75) == []
        assert check_dual_closure(g75) == []
