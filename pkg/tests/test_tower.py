import pytest

from isotower.core import ValidationError
from isotower.graphs import graphcore
from isotower.graphs.tower import (
    IwasawaFit,
    TowerLevel,
    TowerReport,
    _kappa,
    build_tower,
    iwasawa_fit,
    level_graphs_dot,
    stabilization_level,
    tower_curves,
    unit_subgroup,
)
from isotower.graphs.volcano import BuildParams

J_1, J_2, J_1728, J_4 = "5^1:1", "5^1:2", "5^1:3", "5^1:4"


class TestStabilization:
    @pytest.mark.parametrize(
        "N, p, ell, expected",
        [(1, 5, 2, (1, 4)), (1, 3, 409, (1, 1)), (1, 5, 101, (2, 1))],
    )
    def test_levels(self, N, p, ell, expected):
        assert stabilization_level(N, p, ell) == expected

    def test_ell_equal_to_p(self):
        with pytest.raises(ValidationError):
            stabilization_level(1, 5, 5)


class TestIwasawaFit:
    @pytest.mark.parametrize(
        "ords, expected",
        [
            ([1, 6, 27, 128], IwasawaFit(1, 1, 0, 0)),
            ([0, 1, 2, 3], IwasawaFit(0, 1, 0, 0)),
            ([7, 7, 7], IwasawaFit(0, 0, 7, 0)),
        ],
    )
    def test_exact_fit(self, ords, expected):
        assert iwasawa_fit(ords, 5) == expected

    def test_too_few_levels(self):
        assert iwasawa_fit([1, 2], 5) is None

    def test_to_dict(self):
        assert IwasawaFit(1, 2, 3, 0).to_dict() == {"mu": 1, "lambda": 2, "nu": 3, "n_start": 0}


class TestHelpers:
    def test_unit_subgroup(self):
        assert unit_subgroup(25, 5) == [1, 6, 11, 16, 21]
        assert unit_subgroup(5, 5) == [1]

    def test_kappa_multiplies_components(self):
        graph = graphcore.new_graph()
        graph.add_nodes_from(range(8))
        for u, v in ((0, 1), (1, 2), (2, 0)):
            graphcore.add_edge(graph, u, v)
        for u in range(3, 7):
            for v in range(u + 1, 7):
                graphcore.add_edge(graph, u, v)
        assert _kappa(graph) == 3 * 16

    def test_failures_block_verification(self):
        cover = {"is_cover": True, "degree": 5}
        level = TowerLevel(1, 1, 15, 30, 1, cover=cover, step_cover=cover, deck_order=5, deck_count=5)
        assert level.verified
        level.failures.append("cover over m0 has degree 3, not 5")
        assert not level.verified
        assert level.to_dict()["verified"] is False

    def test_report_without_fit(self):
        report = TowerReport(5, 2, 1, 1, 4, None, [J_1], [])
        document = report.to_dict()
        assert document["fit"] == "insufficient levels"
        assert document["components_stable"] is True


class TestTowerCurves:
    @pytest.mark.parametrize("anchor", [2, 0, 7])
    def test_rejected_anchors(self, anchor, settings):
        with pytest.raises(ValidationError):
            tower_curves(BuildParams(p=5, ell=2), anchor, settings)

    def test_anchor_component(self, settings):
        curves, isolated = tower_curves(BuildParams(p=5, ell=2), 3, settings)
        assert sorted(curves) == [J_1, J_1728]
        assert isolated == [J_2, J_4]

    def test_default_scope(self, settings):
        curves, _ = tower_curves(BuildParams(p=5, ell=2), None, settings)
        assert sorted(curves) == [J_1, J_1728]


@pytest.mark.slow
class TestBuildTower:
    def test_one_step(self, settings):
        report = build_tower(BuildParams(p=5, ell=2), r_max=1, settings=settings)
        assert (report.m0, report.c) == (1, 4)
        assert [level.vertices for level in report.levels] == [3, 15]
        top = report.levels[1]
        assert top.cover["degree"] == 5
        assert top.deck_order == 5
        assert top.verified, top.failures
        assert sorted(level_graphs_dot(report)) == [1, 2]
        assert report.to_dict()["fit"] == "insufficient levels"

    def test_two_steps(self, settings):
        report = build_tower(BuildParams(p=5, ell=2), r_max=2, settings=settings)
        assert [level.vertices for level in report.levels] == [3, 15, 75]
        top = report.levels[2]
        assert top.cover["degree"] == 25
        assert top.step_cover["degree"] == 5
        assert top.deck_order == 25
        assert all(level.verified for level in report.levels), [level.failures for level in report.levels]
        assert report.components_stable
        assert report.levels[0].kappa == 4
        assert report.levels[0].ord_p == 0

        assert all(level.ord_p >= 0 for level in report.levels)
        fit = report.fit
        if fit is not None:
            assert report.to_dict()["fit"] == fit.to_dict()
            for level in report.levels[fit.start:]:
                assert level.ord_p == fit.mu * 5**level.r + fit.lam * level.r + fit.nu
