import json

import pytest

from isotower.cli import crater_cli, tectonic_cli
from isotower.cli import main as cli_main


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestUmbrella:
    def test_no_arguments_prints_help(self, capsys):
        assert cli_main.run([]) == 0
        assert "tectonic" in capsys.readouterr().out

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli_main.run(["-V"])
        assert exc.value.code == 0
        assert "isotower" in capsys.readouterr().out

    @pytest.mark.parametrize(
        "argv",
        [
            ["build", "--p", "five", "--l", "2"],
            ["build", "--p", "5"],
            ["build", "--p", "5", "--l", "2", "--no-such-flag"],
            ["launch"],
        ],
    )
    def test_usage_errors_are_validation_errors(self, argv, capsys):
        with pytest.raises(SystemExit) as exc:
            cli_main.run(argv)
        assert exc.value.code == 1
        assert "usage:" in capsys.readouterr().err

    def test_tool_parser_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            crater_cli.run(["--p", "5", "--l", "two"])
        assert exc.value.code == 1


class TestBuild:
    def test_level_zero_with_checks(self, capsys):
        assert cli_main.run(["build", "--p", "5", "--l", "2", "--m", "0", "--check"]) == 0
        document = _stdout_json(capsys)
        assert len(document["vertices"]) == 4
        assert document["meta"]["checks"]["edge_counts"] == []

    def test_ell_equal_to_p(self, capsys):
        assert cli_main.run(["build", "--p", "5", "--l", "5"]) == 1
        assert "l must differ from p" in capsys.readouterr().err

    def test_bad_j_list(self, capsys):
        assert cli_main.run(["build", "--p", "5", "--l", "2", "--j-filter", "1,x"]) == 1
        assert "--j-filter" in capsys.readouterr().err

    def test_curve_selection_flags(self, capsys):
        assert cli_main.run(["build", "--p", "5", "--l", "2", "--exclude-special-j"]) == 0
        assert len(_stdout_json(capsys)["vertices"]) == 3
        assert cli_main.run(["build", "--p", "5", "--l", "2", "--j-filter", "1,3"]) == 0
        assert len(_stdout_json(capsys)["vertices"]) == 2

    def test_dot_output(self, tmp_path):
        target = tmp_path / "g.dot"
        assert cli_main.run(["build", "--p", "5", "--l", "2", "--format", "dot", "--out", str(target)]) == 0
        assert target.read_text(encoding="utf-8").startswith("digraph G {")

    def test_missing_output_directory(self, tmp_path):
        target = tmp_path / "missing" / "g.json"
        assert cli_main.run(["build", "--p", "5", "--l", "2", "--out", str(target)]) == 1


class TestCrater:
    def test_kind_filter(self, capsys):
        assert cli_main.run(["crater", "--p", "5", "--l", "2", "--kind", "inert-isolated"]) == 0
        document = _stdout_json(capsys)
        assert [c["kind"] for c in document["craters"]] == ["inert-isolated", "inert-isolated"]
        assert document["graph"]["vertices"] == 4


class TestTectonic:
    def test_generate_then_recognize(self, tmp_path, capsys):
        graph_file = tmp_path / "crater.json"
        dot_file = tmp_path / "crater.dot"
        args = ["tectonic", "gen", "--omega", "3", "--s", "2", "--t", "2", "--c", "1"]
        assert cli_main.run(args + ["--out", str(graph_file), "--dot", str(dot_file)]) == 0
        assert len(json.loads(graph_file.read_text(encoding="utf-8"))["vertices"]) == 12
        assert dot_file.exists()

        assert cli_main.run(["tectonic", "recognize", str(graph_file)]) == 0
        document = _stdout_json(capsys)
        assert document == {
            "tectonic": True,
            "params": {"omega": 3, "s": 2, "t": 2, "c": 1},
        }

    def test_invalid_twist(self):
        assert cli_main.run(["tectonic", "gen", "--omega", "4", "--s", "1", "--t", "1", "--c", "2"]) == 1

    def test_recognize_missing_file(self, tmp_path):
        assert cli_main.run(["tectonic", "recognize", str(tmp_path / "nope.json")]) == 1

    def test_oracle(self, capsys):
        args = ["tectonic", "oracle", "--dK", "-40", "--p", "13", "--x", "1", "1"]
        assert cli_main.run(args) == 0
        document = _stdout_json(capsys)
        assert document["profile"]["h1"] == 3
        assert document["profile"]["h2"] == 2
        assert document["norm"] == 11

    def test_search_without_confirmation(self, capsys):
        args = [
            "search", "--omega", "1", "--s", "3", "--t", "2", "--c", "1",
            "--max-p", "13", "--max-l", "11", "--max-dK", "40",
        ]
        assert tectonic_cli.run(args) == 0
        document = _stdout_json(capsys)
        assert document["target"] == {"omega": 1, "s": 3, "t": 2, "c": 1}
        assert any(w["dK"] == -40 and w["p"] == 13 for w in document["witnesses"])

    def test_missing_subcommand_argument(self):
        with pytest.raises(SystemExit) as exc:
            tectonic_cli.run(["gen", "--omega", "3"])
        assert exc.value.code == 1


class TestTowerAndVoltage:
    def test_isolated_anchor(self, capsys):
        assert cli_main.run(["tower", "--p", "5", "--l", "2", "--anchor", "2"]) == 1
        assert "isolated" in capsys.readouterr().err

    def test_voltage_level_zero(self, capsys):
        args = ["voltage", "--p", "5", "--l", "2", "--m", "0", "--compare-seed", "3"]
        assert cli_main.run(args) == 0
        document = _stdout_json(capsys)
        assert document["comparison"]["ok"] is True
        assert document["coboundary"]["is_coboundary"] is True
        assert document["coboundary"]["seeds"] == [0, 3]

    def test_voltage_negative_level(self):
        assert cli_main.run(["voltage", "--p", "5", "--l", "2", "--m", "-1"]) == 1
