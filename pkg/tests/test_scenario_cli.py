import json

import pytest
from click.testing import CliRunner

from RelCert.cli import cli, exit_code_for
from RelCert.errors import CosetSearchExhaustedError, InvariantBreachError, ResourceLimitError, ScenarioError
from RelCert.scenario import load_scenario, run_scenario, verify_file

TRANSFER = """
task = "transfer-pipeline"
group = "free(a,b)"
family = [["a"], ["b"]]

[params]
n = 3
window = 2
epsilon = "7/10"

[output]
dir = "out"
"""

Z_RELA = """
task = "rel-a-search"
group = "abelian(1)"

[params]
window = 1
S = 1
windows = [1, 2]
S_offset = 0
"""


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadScenario:
    def test_output_dir_is_relative_to_the_file(self, tmp_path):
        sc = load_scenario(write(tmp_path, "f2.toml", TRANSFER))
        assert sc.output_dir == tmp_path / "out"
        assert sc.params["n"] == 3

    def test_default_output_dir(self, tmp_path):
        sc = load_scenario(write(tmp_path, "z.toml", Z_RELA))
        assert sc.output_dir == tmp_path / "z-out"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(tmp_path / "nowhere.toml")

    def test_bad_toml(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(write(tmp_path, "bad.toml", "task = \n"))

    def test_missing_field(self, tmp_path):
        with pytest.raises(ScenarioError, match="'n'"):
            load_scenario(write(tmp_path, "f2.toml", TRANSFER.replace("n = 3\n", "")))

    def test_unknown_task(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(write(tmp_path, "x.toml", 'task = "guess"\n'))


class TestRunScenario:
    def test_transfer_pipeline(self, tmp_path):
        report = run_scenario(write(tmp_path, "f2.toml", TRANSFER))
        assert report.level == "certified"
        assert report.verdict["verification"]["achieved_variation"] == "2/3"
        assert report.verdict["qi_constant"] == "2/1"
        out = tmp_path / "out"
        for name in ("certificate.json", "coset_space.json", "report.json"):
            assert (out / name).exists()
        again = verify_file(out / "certificate.json", out / "coset_space.json")
        assert again.passed
        assert not verify_file(out / "certificate.json", out / "coset_space.json", epsilon="2/3").passed

    def test_reports_are_reproducible(self, tmp_path):
        path = write(tmp_path, "f2.toml", TRANSFER)
        first = run_scenario(path).to_dict()
        second = run_scenario(path).to_dict()
        first.pop("elapsed_seconds")
        second.pop("elapsed_seconds")
        assert first == second

    def test_rel_a_search(self, tmp_path):
        report = run_scenario(write(tmp_path, "z.toml", Z_RELA))
        assert report.verdict["optimum"] == "2/1"
        assert report.level == "certified"

    def test_folner(self, tmp_path):
        text = 'task = "folner"\n[params]\ngraph = "path"\nradius = 30\ndelta = "1/10"\ncap = 100\n'
        report = run_scenario(write(tmp_path, "line.toml", text))
        assert report.level == "certified"
        assert report.verdict["ratio"] == "4/41"
        subset = json.loads((tmp_path / "line-out" / "folner_set.json").read_text())["subset"]
        assert len(subset) == 41

    def test_uf_test(self, tmp_path):
        text = 'task = "uf-test"\n[params]\ngraph = "path"\nradius = 2\nR = 2\nK = 2\n'
        report = run_scenario(write(tmp_path, "uf.toml", text))
        assert report.verdict["feasible"]
        assert report.level == "evidence"
        assert (tmp_path / "uf-out" / "uf_witness.json").exists()

    def test_uf_test_on_an_even_window(self, tmp_path):
        text = 'task = "uf-test"\n[params]\ngraph = "segment"\nlength = 10\nR = 2\nK = 2\n'
        report = run_scenario(write(tmp_path, "uf.toml", text))
        assert not report.verdict["feasible"]
        assert report.verdict["interior"] == 8
        assert not (tmp_path / "uf-out" / "uf_witness.json").exists()

    def test_relative_amenability(self, tmp_path):
        text = 'task = "rel-amenability"\ngroup = "abelian(1)"\n[params]\nsupport_radii = [1, 2]\n'
        report = run_scenario(write(tmp_path, "z.toml", text))
        assert report.verdict["optima"] == {"1": "2/3", "2": "2/5"}
        assert (tmp_path / "z-out" / "mean_curve.csv").exists()

    def test_unknown_graph(self, tmp_path):
        text = 'task = "folner"\n[params]\ngraph = "torus"\ndelta = "1/10"\ncap = 10\n'
        with pytest.raises(ScenarioError):
            run_scenario(write(tmp_path, "t.toml", text))


class TestCommandLine:
    def test_run_and_verify(self, runner, tmp_path):
        path = write(tmp_path, "f2.toml", TRANSFER)
        result = runner.invoke(cli, ["run", str(path)], obj={})
        assert result.exit_code == 0
        assert json.loads(result.stdout)["level"] == "certified"

        out = tmp_path / "out"
        args = ["verify", str(out / "certificate.json"), str(out / "coset_space.json")]
        result = runner.invoke(cli, args, obj={})
        assert result.exit_code == 0
        assert json.loads(result.stdout)["passed"]

        # a failed verdict is still a completed run
        result = runner.invoke(cli, args + ["--eps", "2/3"], obj={})
        assert result.exit_code == 0
        assert not json.loads(result.stdout)["passed"]

    def test_missing_field_is_a_usage_error(self, runner, tmp_path):
        path = write(tmp_path, "f2.toml", TRANSFER.replace("window = 2\n", ""))
        result = runner.invoke(cli, ["run", str(path)], obj={})
        assert result.exit_code == 2
        assert "window" in result.output

    def test_missing_file_is_a_usage_error(self, runner, tmp_path):
        result = runner.invoke(cli, ["run", str(tmp_path / "nowhere.toml")], obj={})
        assert result.exit_code == 2

    def test_cell_cap_from_environment(self, tmp_path):
        runner = CliRunner(env={"RELCERT_MAX_CELLS": "5"})
        text = 'task = "rel-amenability"\ngroup = "free(a,b)"\n[params]\nsupport_radii = [2]\n'
        result = runner.invoke(cli, ["run", str(write(tmp_path, "f2.toml", text))], obj={})
        assert result.exit_code == 3

    def test_bad_environment_value(self, tmp_path):
        runner = CliRunner(env={"RELCERT_MAX_CELLS": "many"})
        result = runner.invoke(cli, ["run", str(write(tmp_path, "z.toml", Z_RELA))], obj={})
        assert result.exit_code == 2

    def test_curve(self, runner, tmp_path):
        result = runner.invoke(cli, ["curve", str(write(tmp_path, "z.toml", Z_RELA))], obj={})
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "window,S,optimum_num,optimum_den"
        assert lines[1] == "1,1,2,1"
        assert len(lines) == 3
        assert (tmp_path / "z-out" / "relA_curve.csv").exists()

    def test_export_lp(self, runner, tmp_path):
        target = tmp_path / "z.lp"
        result = runner.invoke(cli, ["export-lp", str(write(tmp_path, "z.toml", Z_RELA)), "-o", str(target)], obj={})
        assert result.exit_code == 0
        assert "Written to" in result.stdout
        assert "Minimize" in target.read_text()

    def test_export_needs_a_linear_program(self, runner, tmp_path):
        text = 'task = "uf-test"\n[params]\ngraph = "path"\nradius = 3\nR = 2\nK = 2\n'
        result = runner.invoke(cli, ["export-lp", str(write(tmp_path, "uf.toml", text))], obj={})
        assert result.exit_code == 2


class TestExitCodes:
    def test_mapping(self):
        assert exit_code_for(InvariantBreachError("recount differs")) == 4
        assert exit_code_for(ResourceLimitError("cap")) == 3
        assert exit_code_for(CosetSearchExhaustedError("layers")) == 3
        assert exit_code_for(ScenarioError("field")) == 2
        assert exit_code_for(ValueError("bad")) == 2

    def test_unexpected_errors_propagate(self):
        with pytest.raises(ZeroDivisionError):
            exit_code_for(ZeroDivisionError())
