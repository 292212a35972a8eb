import json

import pytest
from click.testing import CliRunner

from contestkit.cli import cli
from contestkit.synthetic import credit_like_csv_text


@pytest.fixture()
def runner():
    return CliRunner()


class TestGroup:
    def test_help_lists_every_subcommand(self, runner):
        out = runner.invoke(cli, ["--help"]).output
        for name in ("train", "explain", "audit", "multiplicity", "whatif", "repro", "serve"):
            assert name in out

    def test_version_is_reported(self, runner):
        res = runner.invoke(cli, ["--version"])
        assert res.exit_code == 0
        assert "contestkit" in res.output


class TestRepro:
    def test_counterexamples_pass_and_print_claim_lines(self, runner):
        for fixture in ("1", "2", "3"):
            res = runner.invoke(cli, ["repro", "--counterexample", fixture])
            assert res.exit_code == 0, res.output
            assert "PASS" in res.output
            assert "[FAIL]" not in res.output
            assert f"counterexample-{fixture}" in res.output

    def test_json_output_is_byte_identical_across_runs(self, runner):
        a = runner.invoke(cli, ["repro", "--counterexample", "2", "--json"]).output
        b = runner.invoke(cli, ["repro", "--counterexample", "2", "--json"]).output
        assert a == b
        doc = json.loads(a)
        assert doc["fixture"] == "counterexample-2"
        assert "runtime_s" not in doc

    def test_failing_claims_exit_nonzero(self, runner, tmp_path):
        # generated data breaks the real-data metric bands unless it is
        # declared synthetic, so this run must fail loudly
        path = tmp_path / "credit.csv"
        path.write_text(credit_like_csv_text(600, seed=0))
        res = runner.invoke(cli, ["repro", "--credit-pipeline", "--data", str(path)])
        assert res.exit_code == 1
        assert "[FAIL]" in res.output

    def test_synthetic_flag_reports_instead_of_asserting(self, runner, tmp_path):
        path = tmp_path / "credit.csv"
        path.write_text(credit_like_csv_text(600, seed=0))
        res = runner.invoke(
            cli, ["repro", "--credit-pipeline", "--data", str(path), "--synthetic-data"]
        )
        assert res.exit_code == 0, res.output

    def test_missing_credit_file_is_an_actionable_error(self, runner, tmp_path):
        # the installed entry point formats these as "code: message"; under the
        # runner the typed error surfaces directly
        from contestkit.errors import DatasetMissingError

        res = runner.invoke(cli, ["repro", "--credit-pipeline", "--data", str(tmp_path / "x.csv")])
        assert res.exit_code != 0
        assert isinstance(res.exception, DatasetMissingError)
        assert "Statlog" in str(res.exception)

    def test_requires_at_least_one_fixture_selector(self, runner):
        res = runner.invoke(cli, ["repro"])
        assert res.exit_code != 0
        assert "--counterexample" in res.output


class TestTrain:
    def test_trains_and_persists_a_model(self, runner, tmp_path):
        data = tmp_path / "credit.csv"
        data.write_text(credit_like_csv_text(300, seed=1))
        out = tmp_path / "model.json"
        res = runner.invoke(
            cli,
            ["train", "--data", str(data), "--out", str(out), "--max-depth", "3", "--json"],
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(res.output)
        assert out.exists()
        assert 0.0 < doc["metrics"]["accuracy"] <= 1.0
        assert doc["depth"] <= 3
        assert doc["n_train"] + doc["n_test"] == 300
        saved = json.loads(out.read_text())
        assert "nodes" in saved


class TestExplain:
    def test_counterfactual_block_has_a_distance(self, runner):
        res = runner.invoke(
            cli, ["explain", "--case", "tent-002", "--kind", "counterfactual", "--json"]
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(res.output)
        assert doc["suggestion"]["distance"] > 0.0
        assert "continuity_verdict" in doc

    def test_surrogate_block_names_the_feature(self, runner):
        res = runner.invoke(cli, ["explain", "--case", "tent-002", "--kind", "surrogate", "--json"])
        doc = json.loads(res.output)
        assert "x" in doc["explanation"]["weights"]

    def test_anchor_block_renders_a_rule(self, runner):
        res = runner.invoke(cli, ["explain", "--case", "tent-002", "--kind", "anchor", "--json"])
        doc = json.loads(res.output)
        assert "x" in doc["anchor"]["rule"]
        assert doc["anchor"]["precision"] is not None

    def test_unknown_case_fails_cleanly(self, runner):
        from contestkit.errors import UnknownCaseError

        res = runner.invoke(cli, ["explain", "--case", "nope", "--kind", "anchor"])
        assert res.exit_code != 0
        assert isinstance(res.exception, UnknownCaseError)
        assert "nope" in str(res.exception)


class TestAudit:
    def test_ground_truth_case_includes_the_grid_report(self, runner):
        res = runner.invoke(cli, ["audit", "--case", "tent-005", "--json"])
        assert res.exit_code == 0, res.output
        doc = json.loads(res.output)
        assert doc["report"]["report"]["somewhere_contestable"] in (True, False)
        assert doc["multiplicity"]["estimate"]["n"] > 0


class TestMultiplicity:
    def test_resampled_bound_stays_in_range(self, runner):
        res = runner.invoke(
            cli,
            ["multiplicity", "--case", "tent-005", "--model-family", "tent", "--n", "40", "--json"],
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(res.output)
        assert doc["n"] == 40
        assert 0.0 <= doc["theta_hat"] <= 0.5
        assert doc["positive_fraction"] + doc["negative_fraction"] == pytest.approx(1.0)

    def test_family_mismatch_is_a_usage_error(self, runner):
        res = runner.invoke(
            cli, ["multiplicity", "--case", "tent-005", "--model-family", "tree"]
        )
        assert res.exit_code != 0
        assert "family" in res.output


class TestWhatIf:
    def test_in_process_query_reports_decisions_and_budget(self, runner):
        res = runner.invoke(
            cli, ["whatif", "--case", "tent-000", "--input", "0.26", "--input", "0.2", "--json"]
        )
        assert res.exit_code == 0, res.output
        doc = json.loads(res.output)
        assert [r["decision"] for r in doc["results"]] == [1, 0]
        assert doc["budget_remaining"] == 48


class TestEntryPoint:
    def test_typed_errors_are_printed_as_code_and_message(self, tmp_path):
        import subprocess
        import sys

        proc = subprocess.run(
            [
                sys.executable,
                "-c",
                "import sys; sys.argv = ['contestkit', 'repro', '--credit-pipeline', "
                f"'--data', {str(tmp_path / 'x.csv')!r}]; "
                "from contestkit.cli import main; main()",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 1
        assert proc.stderr.startswith("dataset_missing:")
        assert "never downloads data" in proc.stderr


class TestConfigAndEnv:
    def test_config_file_supplies_defaults(self, runner, tmp_path):
        cfg = tmp_path / "contestkit.cfg"
        cfg.write_text(
            "# defaults for the demo store\n"
            "multiplicity.model-family = \"tent\"\n"
            "multiplicity.n = 17\n"
        )
        res = runner.invoke(
            cli, ["--config", str(cfg), "multiplicity", "--case", "tent-005", "--json"]
        )
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["n"] == 17

    def test_flags_override_the_config_file(self, runner, tmp_path):
        cfg = tmp_path / "contestkit.cfg"
        cfg.write_text("multiplicity.model-family = \"tent\"\nmultiplicity.n = 17\n")
        res = runner.invoke(
            cli,
            ["--config", str(cfg), "multiplicity", "--case", "tent-005", "--n", "9", "--json"],
        )
        assert json.loads(res.output)["n"] == 9

    def test_environment_variables_supply_defaults(self, runner):
        res = runner.invoke(
            cli,
            ["multiplicity", "--case", "tent-005", "--model-family", "tent", "--json"],
            env={"CONTESTKIT_MULTIPLICITY_N": "11"},
            auto_envvar_prefix="CONTESTKIT",
        )
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["n"] == 11
