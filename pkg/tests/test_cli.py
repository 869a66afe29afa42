"""
Tests for the command-line interface.

Commands write their results with --out so the files can be parsed
independently of what is logged on stderr.
"""

import json

import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from src import __version__
from src.budget import rho_bound
from src.formats import canonical_dumps, load_model, load_ticket, read_document
from ticketforge import cli
from tests.conftest import fast_config


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def hopeless_config_file(tmp_path):
    """Configuration whose tolerances no pool of four can meet."""
    path = tmp_path / "hopeless.yaml"
    config = fast_config(eps=1e-9, pool=4, spare_rows=2, retries=1)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.dump(config.to_dict(), f)
    return path


@pytest.mark.integration
class TestGenTargetCommand:
    """Test gen-target."""

    def test_writes_model(self, runner, tmp_path):
        """Test that the written model has the requested shape and sparsity."""
        out = tmp_path / "target.json"

        result = runner.invoke(cli, ["gen-target", "--arch", "4,8,2", "--sparsity", "0.5",
                                     "--seed", "3", "-o", str(out)])

        assert result.exit_code == 0
        net = load_model(out)
        assert net.arch == [4, 8, 2]
        zeros = sum(int((layer.weights == 0).sum() + (layer.bias == 0).sum())
                    for layer in net.layers)
        assert zeros == 29

    def test_bad_arch(self, runner):
        """Test that a malformed architecture is a usage error."""
        result = runner.invoke(cli, ["gen-target", "--arch", "2,x"])

        assert result.exit_code == 2

    def test_version(self, runner):
        """Test the version option."""
        result = runner.invoke(cli, ["--version"])

        assert result.exit_code == 0
        assert __version__ in result.output


@pytest.mark.integration
class TestConstructCommand:
    """Test construct."""

    def test_l_plus_1(self, runner, model_file, fast_config_file, tmp_path):
        """Test an L+1 ticket written to a file."""
        out = tmp_path / "ticket.json"

        result = runner.invoke(cli, ["-c", str(fast_config_file), "construct", str(model_file),
                                     "-o", str(out)])

        assert result.exit_code == 0
        ticket = load_ticket(out)
        assert ticket.depth == 3
        assert ticket.manifest.failed == 0

    def test_mode_override(self, runner, model_file, fast_config_file, tmp_path):
        """Test that --mode overrides the configuration."""
        out = tmp_path / "ticket.json"

        result = runner.invoke(cli, ["-c", str(fast_config_file), "construct", str(model_file),
                                     "--mode", "2l", "-o", str(out)])

        assert result.exit_code == 0
        assert load_ticket(out).depth == 4

    def test_block_failure_exit_code(self, runner, model_file, hopeless_config_file, tmp_path):
        """Test exit code 2 when a block cannot be solved."""
        result = runner.invoke(cli, ["-c", str(hopeless_config_file), "construct",
                                     str(model_file), "-o", str(tmp_path / "t.json")])

        assert result.exit_code == 2

    def test_best_effort_writes_ticket(self, runner, model_file, hopeless_config_file,
                                       tmp_path):
        """Test that best effort still writes the ticket but exits 2."""
        out = tmp_path / "t.json"

        result = runner.invoke(cli, ["-c", str(hopeless_config_file), "construct",
                                     str(model_file), "--best-effort", "-o", str(out)])

        assert result.exit_code == 2
        assert load_ticket(out).manifest.failed > 0

    def test_underflow_exit_code(self, runner, model_file, tmp_path):
        """Test exit code 3 on budget underflow."""
        config = fast_config().to_dict()
        config["BOUNDS"]["UNDERFLOW"] = 0.5
        path = tmp_path / "underflow.yaml"
        path.write_text(yaml.dump(config), encoding="utf-8")

        result = runner.invoke(cli, ["-c", str(path), "construct", str(model_file)])

        assert result.exit_code == 3

    def test_malformed_model(self, runner, tmp_path):
        """Test exit code 4 for an unreadable model file."""
        bad = tmp_path / "bad.json"
        bad.write_text("{", encoding="utf-8")

        result = runner.invoke(cli, ["construct", str(bad)])

        assert result.exit_code == 4

    def test_missing_model(self, runner, tmp_path):
        """Test that a missing model is a usage error."""
        result = runner.invoke(cli, ["construct", str(tmp_path / "absent.json")])

        assert result.exit_code == 2


@pytest.mark.integration
class TestVerifyCommand:
    """Test verify."""

    def test_clean_ticket(self, runner, ticket_file, model_file, fast_config_file, tmp_path):
        """Test the JSON report of a freshly built ticket."""
        out = tmp_path / "report.json"

        result = runner.invoke(cli, ["-c", str(fast_config_file), "verify", str(ticket_file),
                                     "--model", str(model_file), "-o", str(out)])

        assert result.exit_code == 0
        report = read_document(out)
        assert report["sup_error"] <= 0.2
        assert report["samples"] == 2000
        assert report["flagged"] == []
        assert len(report["metadata"]["model_sha256"]) == 64
        assert report["metadata"]["app_version"] == __version__

    def test_csv_report(self, runner, ticket_file, model_file, tmp_path):
        """Test the single-row CSV report."""
        out = tmp_path / "report.csv"

        result = runner.invoke(cli, ["verify", str(ticket_file), "--model", str(model_file),
                                     "--samples", "300", "--format", "csv", "-o", str(out)])

        assert result.exit_code == 0
        frame = pd.read_csv(out)
        assert len(frame) == 1
        assert frame.loc[0, "blocks_failed"] == 0
        assert frame.loc[0, "flagged"] == 0

    def test_tampered_ticket(self, runner, ticket_file, tmp_path):
        """Test exit code 1 when a recorded residual was altered."""
        document = json.loads(ticket_file.read_text(encoding="utf-8"))
        document["manifest"]["records"][0]["residual"] += 0.5
        tampered = tmp_path / "tampered.json"
        tampered.write_text(canonical_dumps(document), encoding="utf-8")

        result = runner.invoke(cli, ["verify", str(tampered), "-o", str(tmp_path / "r.json")])

        assert result.exit_code == 1
        assert len(read_document(tmp_path / "r.json")["flagged"]) == 1


@pytest.mark.integration
class TestReportCommands:
    """Test budget, widths, bench-subsetsum and compare."""

    def test_budget(self, runner, model_file, tmp_path):
        """Test the budget document."""
        out = tmp_path / "budget.json"

        result = runner.invoke(cli, ["budget", str(model_file), "--eps", "0.1", "-o", str(out)])

        assert result.exit_code == 0
        document = read_document(out)
        assert len(document["eps_layers"]) == 2
        assert document["sound"] is True

    def test_budget_csv(self, runner, model_file, tmp_path):
        """Test one CSV row per target layer."""
        out = tmp_path / "budget.csv"

        result = runner.invoke(cli, ["budget", str(model_file), "--format", "csv",
                                     "-o", str(out)])

        assert result.exit_code == 0
        assert list(pd.read_csv(out)["layer"]) == [1, 2]

    def test_widths(self, runner, tmp_path):
        """Test the worst-case width report."""
        out = tmp_path / "widths.json"

        result = runner.invoke(cli, ["widths", "--arch", "4,8,2", "--eps", "0.01",
                                     "-o", str(out)])

        assert result.exit_code == 0
        document = read_document(out)
        assert document["rho"] == rho_bound(58, 0.01, 0.05, 1.0, 0.1)
        assert len(document["widths"]) == 3

    def test_bench(self, runner, tmp_path):
        """Test the Monte-Carlo table as CSV."""
        out = tmp_path / "bench.csv"

        result = runner.invoke(cli, ["bench-subsetsum", "--dist", "uniform", "--eps-grid", "0.1",
                                     "--m-grid", "4,8", "--trials", "50", "--format", "csv",
                                     "-o", str(out)])

        assert result.exit_code == 0
        frame = pd.read_csv(out)
        assert list(frame["m"]) == [4, 8]
        assert (frame["rate"] <= 1.0).all()

    def test_compare(self, runner, model_file, fast_config_file, tmp_path):
        """Test one comparison row per mode."""
        out = tmp_path / "compare.json"

        result = runner.invoke(cli, ["-c", str(fast_config_file), "compare", str(model_file),
                                     "--samples", "300", "-o", str(out)])

        assert result.exit_code == 0
        rows = read_document(out)["rows"]
        assert [row["mode"] for row in rows] == ["l+1", "2l"]
        assert [row["depth"] for row in rows] == [3, 4]


@pytest.mark.integration
class TestConfigCommands:
    """Test init-config and validate-config."""

    def test_init_and_validate(self, runner, tmp_path):
        """Test writing the defaults and validating them."""
        path = tmp_path / "config.yaml"

        written = runner.invoke(cli, ["init-config", str(path)])
        validated = runner.invoke(cli, ["validate-config", str(path)])

        assert written.exit_code == 0
        assert validated.exit_code == 0
        assert "Configuration is valid" in validated.output

    def test_refuses_overwrite(self, runner, tmp_path):
        """Test exit code 4 without --force and success with it."""
        path = tmp_path / "config.yaml"
        path.write_text("LOGGING:\n  LEVEL: INFO\n", encoding="utf-8")

        refused = runner.invoke(cli, ["init-config", str(path)])
        forced = runner.invoke(cli, ["init-config", str(path), "--force"])

        assert refused.exit_code == 4
        assert forced.exit_code == 0
        assert "CONSTRUCTION" in yaml.safe_load(path.read_text(encoding="utf-8"))

    def test_invalid_config(self, runner, tmp_path):
        """Test that validation errors exit with code 1."""
        path = tmp_path / "bad.yaml"
        path.write_text("CONSTRUCTION:\n  EPS: 2.0\n", encoding="utf-8")

        assert runner.invoke(cli, ["validate-config", str(path)]).exit_code == 1
        assert runner.invoke(cli, ["-c", str(path), "widths", "--arch", "2,1"]).exit_code == 1
