"""
Tests for the command-line front end.

Each command is driven through main() with an argv list; reports are read
back from stdout or from --out files.
"""

import json

import pandas as pd
import pytest

from gbcurv import main as cli
from gbcurv.errors import DegenerateImmersionError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


class TestParser:
    """Test argument parsing and usage errors."""

    def test_missing_command(self, capsys):
        """No subcommand is a usage error."""
        code, _ = run(capsys)
        assert code == 2

    def test_help_exits_zero(self, capsys):
        """--help exits cleanly."""
        code = cli.main(["--help"])
        assert code == 0

    def test_config_from_args(self):
        """Immersion tokens split into name and parameters."""
        args = cli.build_parser().parse_args(
            ["minimality", "--immersion", "flat_torus", "r1=1,r2=2", "--k", "1"]
        )
        config = cli.config_from_args(args)
        assert config.immersion == "flat_torus"
        assert config.params == {"r1": 1, "r2": 2}
        assert config.k == 1


class TestIdentitiesCommand:
    """Test gbcurv identities."""

    def test_empty_range(self, capsys):
        """--n-max 0 is rejected."""
        code, _ = run(capsys, "identities", "--n-max", "0")
        assert code == 2

    def test_small_run(self, capsys):
        """A passing suite exits 0."""
        code, document = run(
            capsys,
            "identities",
            "--n-max",
            "3",
            "--trials",
            "1",
            "--only",
            "double_star",
            "--deterministic",
        )
        assert code == 0
        assert document["passed"]
        assert [r["n"] for r in document["results"]] == [2, 3]

    def test_n_max_one(self, capsys):
        """--n-max 1 alone runs the n = 1 suite."""
        code, document = run(
            capsys,
            "identities",
            "--n-max",
            "1",
            "--trials",
            "2",
            "--only",
            "double_star",
            "--deterministic",
        )
        assert code == 0
        assert document["config"]["n_min"] == 1
        assert [r["n"] for r in document["results"]] == [1]

    def test_explicit_n_min_kept(self):
        """An explicit --n-min above --n-max is still rejected."""
        args = cli.build_parser().parse_args(["identities", "--n-min", "3", "--n-max", "2"])
        with pytest.raises(ValueError, match="empty"):
            cli.config_from_args(args)

    def test_default_n_min(self):
        """Without --n-min the range starts at 2."""
        args = cli.build_parser().parse_args(["identities", "--n-max", "5"])
        assert cli.config_from_args(args).n_min == 2


class TestSymmCommand:
    """Test gbcurv symm."""

    def test_diagonal(self, capsys):
        """diag(1, 2, 3): s_1 = 6, t_1 = diag(5, 4, 3)."""
        code, document = run(capsys, "symm", "--B", "[[1,0,0],[0,2,0],[0,0,3]]", "--k", "1")
        assert code == 0
        assert document["s_k"] == pytest.approx(6.0)
        assert document["s"] == pytest.approx([1.0, 6.0, 11.0, 6.0])
        assert document["t_k"] == [[5.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 3.0]]

    def test_exact(self, capsys):
        """--exact writes rationals."""
        code, document = run(capsys, "symm", "--B", "[[0.5,0],[0,1]]", "--k", "2", "--exact")
        assert code == 0
        assert document["s_k"] == "1/2"

    def test_not_symmetric(self, capsys):
        """Asymmetric matrices are usage errors."""
        code, _ = run(capsys, "symm", "--B", "[[1,2],[0,1]]", "--k", "1")
        assert code == 2

    def test_k_too_large(self, capsys):
        """k > n is a usage error."""
        code, _ = run(capsys, "symm", "--B", "[[1]]", "--k", "2")
        assert code == 2

    def test_bad_json(self, capsys):
        """Unparseable matrices are usage errors."""
        code, _ = run(capsys, "symm", "--B", "[[1,", "--k", "1")
        assert code == 2


class TestCheckCommands:
    """Test the immersion checks."""

    def test_unknown_immersion(self, capsys):
        """Unknown catalog names are usage errors."""
        code, _ = run(capsys, "minimality", "--immersion", "moebius_band", "--k", "1")
        assert code == 2

    def test_flat_torus_minimality(self, capsys):
        """The flat torus is 2-minimal."""
        code, document = run(
            capsys, "minimality", "--immersion", "flat_torus", "--k", "1", "--grid", "4"
        )
        assert code == 0
        assert document["verdict"] == "minimal"
        assert document["config"]["immersion"] == "flat_torus"

    def test_not_minimal_still_exits_zero(self, capsys):
        """A negative verdict is a result, not a failure."""
        code, document = run(
            capsys, "minimality", "--immersion", "round_sphere", "--k", "0", "--grid", "3"
        )
        assert code == 0
        assert document["verdict"] == "not-minimal"

    def test_s3_at_default_grid(self, capsys):
        """Nodes near the polar axes of S^3 do not stop the sweep."""
        code, document = run(
            capsys, "minimality", "--immersion", "round_sphere", "n=3", "r=1", "--k", "1"
        )
        assert code == 0
        assert document["verdict"] == "not-minimal"
        assert document["max_residual"] == pytest.approx(3.0)
        assert len(document["samples"]) == 2048

    def test_deterministic_output_is_reproducible(self, capsys):
        """Two --deterministic runs print the same bytes."""
        argv = [
            "invariants",
            "--immersion",
            "round_sphere",
            "n=3",
            "--k",
            "1",
            "--grid",
            "4",
            "--deterministic",
        ]
        outputs = []
        for _ in range(2):
            assert cli.main(argv) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]
        assert "timings" not in json.loads(outputs[0])

    def test_catenoid_harmonicity(self, capsys):
        """Catenoid coordinates are harmonic."""
        code, document = run(
            capsys, "harmonicity", "--immersion", "catenoid", "--k", "0", "--grid", "4"
        )
        assert code == 0
        assert document["verdict"] == "harmonic"

    def test_degenerate_immersion(self, capsys, monkeypatch):
        """A degenerate immersion exits 1."""

        def degenerate(*args, **kwargs):
            raise DegenerateImmersionError([0.0, 0.0], 0.0)

        monkeypatch.setattr(cli, "minimality_residual", degenerate)
        code, _ = run(capsys, "minimality", "--immersion", "round_sphere", "--k", "0")
        assert code == 1

    def test_fd_step_on_file_rejected(self, capsys, tmp_path):
        """--fd-step needs a symbolic chart."""
        from gbcurv.charts import build_chart, sample_chart_on_grid

        path = tmp_path / "torus.json"
        grid = sample_chart_on_grid(build_chart("flat_torus"), (8, 8))
        path.write_text(json.dumps(grid.to_dict()))
        code, _ = run(
            capsys, "minimality", "--immersion", str(path), "--k", "1", "--fd-step", "1e-3"
        )
        assert code == 2

    def test_out_and_table(self, capsys, tmp_path):
        """--out writes the report and --table a CSV."""
        out, table = tmp_path / "report.json", tmp_path / "table.csv"
        code, printed = run(
            capsys,
            "invariants",
            "--immersion",
            "flat_torus",
            "--k",
            "1",
            "--grid",
            "2",
            "--deterministic",
            "--out",
            str(out),
            "--table",
            str(table),
        )
        assert code == 0
        assert printed is None
        document = json.loads(out.read_text())
        assert document["check"] == "invariants"
        assert len(document["samples"]) == 4
        frame = pd.read_csv(table)
        assert len(frame) == 4 * 2


class TestVariationCommand:
    """Test gbcurv variation."""

    def test_tangent_flow(self, capsys):
        """Tangent variations leave H_0 unchanged."""
        code, document = run(
            capsys,
            "variation",
            "--immersion",
            "round_sphere",
            "--k",
            "0",
            "--field",
            "tangent",
            "--grid",
            "8",
            "--deterministic",
        )
        assert code == 0
        assert document["passed"]
        assert document["field"] == "tangent"

    def test_unknown_field(self, capsys):
        """argparse rejects unknown fields."""
        code, _ = run(capsys, "variation", "--immersion", "round_sphere", "--field", "shear")
        assert code == 2
