import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from landautrace.cli import (
    EXIT_ASSERT,
    EXIT_CONFIG,
    EXIT_NOCONV,
    EXIT_OK,
    ConfigError,
    main,
    parse_config_text,
)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestConfigParsing:
    def test_key_value_and_comments(self):
        cfg = parse_config_text("model = landau\n# note\nparams.c_b = 0.4\n")
        assert cfg["model"][0] == "landau"
        assert cfg["params.c_b"][0] == "0.4"

    def test_line_precise_error(self):
        with pytest.raises(ConfigError) as err:
            parse_config_text("model = landau\nbogus line\n", source="run.cfg")
        assert "run.cfg:2" in str(err.value)

    def test_bad_value_reports_location(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\nnmax = many\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        assert rc == EXIT_CONFIG

    def test_unknown_model_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = hydrogen\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        assert rc == EXIT_CONFIG

    def test_env_override(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\nnmax = 10\n")
        monkeypatch.setenv("LANDAU_NMAX", "not-an-int")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        assert rc == EXIT_CONFIG

    def test_level_sign_validation(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = jaynes_cummings\nlevels = 2\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "invariants"])
        assert rc == EXIT_CONFIG


class TestSpectrum:
    def test_landau_rows(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\njmax = 5\nnmax = 16\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        assert rc == EXIT_OK
        rows = read_csv(tmp_path / "spectrum.csv")
        assert rows[0] == ["label", "closed_form", "diagonalized", "abs_diff"]
        assert len(rows) == 7
        values = [float(r[1]) for r in rows[1:]]
        assert values == pytest.approx([j + 0.5 for j in range(6)])
        assert all(float(r[3]) <= 1e-8 for r in rows[1:])

    def test_jc_rows_match_closed_form(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = jaynes_cummings\nparams.c_b = 1.0\njmax = 3\nnmax = 24\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        assert rc == EXIT_OK
        rows = read_csv(tmp_path / "spectrum.csv")
        assert all(float(r[3]) <= 1e-8 for r in rows[1:])
        labels = [r[0] for r in rows[1:]]
        assert "E_1-" in labels and "E_1+" in labels and "E_0" in labels

    def test_empty_level_table(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\njmax = -1\nnmax = 10\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        assert rc == EXIT_CONFIG  # negative jmax is a config error
        cfg.write_text("model = landau\njmax = 0\nnmax = 10\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        rows = read_csv(tmp_path / "spectrum.csv")
        assert len(rows) == 2  # header + single level

    def test_gap_file(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\njmax = 2\nnmax = 16\n")
        main(["--config", str(cfg), "--out", str(tmp_path), "spectrum"])
        gaps = read_csv(tmp_path / "gaps.csv")
        assert gaps[0] == ["lower", "upper", "width"]
        widths = [float(r[2]) for r in gaps[1:]]
        assert all(w == pytest.approx(1.0, abs=1e-8) for w in widths[:3])


class TestInvariants:
    def test_landau_level_zero(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\nlevels = 0\nnmax = 60\n")
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "invariants"])
        assert rc == EXIT_OK
        data = json.loads((tmp_path / "invariants.json").read_text())
        assert data[0]["rank"]["rounded"] == 1
        assert data[0]["chern"]["rounded"] == 1
        assert data[0]["rank"]["certified"] and data[0]["chern"]["certified"]

    def test_jc_level(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "model = jaynes_cummings\nparams.c_b = 0.3\nlevels = 2-\nnmax = 60\n"
        )
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "invariants"])
        assert rc == EXIT_OK
        data = json.loads((tmp_path / "invariants.json").read_text())
        assert data[0]["level"] == "2-"
        assert data[0]["rank"]["rounded"] == 1
        assert data[0]["chern"]["rounded"] == 1

    def test_quaternionic_no_gap_exit(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "model = quaternionic\nparams.c_b = 0\nparams.r0 = 0\nparams.r1 = 1\n"
            "params.r2 = 0\nfermi_energy = 0.5\nnmax = 40\n"
        )
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "invariants"])
        assert rc == EXIT_NOCONV
        data = json.loads((tmp_path / "invariants.json").read_text())
        assert data["error"] == "no-gap"

    def test_quaternionic_certified_gap(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "model = quaternionic\nparams.c_b = 0\nparams.r0 = 0\nparams.r1 = 1\n"
            "params.r2 = 0\nfermi_energy = 1.0\nnmax = 60\n"
        )
        rc = main(["--config", str(cfg), "--out", str(tmp_path), "invariants"])
        assert rc == EXIT_OK
        data = json.loads((tmp_path / "invariants.json").read_text())
        assert data[0]["rank"]["rounded"] == 2
        assert data[0]["chern"]["rounded"] == 2
        assert data[0]["parity_ok"]

    def test_determinism(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("model = landau\nlevels = 0,1\nnmax = 40\n")
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["--config", str(cfg), "--out", str(out1), "invariants"])
        main(["--config", str(cfg), "--out", str(out2), "invariants"])
        assert (out1 / "invariants.json").read_bytes() == (out2 / "invariants.json").read_bytes()


class TestVerify:
    def test_single_cheap_checks_pass(self, tmp_path):
        for name in ("commutators", "kernels", "zeta_closed_forms", "dixmier"):
            rc = main(["--check", name, "--out", str(tmp_path), "--nmax", "16", "verify"])
            assert rc == EXIT_OK, name
        rows = read_csv(tmp_path / "verify.csv")
        assert rows[0] == ["check", "residual", "tolerance", "status"]

    def test_tightened_tolerance_fails(self, tmp_path):
        rc = main([
            "--check", "dixmier", "--tol", "1e-15", "--out", str(tmp_path),
            "--nmax", "16", "verify",
        ])
        assert rc == EXIT_ASSERT
        rows = read_csv(tmp_path / "verify.csv")
        assert rows[1][3] == "FAIL"

    def test_unknown_check_rejected(self, tmp_path):
        rc = main(["--check", "nonsense", "--out", str(tmp_path), "verify"])
        assert rc == EXIT_CONFIG

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "landautrace.cli", "--check", "kernels",
             "--out", str(tmp_path), "verify"],
            capture_output=True, text=True,
        )
        assert proc.returncode == EXIT_OK
        assert "kernels" in proc.stdout
