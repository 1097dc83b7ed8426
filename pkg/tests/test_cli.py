"""Command-line behavior: exit codes, output formats, config precedence."""

import pytest

from estcomm.cli import load_config_file, main
from estcomm.errors import InputValidationError
from estcomm.harness import read_csv


class TestRun:
    def test_eq_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "eq.csv"
        code = main(["run", "--protocol", "eq", "--n", "12",
                     "--epsilon", "0.05", "--trials", "100", "--seed", "7",
                     "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert printed.startswith("protocol=eq family=eq trials=100 ")
        assert "failure_rate=" in printed and "median_bits=" in printed
        records = read_csv(out)
        assert len(records) == 100
        assert all(r.n == 4096 for r in records)

    def test_family_defaults_per_protocol(self, capsys):
        assert main(["run", "--protocol", "gt", "--k", "32",
                     "--epsilon", "0.2", "--trials", "3"]) == 0
        assert "family=gt" in capsys.readouterr().out

    def test_family_required_when_no_default(self, capsys):
        code = main(["run", "--protocol", "sampling", "--epsilon", "0.2"])
        assert code == 2
        assert "--family is required" in capsys.readouterr().err

    def test_protocol_required(self, capsys):
        assert main(["run", "--epsilon", "0.1"]) == 2
        assert "--protocol" in capsys.readouterr().err

    def test_epsilon_required(self, capsys):
        assert main(["run", "--protocol", "eq", "--n", "4"]) == 2
        assert "--epsilon" in capsys.readouterr().err

    def test_validation_maps_to_exit_2(self, capsys):
        code = main(["run", "--protocol", "eq", "--n", "4",
                     "--epsilon", "2.0"])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--protocol", "eq", "--frobnicate"])
        assert exc.value.code == 2

    def test_deterministic_output_files(self, tmp_path):
        args = ["run", "--protocol", "gt", "--k", "64", "--epsilon", "0.1",
                "--trials", "5", "--seed", "3"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestSweep:
    def test_prints_slope_line(self, capsys):
        code = main(["sweep", "--protocol", "gt", "--k", "256",
                     "--epsilon", "0.2", "--epsilon", "0.1",
                     "--epsilon", "0.05", "--trials", "5", "--seed", "1"])
        assert code == 0
        out = capsys.readouterr().out.strip()
        assert out.startswith("slope=")
        slope = float(out.split()[0].split("=")[1])
        r2 = float(out.split()[1].split("=")[1])
        assert 0.0 < slope < 2.0
        assert 0.0 <= r2 <= 1.0

    def test_needs_three_epsilons(self, capsys):
        code = main(["sweep", "--protocol", "gt", "--k", "32",
                     "--epsilon", "0.2", "--epsilon", "0.1"])
        assert code == 2
        assert "3 distinct" in capsys.readouterr().err

    def test_duplicate_epsilons_collapse(self, capsys):
        code = main(["sweep", "--protocol", "gt", "--k", "32",
                     "--epsilon", "0.2", "--epsilon", "0.2",
                     "--epsilon", "0.1"])
        assert code == 2


class TestDiag:
    def test_lambda_identity_table(self, capsys):
        assert main(["diag", "lambda", "--family", "identity",
                     "--k", "16"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "t lam margin"
        assert len(lines) == 17
        for t, line in enumerate(lines[1:], start=1):
            cols = line.split()
            assert int(cols[0]) == t
            assert float(cols[1]) == pytest.approx(t, abs=1e-9)

    def test_discrepancy_ip(self, capsys):
        assert main(["diag", "discrepancy", "--family", "ip", "--n", "2"]) == 0
        out = capsys.readouterr().out
        value = float(out.split()[0].split("=")[1])
        assert value <= 0.5 + 1e-12

    def test_distance_inverse(self, capsys):
        assert main(["diag", "distance-inverse", "--k", "16"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("residual=")
        residual = float(out.split()[0].split("=")[1])
        assert residual <= 1e-9

    def test_svd_summary_line(self, capsys):
        assert main(["diag", "svd", "--family", "hadamard", "--k", "8"]) == 0
        out = capsys.readouterr().out
        assert "rank=8" in out
        assert "spectral_norm=" in out

    def test_missing_family_is_exit_2(self, capsys):
        assert main(["diag", "svd"]) == 2

    def test_bad_target_rejected_by_parser(self):
        with pytest.raises(SystemExit) as exc:
            main(["diag", "sideways"])
        assert exc.value.code == 2


class TestConfigFile:
    def test_parse_and_comments(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# sweep defaults\nprotocol = gt\nk=32  # domain\n"
                       "\nepsilon = 0.2, 0.1\n")
        parsed = load_config_file(str(cfg))
        assert parsed == {"protocol": "gt", "k": "32", "epsilon": "0.2, 0.1"}

    def test_malformed_line_names_position(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("protocol=gt\njust words\n")
        with pytest.raises(InputValidationError, match="bad.cfg:2"):
            load_config_file(str(cfg))

    def test_flags_beat_file_values(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("protocol=gt\nk=32\nepsilon=0.2\ntrials=5\nseed=4\n")
        code = main(["run", "--config", str(cfg), "--trials", "2"])
        assert code == 0
        assert "trials=2 " in capsys.readouterr().out

    def test_file_fills_missing_flags(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("protocol=gt\nk=32\nepsilon=0.2\ntrials=3\n")
        assert main(["run", "--config", str(cfg)]) == 0
        assert "trials=3 " in capsys.readouterr().out

    def test_unknown_keys_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("protocol=gt\nwibble=1\n")
        assert main(["run", "--config", str(cfg)]) == 2
        assert "wibble" in capsys.readouterr().err

    def test_non_numeric_value_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("protocol=gt\nk=lots\nepsilon=0.2\n")
        assert main(["run", "--config", str(cfg)]) == 2
        assert "k=" in capsys.readouterr().err

    def test_missing_file_is_exit_2(self, capsys):
        assert main(["run", "--config", "/nonexistent.cfg",
                     "--protocol", "eq", "--epsilon", "0.1"]) == 2
