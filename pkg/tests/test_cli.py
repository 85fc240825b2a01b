import json
import subprocess
import sys

import pytest

from gtp import analytic, cli, sweep


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def gtp(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "gtp", *argv], capture_output=True, env=env)


class TestParsing:
    @pytest.mark.parametrize(
        "value, expected",
        [("0.5", 0.5), (0.5, 0.5), ("1:0", 1), ([1, 3.141592653589793], -1), ("0.5:1.5707963267948966", 0.5j)],
    )
    def test_param(self, value, expected):
        assert cli.parse_param(value) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("value", ["x", "1:2:3", [1, 2, 3], True, [-0.5, 0]])
    def test_bad_param(self, value):
        with pytest.raises(cli.ConfigError):
            cli.parse_param(value)

    def test_acceptance_forms(self):
        assert len(cli.parse_acceptance("pqt", 2)) == 4
        assert len(cli.parse_acceptance("Phi+;Psi-", 1)) == 2
        assert len(cli.parse_acceptance('["Phi+,Phi-"]', 2)) == 1
        with pytest.raises(cli.ConfigError):
            cli.parse_acceptance("[]", 1)

    def test_input_forms(self):
        assert cli.parse_input("haar", 1) == "haar"
        assert list(cli.parse_input("ket:01", 2)) == [0, 1, 0, 0]
        assert cli.parse_input("[1, 1]", 1)[0] == pytest.approx(2**-0.5)
        with pytest.raises(cli.ConfigError):
            cli.parse_input("ket:0", 2)

    def test_phase_forms(self):
        (table,) = cli.parse_phases("[[0, 0.1, 0.2, 0.3]]", [1], [1])
        assert list(table.values()) == [0, 0.1, 0.2, 0.3]
        with pytest.raises(cli.ConfigError):
            cli.parse_phases("[[0, 1]]", [1], [1])


class TestRun:
    def test_state_mode(self, capsys):
        code, out, _ = run(capsys, "run", "--n", "0.5", "--m", "1", "--input", "ket:0")
        assert code == 0
        doc = json.loads(out)
        assert doc["params"]["mode"] == "state"
        probs = [row["probability"] for row in doc["per_outcome"]]
        assert probs == pytest.approx([0.4, 0.4, 0.1, 0.1], abs=1e-12)
        assert doc["p_suc"] == pytest.approx(1) and doc["f_pro"] == pytest.approx(1)

    def test_exact_mode_matches_closed_form(self, capsys):
        code, out, _ = run(capsys, "run", "--n", "0.3", "--m", "0.7", "--exact")
        doc = json.loads(out)
        assert code == 0 and doc["params"]["mode"] == "exact"
        assert doc["c_pro"]["mean"] == pytest.approx(analytic.c_pro_concurrence(0.3, 0.7), abs=1e-12)
        assert doc["c_pro"]["std_error"] == 0 and doc["c_pro"]["samples"] is None

    def test_monte_carlo_mode(self, capsys):
        code, out, _ = run(capsys, "run", "--n", "0.5", "--m", "0.5", "--acceptance", "pqt", "--samples", "4000")
        doc = json.loads(out)
        assert code == 0 and doc["params"]["mode"] == "monte_carlo"
        c = doc["c_pro"]
        assert abs(c["mean"] - analytic.c_pqt(0.5)) < 4 * c["std_error"] + 1e-12
        assert doc["f_pro"]["mean"] == pytest.approx(1, abs=1e-12)

    def test_two_qubits(self, capsys):
        code, out, _ = run(capsys, "run", "--n", "0.5", "0.5", "--m", "0.5", "0.5", "--acceptance", "pqt",
                           "--input", "ket:10")
        doc = json.loads(out)
        assert code == 0 and doc["p_suc"] == pytest.approx(0.1024, abs=1e-12)
        assert len(doc["per_outcome"]) == 16

    def test_config_file_and_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": 0.5, "m": 1.0, "input": "ket:0", "acceptance": ["Phi+"]}))
        code, out, _ = run(capsys, "run", "--config", str(cfg))
        assert code == 0 and json.loads(out)["p_suc"] == pytest.approx(0.4)
        code, out, _ = run(capsys, "run", "--config", str(cfg), "--acceptance", "Psi+")
        assert code == 0 and json.loads(out)["p_suc"] == pytest.approx(0.1)

    def test_complex_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(json.dumps({"n": [[1.0, 1.0]], "m": [1.0], "phases": "optimal", "input": [[0.6, 0], [0, 0.8]]}))
        code, out, _ = run(capsys, "run", "--config", str(cfg))
        doc = json.loads(out)
        assert code == 0 and doc["f_pro"] == pytest.approx(1, abs=1e-12)

    def test_seed_env(self, capsys, monkeypatch):
        monkeypatch.setenv("GTP_SEED", "77")
        _, a, _ = run(capsys, "run", "--n", "0.4", "--samples", "500")
        _, b, _ = run(capsys, "run", "--n", "0.4", "--samples", "500", "--seed", "77")
        _, c, _ = run(capsys, "run", "--n", "0.4", "--samples", "500", "--seed", "78")
        assert json.loads(a)["params"]["seed"] == 77
        assert a == b and a != c

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        code, out, _ = run(capsys, "run", "--n", "1", "--input", "ket:0", "--out", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["c_pro"] == pytest.approx(1)

    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--n", "1.5"],
            ["run", "--n", "0.5", "--m", "0.5", "0.5"],
            ["run"],
            ["run", "--n", "0.5", "--config", "/nonexistent.json"],
            ["run", "--n", "0.5", "--acceptance", "Chi+"],
            ["run", "--n", "0.5", "--samples", "5"],
        ],
    )
    def test_config_errors_exit_2(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2 and "error" in err

    def test_bad_seed_env(self, capsys, monkeypatch):
        monkeypatch.setenv("GTP_SEED", "abc")
        code, _, _ = run(capsys, "run", "--n", "0.5", "--samples", "500")
        assert code == 2


class TestSweepCommand:
    def test_default_matches_library(self, capsys):
        code, out, err = run(capsys, "sweep")
        assert code == 0
        assert out == sweep.render_csv(sweep.sweep_rows(sweep.SweepSpec())[0])
        assert err.count("warning") == 1

    def test_custom_grid(self, capsys):
        code, out, err = run(capsys, "sweep", "--n-grid", "0.5,0.5,0.1", "--delta-grid", "0,0,0.1")
        assert code == 0 and err == ""
        assert out.splitlines()[1] == "0.500000,0.000000,1.000000,0.320000,0.320000"

    def test_negative_delta_start(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n-grid", "0.5,0.5,0.1", "--delta-grid=-0.1,0,0.1")
        assert code == 0 and out.splitlines()[1].startswith("0.500000,-0.100000,")

    @pytest.mark.parametrize("grid", ["0.5,0.5", "a,b,c", "0,1,0.5"])
    def test_bad_grid(self, capsys, grid):
        code, _, _ = run(capsys, "sweep", "--n-grid", grid)
        assert code == 2


class TestOptimizeCommand:
    def test_single(self, capsys):
        code, out, _ = run(capsys, "optimize", "--n", "0.5")
        doc = json.loads(out)
        assert code == 0
        assert doc["c_channel"] == pytest.approx(doc["expected_c_channel"], abs=1e-12)
        assert doc["m_star"] == pytest.approx([1.0])
        assert doc["degenerate_maximizer"] is False

    def test_two_channels_flag(self, capsys):
        code, out, _ = run(capsys, "optimize", "--n", "0.5", "--n2", "0.8")
        doc = json.loads(out)
        assert code == 0 and doc["n"] == [0.5, 0.8]

    def test_too_many(self, capsys):
        code, _, _ = run(capsys, "optimize", "--n", "0.5", "0.5", "0.5", "--n2", "0.5")
        assert code == 2


class TestVerifyCommand:
    def test_subset_passes(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "1,2,5")
        assert code == 0
        lines = out.splitlines()
        assert [ln[:4] for ln in lines[:3]] == ["PASS"] * 3
        assert lines[-1] == "3/3 criteria passed"

    def test_json(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "2", "--json")
        doc = json.loads(out)
        assert code == 0 and doc["passed"] and doc["criteria"][0]["criterion"] == 2

    def test_failure_exits_1(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "1,2", "--tolerance-scale", "-1")
        assert code == 1 and "FAIL" in out

    @pytest.mark.parametrize("argv", [["--only", "13"], ["--only", "x"], ["--samples", "10"]])
    def test_config_errors(self, capsys, argv):
        code, _, _ = run(capsys, "verify", *argv)
        assert code == 2

    def test_small_samples_warn(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "11", "--samples", "500")
        assert code == 0 and "WARN" in out


def test_module_entry_point():
    res = gtp("sweep", "--n-grid", "0.5,0.5,0.1", "--delta-grid", "0,0,0.1")
    assert res.returncode == 0
    assert res.stdout.decode().startswith(sweep.HEADER)
    assert gtp("run", "--n", "2").returncode == 2
