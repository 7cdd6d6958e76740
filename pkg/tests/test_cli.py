import subprocess
import sys

import pytest

from parahyp.cli import ConfigError, RunConfig, build_config, main, parse_config_file
from parahyp.storage import load_states, read_csv


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.suffix in (".csv", ".json", ".bin")}


def test_solve_writes_outputs(tmp_path):
    assert main(["solve", "--n", "128", "--T", "0.1", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    assert rows[0]["t"] == 0.0 and rows[-1]["t"] == pytest.approx(0.1)
    times, states = load_states(tmp_path / "states.bin")
    assert len(times) == len(rows) and states[0].grid.n == 128
    assert (tmp_path / "solve_config.txt").exists()


def test_solve_past_shock_exits_one(tmp_path):
    code = main(["solve", "--n", "64", "--scheme", "galerkin", "--T", "1.5",
                 "--gradient-fraction", "0.2", "--out", str(tmp_path)])
    assert code == 1
    assert read_csv(tmp_path / "trajectory.csv")[-1]["t"] < 1.0


def test_config_echo_round_trip(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["solve", "--n", "64", "--T", "0.05", "--epsilon", "0.0078125", "--out", str(a)]) == 0
    echoed = parse_config_file(a / "solve_config.txt")
    echoed["out"] = str(b)
    cfg_file = tmp_path / "again.txt"
    cfg_file.write_text("".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n" for k, v in echoed.items()))
    assert main(["solve", "--config", str(cfg_file)]) == 0
    assert _files(a) == _files(b)


def test_flags_override_file(tmp_path):
    f = tmp_path / "c.txt"
    f.write_text("# comment\nn = 32\nT = 0.2  # trailing\n")
    cfg = build_config("solve", {**parse_config_file(f), "n": 64})
    assert cfg.n == 64 and cfg.T == 0.2


def test_experiment_defaults_below_flags():
    cfg = build_config("experiment", {"experiment": "continuation", "T": 0.7})
    assert cfg.scheme == "galerkin" and cfg.T == 0.7 and cfg.gradient_fraction == 0.2


@pytest.mark.parametrize(
    "text, fragment",
    [("n = abc\n", ":1: field 'n'"), ("\nbogus = 1\n", ":2: unknown field 'bogus'"), ("just words\n", ":1: expected")],
)
def test_bad_config_diagnostics(tmp_path, text, fragment):
    f = tmp_path / "bad.txt"
    f.write_text(text)
    with pytest.raises(ConfigError, match=fragment.replace("'", ".")):
        parse_config_file(f)
    assert main(["solve", "--config", str(f), "--out", str(tmp_path)]) == 2


def test_bad_values_exit_two(tmp_path, capsys):
    assert main(["solve", "--n", "7", "--out", str(tmp_path)]) == 2
    assert main(["solve", "--system", "burgers2d", "--dim", "1", "--out", str(tmp_path)]) == 2
    assert main(["solve", "--delta", "1.5", "--out", str(tmp_path)]) == 2
    assert main(["solve", "--scheme", "nonsense"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_envelope_command(tmp_path):
    assert main(["solve", "--n", "128", "--T", "0.05", "--out", str(tmp_path), "--emit-plotscript"]) == 0
    assert (tmp_path / "trajectory.plot.py").exists()
    assert main(["envelope", "--input", str(tmp_path / "states.bin"), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "envelope.csv")
    assert all(r["a_k"] <= r["c_k"] for r in rows)
    assert main(["envelope", "--input", str(tmp_path / "trajectory.csv"), "--out", str(tmp_path)]) == 2


def test_experiment_byte_identical(tmp_path):
    args = ["experiment", "continuous_dependence", "--n", "64", "--T", "0.05", "--seed", "42"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "parahyp", "solve", "--n", "0"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_runconfig_echo_skips_none():
    assert "inner_dt" not in RunConfig().echo()


def test_coarse_grid_for_epsilon_exits_two(tmp_path):
    assert main(["solve", "--n", "64", "--out", str(tmp_path)]) == 2
