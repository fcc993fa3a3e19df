import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from groundbem.cli import main


def run_cli(*args):
    return main(list(args))


def test_help_lists_commands(capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli("--help")
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for cmd in ("kernel", "mesh", "solve", "experiment"):
        assert cmd in out


def test_subcommand_help(capsys):
    for cmd in ("kernel", "mesh", "solve", "experiment"):
        with pytest.raises(SystemExit) as exc:
            run_cli(cmd, "--help")
        assert exc.value.code == 0
        assert capsys.readouterr().out


def test_kernel_plane_point_is_zero(capsys):
    assert run_cli("kernel", "--y", "0,0,0", "--x", "0.2,0,0.3", "--r", "1") == 0
    assert float(capsys.readouterr().out.strip()) == 0.0


def test_kernel_paths_agree(capsys):
    args = ("--y", "0.2,0.1,0.25", "--x", "0.1,-0.2,0.3", "--r", "1", "--p", "16")
    assert run_cli("kernel", *args, "--path", "series") == 0
    series = float(capsys.readouterr().out.strip())
    assert run_cli("kernel", *args, "--path", "integral") == 0
    integral = float(capsys.readouterr().out.strip())
    assert series == pytest.approx(integral, rel=(0.41) ** 16 * 50)


def test_kernel_neumann_duality(capsys):
    assert run_cli("kernel", "--y", "0.2,0.1,0.25", "--x", "0.1,-0.2,0.3",
                   "--neumann", "--path", "integral") == 0
    kn = float(capsys.readouterr().out.strip())
    assert run_cli("kernel", "--y", "0.1,-0.2,0.3", "--x", "0.2,0.1,0.25",
                   "--path", "integral") == 0
    kd = float(capsys.readouterr().out.strip())
    assert kn == -kd


def test_malformed_coordinates_exit_usage():
    assert run_cli("kernel", "--y", "nope", "--x", "0,0,0.3") == 1
    assert run_cli("kernel", "--y", "0,0", "--x", "0,0,0.3") == 1


def test_numeric_failure_exit_code():
    # series path outside the convergence ball is a numeric/domain failure
    assert run_cli("kernel", "--y", "0,0,0.5", "--x", "0,0,1.5", "--r", "1",
                   "--path", "series") == 2


def test_missing_mesh_file_is_usage_error(tmp_path):
    assert run_cli("solve", "--mesh", str(tmp_path / "none.mesh"),
                   "--source", "0,0,2") == 1


def test_mesh_solve_round_trip(tmp_path, capsys):
    mesh_path = str(tmp_path / "dip.mesh")
    assert run_cli("mesh", "--kind", "dip", "--re", "1.124", "--edge", "0.3",
                   "--out", mesh_path) == 0
    capsys.readouterr()
    prefix = str(tmp_path / "run")
    assert run_cli("solve", "--mesh", mesh_path, "--source", "0,0,0.5",
                   "--eps", "1e-3", "--out-prefix", prefix) == 0
    capsys.readouterr()
    meta = json.loads((tmp_path / "run_solution.json").read_text())
    # the Fig-8-style configuration: extension ratio 1.124 inferred from tags
    assert meta["re"] == pytest.approx(1.124, rel=1e-12)
    assert meta["r0"] == pytest.approx(1.0, rel=1e-12)
    assert meta["use_ground_kernel"] is True
    assert meta["p"] == math.ceil(math.log(1e-3) / math.log(1.0 / 1.124))
    sigma_lines = (tmp_path / "run_sigma.csv").read_text().splitlines()
    assert sigma_lines[0] == "x,y,z,area,tag,sigma"
    assert len(sigma_lines) == 1 + meta["panels"]


def test_solve_without_extension_drops_kernel(tmp_path, capsys):
    mesh_path = str(tmp_path / "disc.mesh")
    assert run_cli("mesh", "--kind", "disc", "--radius", "2.0", "--edge", "0.35",
                   "--out", mesh_path) == 0
    prefix = str(tmp_path / "d")
    assert run_cli("solve", "--mesh", mesh_path, "--source", "0,0,0.5",
                   "--out-prefix", prefix) == 0
    capsys.readouterr()
    meta = json.loads((tmp_path / "d_solution.json").read_text())
    assert meta["use_ground_kernel"] is False


def test_experiment_accuracy_map_deterministic_csv(tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ("experiment", "accuracy-map", "--ratios", "2.5", "--p-values", "4,6",
            "--seed", "11")
    assert run_cli(*args, "--out", str(out1)) == 0
    assert run_cli(*args, "--out", str(out2)) == 0
    capsys.readouterr()
    c1 = (out1 / "accuracy_map_seed11_table.csv").read_bytes()
    c2 = (out2 / "accuracy_map_seed11_table.csv").read_bytes()
    assert c1 == c2
    rows = c1.decode().splitlines()
    assert rows[0] == "ratio,p,eps2"
    assert len(rows) == 3


def test_experiment_bump_tiny(tmp_path, capsys):
    assert run_cli("experiment", "bump", "--h", "2", "--eps", "1e-3",
                   "--edge", "0.4", "--delta", "0.3", "--out", str(tmp_path)) == 0
    out = capsys.readouterr().out
    payload = json.loads((tmp_path / "bump_seed0.json").read_text())
    assert payload["eps2_inf"] < payload["eps2_truncated"]
    assert "bump_seed0_fields.csv" in out or (tmp_path / "bump_seed0_fields.csv").exists()


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "groundbem.cli", "kernel",
         "--y", "0,0,0", "--x", "0.2,0,0.3"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert float(proc.stdout.strip()) == 0.0


def test_outdir_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("GROUNDBEM_OUTDIR", str(tmp_path))
    args = ("experiment", "accuracy-map", "--ratios", "2.5", "--p-values", "4",
            "--seed", "1")
    assert run_cli(*args) == 0
    capsys.readouterr()
    assert (tmp_path / "accuracy_map_seed1_table.csv").exists()
