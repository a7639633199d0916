import json

import numpy as np
import pytest

from boussym import cli


def run(tmp_path, command, config=None, seed=None):
    args = [command, "--out", str(tmp_path / "out")]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    if seed is not None:
        args += ["--seed", str(seed)]
    return cli.main(args)


def load(tmp_path, name):
    return json.loads((tmp_path / "out" / name).read_text())


def test_print_config_lists_defaults(capsys):
    assert cli.main(["--print-config"]) == 0
    shown = json.loads(capsys.readouterr().out)
    assert shown == json.loads(json.dumps(cli.DEFAULT_CONFIG))
    assert cli.main(["solve", "--print-config", "--seed", "5"]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 5


def test_verify_symmetries_default(tmp_path):
    assert run(tmp_path, "verify-symmetries") == 0
    rep = load(tmp_path, "verify_symmetries.json")
    assert len(rep["generators"]) == 9 and rep["jet_count"] == 100
    assert all(len(g["max_residual"]) == 3 for g in rep["generators"])


def test_verify_symmetries_f0(tmp_path):
    assert run(tmp_path, "verify-symmetries", {"f": 0.0, "h": "sin_s", "jet_count": 30}) == 0
    names = [g["generator"] for g in load(tmp_path, "verify_symmetries.json")["generators"]]
    assert names == [f"X{i}" for i in range(1, 9)] + ["X9'"]


def test_verify_symmetries_mutated(tmp_path):
    assert run(tmp_path, "verify-symmetries", {"mutate": True, "jet_count": 20}) == 2


def test_solve_outputs(tmp_path):
    assert run(tmp_path, "solve") == 0
    meta = load(tmp_path, "solution.json")
    assert meta["bound_satisfied"] and meta["drift"] <= 1e-8
    assert set(meta["constants"]) == {"A", "K", "B2", "C_star"}
    rows = np.loadtxt(tmp_path / "out" / "trajectory.csv", delimiter=",", skiprows=1)
    assert rows.shape[1] == 6
    assert (tmp_path / "out" / "trajectory.csv").read_text().splitlines()[0] == "t,phi,dphi,H,R,V"
    assert (tmp_path / "out" / "fields" / "grid.json").exists()


def test_solve_equilibrium(tmp_path):
    assert run(tmp_path, "solve", {"phi0": 0.0, "dphi0": 0.0, "t_end": 5.0}) == 0
    rows = np.loadtxt(tmp_path / "out" / "trajectory.csv", delimiter=",", skiprows=1)
    assert np.all(rows[:, 1:4] == 0.0)
    assert load(tmp_path, "solution.json")["period"] is None


def test_verify_solution_modes(tmp_path):
    assert run(tmp_path, "verify-solution", {"residual_points": 200, "invariance_points": 100}) == 0
    assert run(tmp_path, "verify-solution", {"phi0": 0.0, "dphi0": 0.0, "residual_points": 50}) == 0
    assert run(tmp_path, "verify-solution", {"mutate": True, "residual_points": 50}) == 2
    rep = load(tmp_path, "verify_solution.json")
    assert not rep["checks"]["analytic_residual"]["passed"]


def test_energy_outputs(tmp_path):
    assert run(tmp_path, "energy", {"time_samples": 16}) == 0
    rep = load(tmp_path, "energy_report.json")
    assert rep["max_relative_variation"] <= 1e-6
    assert rep["density_audit"]["D_over_weight_in_B2_units"] == pytest.approx(4.0, rel=1e-9)
    header = (tmp_path / "out" / "energy_totals.csv").read_text().splitlines()[0]
    assert header == "t,total_energy,quadrature_error"
    kinds = {line.split(",")[0] for line in (tmp_path / "out" / "energy_profiles.csv").read_text().splitlines()[1:]}
    assert kinds == {"ray_x", "ray_z", "ray_diag", "circle_0.5R", "circle_1R"}


def test_energy_equilibrium(tmp_path):
    assert run(tmp_path, "energy", {"phi0": 0.0, "dphi0": 0.0, "time_samples": 8, "t_end": 4.0}) == 0
    assert load(tmp_path, "energy_report.json")["max_relative_variation"] <= 1e-14


def test_bracket_table(tmp_path):
    assert run(tmp_path, "bracket-table") == 0
    table = load(tmp_path, "bracket_table.json")
    assert len(table["brackets"]) == 36
    pair = {tuple(e["pair"]): e for e in table["brackets"]}
    assert pair[("X7", "X9")]["zero"] and pair[("X1", "X2")]["zero"]
    assert all(e["antisymmetry_error"] <= 1e-13 for e in table["brackets"])


@pytest.mark.parametrize(
    "config",
    [
        {"A": 0.5},
        {"unknown": 1},
        {"branch": "f-zero"},
        {"seed": -1},
        {"tolerances": {"drift": 0.0}},
        {"h": "tanh"},
        {"K": -2.0},
        {"grid": {"nx": 0}},
    ],
)
def test_config_errors(tmp_path, config):
    assert run(tmp_path, "solve", config) == 1


def test_config_file_unreadable(tmp_path):
    assert cli.main(["solve", "--config", str(tmp_path / "missing.json")]) == 1
    assert cli.main([]) == 1


def test_numerical_failure(tmp_path):
    assert run(tmp_path, "solve", {"tolerances": {"drift": 1e-30}, "t_end": 200.0}) == 3
