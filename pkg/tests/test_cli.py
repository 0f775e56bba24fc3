import json

import numpy as np
import pytest
from click.testing import CliRunner

from dikernel.cli import canonical_json, main

EX1_MODEL = {
    "matrix": [[0, 0.5, 0.5], [1, 0, 0], [0, 1, 0]],
    "weights": [1 / 3, 1 / 3, 1 / 3],
}


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_lift_command(runner, tmp_path):
    model = write(tmp_path, "ex1.json", EX1_MODEL)
    result = runner.invoke(main, ["lift", "--matrix", model, "--partition", "uniform:3"])
    assert result.exit_code == 0
    out = json.loads(result.output)
    np.testing.assert_allclose(
        out["kernel"]["values"], [[0, 1.5, 1.5], [3, 0, 0], [0, 3, 0]], atol=1e-9
    )


def test_simulate_command_csv(runner, tmp_path):
    model = write(tmp_path, "ex1.json", EX1_MODEL)
    lifted = runner.invoke(
        main,
        ["lift", "--matrix", model, "-o", str(tmp_path / "k.json")],
    )
    assert lifted.exit_code == 0
    kernel = json.loads((tmp_path / "k.json").read_text())["kernel"]
    kfile = write(tmp_path, "kernel.json", kernel)
    result = runner.invoke(
        main,
        ["simulate", "--kernel", kfile, "--opinions", "0.5,0.3,0.8", "--t", "1"],
    )
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert lines[0] == "t,cell,value"
    row = {tuple(l.split(",")[:2]): float(l.split(",")[2]) for l in lines[1:7]}
    assert row[("1", "0")] == pytest.approx(0.55)
    assert row[("1", "1")] == pytest.approx(0.5)
    assert row[("1", "2")] == pytest.approx(0.3)


def test_reduce_command(runner, tmp_path):
    matrix = [
        [0, 1 / 2, 1 / 2, 0, 0, 0],
        [1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1 / 3, 1 / 3, 1 / 3],
        [0, 1 / 4, 1 / 4, 0, 1 / 4, 1 / 4],
        [0, 0, 0, 0, 0, 1],
        [0, 1 / 4, 1 / 4, 1 / 4, 1 / 4, 0],
    ]
    model = write(tmp_path, "ex9.json", {"matrix": matrix, "weights": [1 / 6] * 6})
    result = runner.invoke(
        main, ["reduce", "--model", model, "--groups", "[[0],[1,2],[3,4,5]]"]
    )
    assert result.exit_code == 0
    out = json.loads(result.output)
    np.testing.assert_allclose(
        out["matrix"], [[0, 1, 0], [0.5, 0, 0.5], [0, 1 / 3, 2 / 3]], atol=1e-12
    )
    np.testing.assert_allclose(out["weights"], [1 / 6, 1 / 3, 1 / 2], atol=1e-12)


def test_discretize_command_catalog(runner):
    result = runner.invoke(
        main, ["discretize", "--kernel", "figure3a", "--partition", "uniform:4"]
    )
    assert result.exit_code == 0
    out = json.loads(result.output)
    np.testing.assert_allclose(
        out["kernel"]["values"],
        [[1, 0, 1, 2], [0, 1, 2, 1], [1, 2, 1, 0], [2, 1, 0, 1]],
        atol=1e-12,
    )


def test_cutnorm_and_bounds_commands(runner, tmp_path):
    a = write(
        tmp_path,
        "a.json",
        {"type": "block", "partition": [0, 0.5, 1], "values": [[1, 1], [1, 1]]},
    )
    b = write(
        tmp_path,
        "b.json",
        {"type": "block", "partition": [0, 0.5, 1], "values": [[0.5, 1.5], [1.5, 0.5]]},
    )
    result = runner.invoke(main, ["cutnorm", "--kernel-a", a, "--kernel-b", b])
    assert result.exit_code == 0
    assert json.loads(result.output)["value"] == pytest.approx(0.125)

    result = runner.invoke(
        main, ["bounds", "--kind", "dynamic", "--t", "5", "--cut", "0.01"]
    )
    assert result.exit_code == 0
    assert json.loads(result.output)["bound"] == pytest.approx(0.2)


def test_stationary_command(runner, tmp_path):
    kernel = write(
        tmp_path,
        "k.json",
        {
            "type": "block",
            "partition": [0, 1 / 3, 2 / 3, 1],
            "values": [[0, 1.5, 1.5], [3, 0, 0], [0, 3, 0]],
        },
    )
    result = runner.invoke(main, ["stationary", "--kernel", kernel])
    assert result.exit_code == 0
    np.testing.assert_allclose(
        json.loads(result.output)["density"], [1.2, 1.2, 0.6], atol=1e-9
    )


def test_stationary_non_convergence_exit_code(runner, tmp_path):
    kernel = write(
        tmp_path,
        "skew.json",
        {
            "type": "block",
            "partition": [0, 0.5, 1],
            "values": [[0.2, 1.8], [1.9, 0.1]],
        },
    )
    result = runner.invoke(
        main,
        ["stationary", "--kernel", kernel, "--max-iter", "2", "--tol", "1e-15",
         "-o", str(tmp_path / "report.json")],
    )
    assert result.exit_code == 2


def test_solve_and_verify_game_commands(runner, tmp_path):
    spec = {
        "kernel": {
            "type": "block",
            "partition": [0, 0.5, 1],
            "values": [[1.0, 1.0], [1.0, 1.0]],
        },
        "operator": "weighted",
        "f0": [0, 0],
        "s0": [0.5, 0.5],
        "psi1": [1, 1],
        "psi2": [1, 1],
        "b1": 1.0,
        "b2": 1.0,
        "delta": 0.9,
    }
    spec_file = write(tmp_path, "game.json", spec)
    result = runner.invoke(main, ["solve-game", "--spec", spec_file])
    assert result.exit_code == 0
    eq = json.loads(result.output)
    np.testing.assert_allclose(eq["s1"], 1.0, atol=1e-7)

    profile = write(tmp_path, "profile.json", {"s1": eq["s1"], "s2": eq["s2"]})
    result = runner.invoke(
        main, ["verify-nash", "--spec", spec_file, "--profile", profile]
    )
    assert result.exit_code == 0
    out = json.loads(result.output)
    assert out["residual1"] < 1e-8 and out["residual2"] < 1e-8


def test_error_exit_code_and_diagnostic(runner, tmp_path):
    bad = write(tmp_path, "bad.json", {"matrix": [[0.5, 0.2], [1, 0]], "weights": [0.5, 0.5]})
    result = runner.invoke(main, ["lift", "--matrix", bad])
    assert result.exit_code == 1


def test_unknown_subcommand(runner):
    result = runner.invoke(main, ["frobnicate"])
    assert result.exit_code != 0


def test_byte_identical_output(runner, tmp_path):
    model = write(tmp_path, "ex1.json", EX1_MODEL)
    args = ["lift", "--matrix", model, "--partition", "uniform:3"]
    first = runner.invoke(main, args).output
    second = runner.invoke(main, args).output
    assert first == second


def test_canonical_json_formatting():
    text = canonical_json({"b": 0.1, "a": [1, 2.5, True, None, "x"]})
    assert text.index('"a"') < text.index('"b"')
    assert "0.10000000000000001" in text
