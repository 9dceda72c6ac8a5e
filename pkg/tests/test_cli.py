import json
import math
from pathlib import Path

import numpy as np
import pytest

from adiabatic_lab import cli
from adiabatic_lab.config import validate_output
from adiabatic_lab.io import read_csv, read_trajectory_csv
from adiabatic_lab.oracles import rabi_state, spin_up

GOLDEN = Path(__file__).parent / "golden"


def run(tmp_path, command, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / f"out-{command}"
    code = cli.main([command, "--config", str(path), "--out", str(out), "--quiet"])
    return code, out


def spin(theta, **extra):
    return {"family": {"kind": "spin-half", "parameters": {"mu_b": 1.0, "theta": theta}}, **extra}


def check_outputs(out):
    for p in out.glob("*.json"):
        validate_output(p.stem, json.loads(p.read_text()))
    for p in out.glob("*.csv"):
        raw = p.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        header, rows = read_csv(p)
        assert header and all(len(r) == len(header) for r in rows)


@pytest.mark.parametrize("theta,gamma", [(math.pi / 2, -math.pi), (0.0, 0.0), (2 * math.pi / 3, -1.5 * math.pi)])
def test_berry(tmp_path, theta, gamma):
    code, out = run(tmp_path, "berry", spin(theta))
    assert code == 0
    data = json.loads((out / "berry.json").read_text())
    assert data["gamma"] == pytest.approx(gamma, abs=1e-8)
    assert data["theta"] == theta
    assert data["factor_re"] == pytest.approx(math.cos(gamma), abs=1e-10)
    check_outputs(out)


def test_berry_noncyclic_is_precondition(tmp_path):
    cfg = {"family": {"kind": "constant", "parameters": {"h0_re": [[1, 0], [0, 1]]}}}
    code, _ = run(tmp_path, "berry", cfg)
    assert code == cli.EXIT_PRECONDITION


def test_invalid_config_exit_code(tmp_path):
    code, _ = run(tmp_path, "berry", {"family": {"kind": "spin-half"}, "bogus": 1})
    assert code == cli.EXIT_CONFIG
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    assert cli.main(["berry", "--config", str(bad), "--out", str(tmp_path / "x"), "--quiet"]) == cli.EXIT_CONFIG


def test_missing_family_is_config_error(tmp_path):
    code, _ = run(tmp_path, "evolve", {})
    assert code == cli.EXIT_CONFIG


def test_degenerate_is_precondition(tmp_path):
    cfg = {"family": {"kind": "constant", "parameters": {"h0_re": [[1, 0], [0, 1]]}}}
    code, _ = run(tmp_path, "ms-check", cfg)
    assert code == cli.EXIT_PRECONDITION


def test_step_control_is_precondition(tmp_path):
    code, _ = run(tmp_path, "evolve", spin(1.0, evolution={"T": 1000.0, "n_steps": 64}))
    assert code == cli.EXIT_PRECONDITION


def test_evolve_golden(tmp_path):
    cfg = json.loads((GOLDEN / "evolve_spin_half_T10.json").read_text())
    code, out = run(tmp_path, "evolve", cfg)
    assert code == 0
    assert (out / "trajectory.csv").read_bytes() == (GOLDEN / "evolve_spin_half_T10.csv").read_bytes()
    check_outputs(out)


def test_golden_is_oracle_validated():
    s, states, frames, ts = read_trajectory_csv(GOLDEN / "evolve_spin_half_T10.csv")
    ref = rabi_state(10.0, 1.0, math.pi / 2, spin_up(math.pi / 2, 0.0), s)
    assert np.max(np.abs(states - ref)) <= 1e-8
    assert set(frames) == {"lab"} and np.all(ts == 10.0)


def test_evolve_constant_modulus(tmp_path):
    cfg = {"family": {"kind": "constant", "parameters": {"h0_re": [[1, 0], [0, -1]]}}, "evolution": {"T": 5.0}}
    code, out = run(tmp_path, "evolve", cfg)
    assert code == 0
    _, states, _, _ = read_trajectory_csv(out / "trajectory.csv")
    assert np.max(np.abs(np.abs(states) - np.abs(states[0]))) <= 1e-12


def test_evolve_T0(tmp_path):
    code, out = run(tmp_path, "evolve", spin(1.0, evolution={"T": 0.0}))
    assert code == 0
    header, rows = read_csv(out / "trajectory.csv")
    assert all(r[1:] == rows[0][1:] for r in rows)


@pytest.mark.parametrize("frame", ["rotating-ode", "rotating-volterra"])
def test_evolve_rotating(tmp_path, frame):
    code, out = run(tmp_path, "evolve", spin(0.0, evolution={"T": 4.0, "frame": frame}))
    assert code == 0
    _, rows = read_csv(out / "trajectory.csv")
    assert {r[-2] for r in rows} == {"rotating"}


def test_ms_check(tmp_path):
    code, out = run(tmp_path, "ms-check", spin(math.pi / 2))
    assert code == 0
    header, rows = read_csv(out / "ms_check.csv")
    row = dict(zip(header, next(r for r in rows if float(r[0]) == 0.5)))
    assert float(row["lhs_abs"]) <= 1e-12 and float(row["rhs_abs"]) == pytest.approx(1.0, abs=1e-12)
    check_outputs(out)


def test_probe_theta_zero(tmp_path):
    code, out = run(tmp_path, "probe", spin(0.0))
    assert code == 0
    header, rows = read_csv(out / "probe.csv")
    k = header.index("derivative_gap")
    assert all(float(r[k]) <= 1e-8 for r in rows)
    check_outputs(out)


def test_probe_off_grid_is_config_error(tmp_path):
    code, _ = run(tmp_path, "probe", spin(1.0, probe={"s": 0.3}))
    assert code == cli.EXIT_CONFIG


def test_sweep(tmp_path):
    code, out = run(tmp_path, "sweep", spin(math.pi / 2, sweep={"T_list": [100.0, 25.0, 50.0]}))
    assert code == 0
    header, rows = read_csv(out / "sweep.csv")
    assert [float(r[0]) for r in rows] == [25.0, 50.0, 100.0]
    check_outputs(out)


def test_ab(tmp_path):
    code, out = run(tmp_path, "ab", {"ab": {"flux": 1.0, "windings": [0, 1, -2]}})
    assert code == 0
    assert json.loads((out / "ab.json").read_text())["max_error"] <= 1e-6
    check_outputs(out)


@pytest.mark.parametrize("g,quantized", [(0.5, True), (0.3, False)])
def test_monopole(tmp_path, g, quantized):
    code, out = run(tmp_path, "monopole", {"monopole": {"g": g, "e": 1.0}})
    assert code == 0
    data = json.loads((out / "monopole.json").read_text())
    assert data["flux"] == pytest.approx(4 * math.pi * g, rel=1e-6)
    assert data["quantized"] is quantized
    check_outputs(out)


def test_outputs_are_byte_stable(tmp_path):
    cfg = spin(1.0, evolution={"T": 20.0}, sweep={"T_list": [20.0, 40.0]})
    for command in ("evolve", "sweep", "ms-check", "berry"):
        runs = []
        for tag in ("a", "b"):
            (tmp_path / tag).mkdir(exist_ok=True)
            _, out = run(tmp_path / tag, command, cfg)
            runs.append({p.name: p.read_bytes() for p in out.iterdir() if p.name != "meta.json"})
        assert runs[0] == runs[1], command


def test_meta_is_separate(tmp_path):
    code, out = run(tmp_path, "berry", spin(1.0))
    meta = json.loads((out / "meta.json").read_text())
    assert meta["files"] == ["berry.json"] and meta["command"] == "berry"
    assert "elapsed_s" not in (out / "berry.json").read_text()


def test_defaults_without_config(tmp_path, capsys):
    assert cli.main(["monopole", "--out", str(tmp_path)]) == 0
    assert "monopole.json" in capsys.readouterr().out
