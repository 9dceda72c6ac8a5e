"""Command-line entry point.

    adiabatic-lab <command> [--config cfg.json] [--out DIR] [--quiet]

Commands: berry, evolve, sweep, ms-check, probe, ab, monopole, repro.  Each
writes plot-ready CSV and/or JSON data files into the output directory plus
a ``meta.json`` with run metadata (version, timing, platform); the data files
themselves contain nothing run-specific, so identical configs give
byte-identical data.

Exit codes: 0 ok, 2 invalid configuration, 3 numerical failure,
4 violated precondition (degenerate spectrum, non-cyclic family, ...).
"""

from __future__ import annotations

import argparse
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np

from adiabatic_lab import __version__, io
from adiabatic_lab import config as cfgmod
from adiabatic_lab.config import ConfigError
from adiabatic_lab.errors import NumericalError, PreconditionError
from adiabatic_lab.gauge import circle, monopole_quantization_check, phase_factor_line_integral, solenoid
from adiabatic_lab.propagate import (
    EvolutionConfig,
    evolve_lab,
    evolve_rotating_ode,
    evolve_rotating_volterra,
    suggest_steps,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PRECONDITION = 4


def _complex_fields(prefix: str, z: complex) -> dict:
    return {f"{prefix}_re": float(z.real), f"{prefix}_im": float(z.imag)}


def _family_meta(cfg: dict) -> dict:
    fam = cfg.get("family")
    return {} if fam is None else {"family": fam["kind"]}


def cmd_berry(cfg: dict, out: Path) -> list[Path]:
    from adiabatic_lab.phases import berry_phase

    fr, f = cfgmod.build_frame(cfg)
    level = cfgmod.resolve_level(cfg, fr.dim, fr.dim - 1)
    gamma = berry_phase(fr, level)
    data = {"gamma": gamma, "level": level, "n_grid": fr.n_grid, **_complex_fields("factor", complex(np.exp(1j * gamma)))}
    data.update(_family_meta(cfg))
    if f is not None and f.spin is not None:
        data["theta"] = f.spin.theta
        data["mu_b"] = f.spin.mu_b
    return [io.write_json(out / "berry.json", data)]


def _evolution_config(cfg: dict, omega: float) -> EvolutionConfig:
    ev = cfg["evolution"]
    T = float(ev["T"])
    n = ev.get("n_steps") or suggest_steps(T, omega)
    return EvolutionConfig(T, int(n), ev["method"], float(ev["osc_resolution"]))


def cmd_evolve(cfg: dict, out: Path) -> list[Path]:
    f = cfgmod.build_family(cfg)
    ev = cfg["evolution"]
    ecfg = _evolution_config(cfg, f.max_frequency())
    from adiabatic_lab.verify import frame_for

    fr = frame_for(f, ecfg.n_steps + 1)
    level = cfgmod.resolve_level(cfg, f.dim, f.dim - 1)
    psi0 = fr.vectors[0][:, level]
    if ev["frame"] == "lab":
        traj = evolve_lab(f, psi0, ecfg)
    elif ev["frame"] == "rotating-ode":
        traj = evolve_rotating_ode(fr, psi0, ecfg)
    else:
        traj = evolve_rotating_volterra(fr, psi0, ecfg)
    header, rows = io.trajectory_rows(traj, ecfg.T)
    norms = traj.norms()
    summary = {
        "T": ecfg.T, "n_steps": ecfg.n_steps, "method": ecfg.method, "frame": traj.frame_tag,
        "propagator": ev["frame"], "level": level, "max_norm_drift": float(np.max(np.abs(norms - 1.0))),
        **_complex_fields("overlap_final", complex(np.vdot(psi0, traj.final))),
    }
    summary.update(_family_meta(cfg))
    return [io.write_csv(out / "trajectory.csv", header, rows), io.write_json(out / "evolve.json", summary)]


SWEEP_COLUMNS = ("T", "n_steps", "fidelity_error", "transition_prob", "transition_prob_peak",
                 "geometric_phase_error", "status")


def cmd_sweep(cfg: dict, out: Path) -> list[Path]:
    from adiabatic_lab.verify import adiabatic_sweep, loglog_slope

    f = cfgmod.build_family(cfg)
    level = cfgmod.resolve_level(cfg, f.dim, f.dim - 1)
    ev = cfg["evolution"]
    res = adiabatic_sweep(f, level, cfg["sweep"]["T_list"], method=ev["method"], n_steps=ev.get("n_steps"),
                          osc_resolution=ev["osc_resolution"])
    rows = [[getattr(e, c) for c in SWEEP_COLUMNS] for e in res.entries]
    ok = [e for e in res.entries if e.status == "ok" and e.transition_prob > 0]
    summary = {"level": level, "n_T": len(res.entries), "n_failed": sum(e.status != "ok" for e in res.entries)}
    if len(ok) >= 2:
        ts = [e.T for e in ok]
        summary["transition_prob_slope"] = loglog_slope(ts, [e.transition_prob for e in ok])
        summary["transition_prob_peak_slope"] = loglog_slope(ts, [e.transition_prob_peak for e in ok])
    summary.update(_family_meta(cfg))
    return [io.write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows), io.write_json(out / "sweep.json", summary)]


def cmd_ms_check(cfg: dict, out: Path) -> list[Path]:
    from adiabatic_lab.verify import ms_check

    fr, _ = cfgmod.build_frame(cfg)
    level = cfgmod.resolve_level(cfg, fr.dim, fr.dim - 1)
    rep = ms_check(fr, level)
    header = ["s", "lhs_re", "lhs_im", "lhs_abs", "rhs_re", "rhs_im", "rhs_abs", "gap"]
    rows = [[s, l.real, l.imag, abs(l), r.real, r.imag, abs(r), g]
            for s, l, r, g in zip(rep.grid, rep.lhs, rep.rhs, rep.gap)]
    k = int(np.argmax(rep.gap))
    summary = {"level": level, "n_grid": fr.n_grid, "max_gap": rep.max_gap, "s_at_max_gap": float(rep.grid[k]),
               "max_rhs_modulus_defect": float(np.max(np.abs(np.abs(rep.rhs) - 1.0)))}
    summary.update(_family_meta(cfg))
    return [io.write_csv(out / "ms_check.csv", header, rows), io.write_json(out / "ms_check.json", summary)]


def cmd_probe(cfg: dict, out: Path) -> list[Path]:
    from adiabatic_lab.verify import limit_commutation_probe

    fr, _ = cfgmod.build_frame(cfg)
    level = cfgmod.resolve_level(cfg, fr.dim, fr.dim - 1)
    pr = cfg["probe"]
    try:
        fr.index_of(pr["s"])
    except PreconditionError as exc:
        raise ConfigError(f"probe s must lie on the frame grid: {exc}") from None
    res = limit_commutation_probe(fr, pr["s"], sorted(pr["T_list"]), level)
    header = ["T", "n_steps", "state_gap", "derivative_gap", "max_state_gap"]
    rows = [[r.T, r.n_steps, r.state_gap, r.derivative_gap, r.max_state_gap] for r in res.rows]
    summary = {"s": res.s, "level": res.level, "coupling": res.coupling,
               "min_derivative_gap": float(np.min(res.derivative_gaps)),
               "final_state_gap": float(res.state_gaps[-1])}
    summary.update(_family_meta(cfg))
    return [io.write_csv(out / "probe.csv", header, rows), io.write_json(out / "probe.json", summary)]


def cmd_ab(cfg: dict, out: Path) -> list[Path]:
    ab = cfg["ab"]
    A = solenoid(ab["flux"], ab["charge"])
    header = ["winding", "factor_re", "factor_im", "expected_re", "expected_im", "error"]
    rows = []
    worst = 0.0
    for w in ab["windings"]:
        if w == 0:
            path = circle(ab["radius"], ab["n_segments"], center=(3.0 * ab["radius"], 0.0, 0.0))
        else:
            path = circle(ab["radius"], ab["n_segments"] * abs(w), turns=w)
        z = phase_factor_line_integral(A, path)
        expected = complex(np.exp(1j * ab["charge"] * ab["flux"] * w))
        err = abs(z - expected)
        worst = max(worst, err)
        rows.append([w, z.real, z.imag, expected.real, expected.imag, err])
    summary = {"flux": ab["flux"], "charge": ab["charge"], "max_error": worst}
    return [io.write_csv(out / "ab.csv", header, rows), io.write_json(out / "ab.json", summary)]


def cmd_monopole(cfg: dict, out: Path) -> list[Path]:
    mp = cfg["monopole"]
    res = monopole_quantization_check(mp["g"], mp["e"], mp["n_patch_grid"])
    data = {"g": mp["g"], "e": mp["e"], "n_patch_grid": mp["n_patch_grid"], **res.to_dict()}
    return [io.write_json(out / "monopole.json", data)]


def cmd_repro(cfg: dict, out: Path, report=None) -> list[Path]:
    from adiabatic_lab.acceptance import run_all

    results = run_all(report)
    header = ["id", "passed", "title"]
    rows = [[c.id, c.passed, c.title] for c in results]
    detail = {
        "n_criteria": len(results),
        "n_passed": sum(c.passed for c in results),
        "criteria": [{"id": c.id, "title": c.title, "passed": c.passed, "measured": c.measured} for c in results],
    }
    return [io.write_csv(out / "acceptance.csv", header, rows), io.write_json(out / "acceptance.json", detail)]


COMMANDS = {
    "berry": cmd_berry,
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "ms-check": cmd_ms_check,
    "probe": cmd_probe,
    "ab": cmd_ab,
    "monopole": cmd_monopole,
    "repro": cmd_repro,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adiabatic-lab", description="Adiabatic evolution and geometric phase experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, default=None, help="JSON run configuration")
        sp.add_argument("--out", type=Path, default=None, help="output directory (overrides config 'output')")
        sp.add_argument("--quiet", action="store_true", help="suppress progress output")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def say(msg):
        if not args.quiet:
            print(msg)

    started = time.perf_counter()
    try:
        cfg = cfgmod.load(args.config)
        out = Path(args.out if args.out is not None else cfg["output"])
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "repro":
            written = cmd_repro(cfg, out, report=lambda c: say(c.line()))
        else:
            written = COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition violated: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # remaining argument validation errors from the library
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    meta = {
        "command": args.command,
        "version": __version__,
        "config": str(args.config) if args.config else None,
        "files": sorted(p.name for p in written),
        "elapsed_s": time.perf_counter() - started,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
        "finished_unix": math.floor(time.time()),
    }
    io.write_json(out / "meta.json", meta)
    for p in written:
        say(f"wrote {p}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
