"""Run configuration: schema validation, defaults and family construction."""

from __future__ import annotations

import copy
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from adiabatic_lab.errors import AdiabaticLabError
from adiabatic_lab.hamiltonian import (
    HamiltonianFamily,
    SpinHalfParams,
    build_constant,
    build_spin_half,
    phase_only_frame,
)
from adiabatic_lab.propagate import METHOD_RK4
from adiabatic_lab.zoo import CONJUGATED_D0, ZOO_SEED, phase_betas, phase_dbetas, conjugated_family

SCHEMA_FILE = "run_config.schema.json"
OUTPUT_SCHEMA_FILE = "outputs.schema.json"


class ConfigError(AdiabaticLabError, ValueError):
    """Configuration is malformed or inconsistent with the requested command."""


DEFAULTS = {
    "level": None,
    "grid": {"n_grid": 4097},
    "evolution": {"T": 10.0, "method": METHOD_RK4, "frame": "lab", "osc_resolution": 20.0},
    "sweep": {"T_list": [25.0, 50.0, 100.0, 200.0, 400.0]},
    "probe": {"s": 0.5, "T_list": [50.0, 100.0, 200.0, 400.0]},
    "theta_grid": [k * math.pi / 12 for k in range(13)],
    "ab": {"flux": 1.0, "charge": 1.0, "radius": 1.0, "n_segments": 256, "windings": [-1, 0, 1, 2]},
    "monopole": {"g": 0.5, "e": 1.0, "n_patch_grid": 256},
    "output": ".",
    "seed": ZOO_SEED,
}


def load_schema(name: str = SCHEMA_FILE) -> dict:
    text = resources.files("adiabatic_lab").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None


def with_defaults(cfg: dict) -> dict:
    out = copy.deepcopy(DEFAULTS)
    for key, val in cfg.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **val}
        else:
            out[key] = copy.deepcopy(val)
    return out


def load(path) -> dict:
    """Read, validate and fill defaults.  ``path`` may be None (all defaults)."""
    if path is None:
        raw = {}
    else:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse(raw)


def parse(raw: dict) -> dict:
    validate(raw)
    return with_defaults(raw)


def build_family(cfg: dict) -> HamiltonianFamily:
    """The Hamiltonian family described by ``cfg['family']``."""
    fam = cfg.get("family")
    if fam is None:
        raise ConfigError("this command needs a 'family' block")
    kind = fam["kind"]
    params = fam.get("parameters", {})
    if kind == "spin-half":
        return build_spin_half(SpinHalfParams(params.get("mu_b", 1.0), params.get("theta", math.pi / 2)))
    if kind == "constant":
        re = np.asarray(params["h0_re"], dtype=float)
        im = np.asarray(params.get("h0_im", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise ConfigError("h0_re/h0_im must be square matrices of the same shape")
        return build_constant(re + 1j * im, label="constant")
    if kind == "conjugated":
        return conjugated_family(cfg["seed"], tuple(params.get("d0", CONJUGATED_D0)))
    raise ConfigError(f"family kind {kind!r} has no Hamiltonian; it only provides a frame")


def build_frame(cfg: dict):
    """Eigenframe for frame-level commands (berry, ms-check, probe)."""
    from adiabatic_lab.verify import frame_for

    fam = cfg.get("family")
    if fam is None:
        raise ConfigError("this command needs a 'family' block")
    n_grid = cfg["grid"]["n_grid"]
    if fam["kind"] == "phase-only":
        return phase_only_frame([-1.0, 1.0], phase_betas, phase_dbetas, n_grid, label="phase-only"), None
    f = build_family(cfg)
    return frame_for(f, n_grid), f


def resolve_level(cfg: dict, dim: int, default: int) -> int:
    level = cfg.get("level")
    level = default if level is None else level
    if not 0 <= level < dim:
        raise ConfigError(f"level {level} out of range for dimension {dim}")
    return level


def validate_output(stem: str, data: dict) -> None:
    """Check an emitted JSON document against its published output schema."""
    schema = load_schema(OUTPUT_SCHEMA_FILE)
    if stem not in schema["$defs"]:
        raise KeyError(f"no output schema for {stem!r}")
    sub = {"$schema": schema["$schema"], "$defs": schema["$defs"], "$ref": f"#/$defs/{stem}"}
    jsonschema.validate(data, sub)
