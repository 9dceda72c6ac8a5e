"""Fixed corpus of eigenframes for the property harnesses.

Members are versioned: change ``ZOO_VERSION`` whenever a member changes so
stored acceptance outputs can be traced to the corpus that produced them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from adiabatic_lab.hamiltonian import (
    GAUGE_ANALYTIC,
    GAUGE_NUMERIC,
    EigenFrame,
    HamiltonianFamily,
    SpinHalfParams,
    build_conjugated,
    build_constant,
    build_spin_half,
    eigenframe,
    phase_only_frame,
)
from adiabatic_lab.linalg import SIGMA_Z

ZOO_VERSION = "1"
ZOO_SEED = 20240611
SPIN_THETAS = {
    "0": 0.0,
    "pi/6": np.pi / 6,
    "pi/4": np.pi / 4,
    "pi/2": np.pi / 2,
    "2pi/3": 2 * np.pi / 3,
    "pi": np.pi,
}


@dataclass(frozen=True)
class ZooMember:
    name: str
    frame: EigenFrame
    family: Optional[HamiltonianFamily] = None


def phase_betas(s):
    return np.column_stack([np.sin(2 * np.pi * s), 0.5 * np.sin(4 * np.pi * s)])


def phase_dbetas(s):
    return np.column_stack([2 * np.pi * np.cos(2 * np.pi * s), 2 * np.pi * np.cos(4 * np.pi * s)])


def phase_only_member(n_grid: int = 4097) -> ZooMember:
    fr = phase_only_frame([-1.0, 1.0], phase_betas, phase_dbetas, n_grid, label="phase-only")
    return ZooMember("phase-only", fr)


def random_generator(seed: int = ZOO_SEED, spectrum=(-1.0, 0.0, 1.0)) -> np.ndarray:
    """Hermitian generator with the given integer spectrum, so exp(-2 pi i K) = I."""
    d = len(spectrum)
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q @ np.diag(spectrum) @ q.conj().T


CONJUGATED_D0 = (-1.0, 0.3, 1.2)


def conjugated_family(seed: int = ZOO_SEED, d0=CONJUGATED_D0) -> HamiltonianFamily:
    d = len(d0)
    spectrum = np.arange(d, dtype=float) - (d // 2)
    return build_conjugated(list(d0), random_generator(seed, spectrum), label=f"conjugated-{d}level(seed={seed})")


def conjugated_member(n_grid: int = 4097, seed: int = ZOO_SEED) -> ZooMember:
    f = conjugated_family(seed)
    return ZooMember("conjugated-3level", eigenframe(f, n_grid, GAUGE_NUMERIC), f)


def spin_member(key: str, n_grid: int = 4097, mu_b: float = 1.0) -> ZooMember:
    f = build_spin_half(SpinHalfParams(mu_b, SPIN_THETAS[key]))
    return ZooMember(f"spin-half theta={key}", eigenframe(f, n_grid, GAUGE_ANALYTIC), f)


def constant_member(n_grid: int = 4097) -> ZooMember:
    f = build_constant(SIGMA_Z, label="constant sigma_z")
    return ZooMember("constant sigma_z", eigenframe(f, n_grid, GAUGE_NUMERIC), f)


def zoo(n_grid: int = 4097, seed: int = ZOO_SEED) -> list[ZooMember]:
    members = [phase_only_member(n_grid), constant_member(n_grid)]
    members += [spin_member(k, n_grid) for k in SPIN_THETAS]
    members.append(conjugated_member(n_grid, seed))
    return members
