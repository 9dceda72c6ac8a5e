"""Dynamical, Berry and Aharonov-Anandan phases of adiabatic evolutions.

All angles are real radians.  Geometric phases are reported unwrapped, so a
loop that sweeps a full hemisphere yields -2 pi rather than 0; the unit
factor ``exp(i gamma)`` is reported next to the angle where it matters.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import simpson

from adiabatic_lab import tolerances as tol
from adiabatic_lab.errors import CyclicityError, FrameMismatchError
from adiabatic_lab.hamiltonian import (
    GAUGE_ANALYTIC,
    GAUGE_NUMERIC,
    EigenFrame,
    HamiltonianFamily,
    eigenframe,
)
from adiabatic_lab.propagate import FRAME_LAB, Trajectory, connection_integral


@dataclass(frozen=True)
class PhaseReport:
    total_phase: float
    dynamical_phase: float
    geometric_phase: float
    residual_overlap: float

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PhaseReport":
        return cls(**json.loads(text))


def wrap_angle(x):
    """Map to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2 * np.pi)


def dynamical_phase(fr: EigenFrame, n: int, T: float, s_end: float = 1.0) -> float:
    """``-T int_0^{s_end} E_n ds`` with the frame's trapezoid rule."""
    k = fr.index_of(s_end)
    return float(-T * fr.energy_integrals[k, n])


def berry_phase(fr: EigenFrame, n: int) -> float:
    """Geometric phase of level ``n`` around the closed loop s: 0 -> 1.

    gamma = -Im int_0^1 <n|dn/ds> ds + arg <n(0)|n(1)>.

    The second term is the end-point holonomy left by a gauge that does not
    close on itself (numeric frames); it vanishes for single-valued gauges,
    in which case the result is unwrapped.  For numeric frames the holonomy
    carries all of gamma and is only known modulo 2 pi.
    """
    if not fr.cyclic:
        raise CyclicityError(f"berry_phase needs a cyclic frame ({fr.label!r} is not)")
    loop = connection_integral(fr, n)[-1]
    return float(-loop.imag + fr.holonomy(n))


def _level_phase(traj: Trajectory, fr: EigenFrame, n: int) -> tuple[float, np.ndarray]:
    """Unwrapped accumulated arg <n(s_k)|Psi(s_k)> along the trajectory grid."""
    _, v, _ = fr.sample(traj.grid)
    amp = np.einsum("ki,ki->k", v[:, :, n].conj(), traj.states)
    ph = np.unwrap(np.angle(amp))
    ph = ph - ph[0]
    total = float(ph[-1])
    if traj.grid[-1] == 1.0 and fr.cyclic:
        total += fr.holonomy(n)
    return total, amp


def residual_overlap(traj: Trajectory) -> float:
    return float(abs(np.vdot(traj.states[0], traj.states[-1])))


def extract_geometric_phase(
    traj: Trajectory, fr: EigenFrame, n: int, T: float | None = None, eps_cyc: float = tol.EPS_CYC
) -> PhaseReport:
    """Split the phase accumulated by a lab-frame evolution of level ``n``.

    The total phase follows ``arg <n(s)|Psi(s)>`` continuously along the
    grid.  Subtracting the dynamical phase leaves the geometric part, which
    tends to :func:`berry_phase` as T grows.
    """
    if traj.frame_tag != FRAME_LAB:
        raise FrameMismatchError("extract_geometric_phase needs a lab-frame trajectory")
    T = traj.config.T if T is None else T
    overlap = residual_overlap(traj)
    if overlap < 1.0 - eps_cyc:
        raise CyclicityError(
            f"evolution is not cyclic enough: |<Psi(0)|Psi(1)>| = {overlap:.4f} < {1 - eps_cyc}"
        )
    total, _ = _level_phase(traj, fr, n)
    dyn = -T * float(fr.energy_integrals_at([traj.grid[-1]])[0, n])
    return PhaseReport(total, dyn, total - dyn, overlap)


def _default_frame(f: HamiltonianFamily, n_grid: int) -> EigenFrame:
    gauge = GAUGE_ANALYTIC if f.spin is not None else GAUGE_NUMERIC
    return eigenframe(f, n_grid, gauge)


def aa_phase(
    traj: Trajectory,
    f: HamiltonianFamily,
    T: float | None = None,
    *,
    frame: EigenFrame | None = None,
    level: int | None = None,
    eps_cyc: float = tol.EPS_CYC,
) -> float:
    """Aharonov-Anandan phase of an (approximately) cyclic evolution.

    gamma_AA = arg <Psi(0)|Psi(1)> + T int_0^1 <Psi|H|Psi> ds.

    ``arg`` is only defined modulo 2 pi.  The branch is taken from the
    continuous phase of the trajectory against the instantaneous level it
    started in (``level``, by default the level with the largest initial
    population), so the result is comparable with :func:`berry_phase`.
    When no ``frame`` is given one is built on the trajectory grid, in the
    closed-form gauge for spin-1/2 families.
    """
    if traj.frame_tag != FRAME_LAB:
        raise FrameMismatchError("aa_phase needs a lab-frame trajectory")
    T = traj.config.T if T is None else T
    overlap = residual_overlap(traj)
    if overlap < 1.0 - eps_cyc:
        raise CyclicityError(
            f"evolution is not cyclic enough: |<Psi(0)|Psi(1)>| = {overlap:.4f} < {1 - eps_cyc}"
        )
    hs = f.sample(traj.grid)
    energy = np.einsum("ki,kij,kj->k", traj.states.conj(), hs, traj.states).real
    dyn = T * float(simpson(energy, x=traj.grid))
    closing = float(np.angle(np.vdot(traj.states[0], traj.states[-1])))
    fr = frame if frame is not None else _default_frame(f, traj.grid.size)
    if level is None:
        level = int(np.argmax(np.abs(fr.vectors[0].conj().T @ traj.states[0])))
    total, _ = _level_phase(traj, fr, level)
    # lift the closing angle onto the branch of the continuously tracked phase
    lifted = total + float(wrap_angle(closing - total))
    return lifted + dyn


def adiabatic_state(fr: EigenFrame, m: int, T: float) -> np.ndarray:
    """The adiabatic-theorem state on the frame grid, shape (N, d).

    exp(-i T int E_m) exp(-int <m|dm>) |m(s)>.
    """
    dyn = np.exp(-1j * T * fr.energy_integrals[:, m])
    geo = np.exp(-connection_integral(fr, m))
    return (dyn * geo)[:, None] * fr.vectors[:, :, m]
