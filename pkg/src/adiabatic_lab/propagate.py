"""Time evolution in the lab frame and in the rotating (adiabatic) frame.

Three formulations of the same dynamics are provided:

* lab frame, ``i d/ds |Psi> = T H(s) |Psi>``;
* rotating frame as an ODE, ``d/ds |phi> = -K_T(s) |phi>``;
* rotating frame as a Volterra integral equation,
  ``|phi(s)> = |phi(0)> - int_0^s K_T(s') |phi(s')> ds'``.

The frames are linked by ``|Psi(s)> = psi(s) |phi(s)>`` where
``psi(s) = sum_n exp(-i T int_0^s E_n) |n(s)><n(0)|`` and the kernel is
``K_T(s)_jk = exp(i T int_0^s (E_j - E_k)) <j(s)|d/ds k(s)>`` expressed in
the frozen basis ``{|n(0)>}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import cumulative_simpson

from adiabatic_lab import linalg
from adiabatic_lab import tolerances as tol
from adiabatic_lab.errors import FrameMismatchError, NumericalError, StepControlError
from adiabatic_lab.hamiltonian import EigenFrame, HamiltonianFamily, berry_connection

METHOD_RK4 = "fixed-step-rk4"
METHOD_MIDPOINT = "exact-step-midpoint"
METHODS = (METHOD_RK4, METHOD_MIDPOINT)

FRAME_LAB = "lab"
FRAME_ROTATING = "rotating"

# steps are assembled into propagator matrices in blocks of this many
_BLOCK = 8192


@dataclass(frozen=True)
class EvolutionConfig:
    T: float
    n_steps: int
    method: str = METHOD_RK4
    osc_resolution: float = tol.DEFAULT_OSC_RESOLUTION

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T >= 0):
            raise ValueError(f"T must be finite and non-negative, got {self.T}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.osc_resolution > 0:
            raise ValueError("osc_resolution must be positive")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_steps + 1)

    def required_steps(self, omega_max: float) -> int:
        return math.ceil(self.osc_resolution * self.T * omega_max / (2 * math.pi))

    def check(self, omega_max: float) -> None:
        need = self.required_steps(omega_max)
        if self.n_steps < need:
            raise StepControlError(
                f"n_steps={self.n_steps} under-resolves the oscillation at T={self.T} "
                f"(omega_max={omega_max:.4g}); need at least {need}"
            )


def suggest_steps(T: float, omega_max: float, per_period: float = 256.0, floor: int = 4096) -> int:
    """A step count resolving each kernel period with ``per_period`` steps.

    Rounded up to a multiple of ``floor`` so that frame grids with
    ``floor + 1`` points remain sub-grids of the trajectory grid.
    """
    n = max(floor, math.ceil(per_period * T * omega_max / (2 * math.pi)))
    return floor * math.ceil(n / floor)


@dataclass(frozen=True)
class Trajectory:
    frame_tag: Literal["lab", "rotating"]
    grid: np.ndarray
    states: np.ndarray
    config: EvolutionConfig

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def index_of(self, s: float) -> int:
        k = int(np.rint(s * self.config.n_steps))
        if not (0 <= k < self.grid.size) or abs(self.grid[k] - s) > 1e-12:
            raise ValueError(f"s={s!r} is not on the trajectory grid")
        return k


@dataclass(frozen=True)
class KernelSample:
    s: float
    matrix: np.ndarray


def frame_max_frequency(fr: EigenFrame) -> float:
    return float(np.max(fr.energies[:, -1] - fr.energies[:, 0]))


def _initial_state(psi0, dim: int) -> np.ndarray:
    v = linalg.as_vector(psi0)
    if v.size != dim:
        raise ValueError(f"initial state has dimension {v.size}, expected {dim}")
    if abs(np.linalg.norm(v) - 1.0) > tol.NORM_TOL:
        raise ValueError(f"initial state must be normalised (norm {np.linalg.norm(v)!r})")
    return v


def _rk4_step_matrices(a0, am, a1, h):
    """Step matrices of classical RK4 for the linear system y' = A(s) y."""
    eye = np.eye(a0.shape[-1], dtype=complex)
    k1 = a0
    k2 = am @ (eye + 0.5 * h * k1)
    k3 = am @ (eye + 0.5 * h * k2)
    k4 = a1 @ (eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _march(step_blocks, y0, n_steps):
    """Apply step matrices sequentially; ``step_blocks`` yields (start, stack)."""
    out = np.empty((n_steps + 1, y0.size), dtype=complex)
    out[0] = y = y0
    for start, mats in step_blocks:
        for j, m in enumerate(mats):
            y = m @ y
            out[start + j + 1] = y
    return out


def _generator_blocks(generator, cfg: EvolutionConfig):
    """Yield step matrices for ``y' = generator(s) y`` block by block.

    ``generator(s)`` returns a stack of matrices at the requested points.
    """
    n, h = cfg.n_steps, 1.0 / cfg.n_steps
    for start in range(0, n, _BLOCK):
        stop = min(n, start + _BLOCK)
        k = np.arange(start, stop)
        if cfg.method == METHOD_RK4:
            pts = np.concatenate([k * h, (k + 0.5) * h, (k + 1) * h])
            g = generator(pts)
            m = k.size
            yield start, _rk4_step_matrices(g[:m], g[m : 2 * m], g[2 * m :], h)
        else:
            g = generator((k + 0.5) * h)
            # exp(h G) with G = -i M, M Hermitian  ->  expm_step(M, h)
            yield start, linalg.expm_step_stack(1j * g, np.full(k.size, h))


def _finish(tag, states, cfg) -> Trajectory:
    if not np.all(np.isfinite(states)):
        raise NumericalError("propagation produced non-finite amplitudes")
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if drift > tol.NORM_TOL:
        raise NumericalError(f"norm drifted by {drift:.3e} (> {tol.NORM_TOL}); increase n_steps")
    states.setflags(write=False)
    grid = cfg.grid
    grid.setflags(write=False)
    return Trajectory(tag, grid, states, cfg)


def evolve_lab(f: HamiltonianFamily, psi0, cfg: EvolutionConfig) -> Trajectory:
    """Solve ``i d/ds |Psi> = T H(s) |Psi>`` on the uniform grid of ``cfg``."""
    y0 = _initial_state(psi0, f.dim)
    cfg.check(f.max_frequency())
    if cfg.T == 0:
        return _finish(FRAME_LAB, np.tile(y0, (cfg.n_steps + 1, 1)), cfg)
    states = _march(_generator_blocks(lambda s: -1j * cfg.T * f.sample(s), cfg), y0, cfg.n_steps)
    return _finish(FRAME_LAB, states, cfg)


def adiabatic_map(fr: EigenFrame, T: float, s: float) -> np.ndarray:
    """The adiabatic transformation ``psi(sT)`` at a grid point of ``fr``."""
    k = fr.index_of(s)
    phases = np.exp(-1j * T * fr.energy_integrals[k])
    return (fr.vectors[k] * phases) @ fr.vectors[0].conj().T


def kernel_stack(fr: EigenFrame, T: float, s) -> np.ndarray:
    """K_T at each of the points ``s``, shape (len(s), d, d), frozen basis."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    _, v, dv = fr.sample(s)
    coupling = np.conj(np.swapaxes(v, -1, -2)) @ dv
    theta = T * fr.energy_integrals_at(s)
    osc = np.exp(1j * (theta[:, :, None] - theta[:, None, :]))
    return osc * coupling


def kernel_KT(fr: EigenFrame, T: float, s: float) -> KernelSample:
    return KernelSample(float(s), kernel_stack(fr, T, [s])[0])


def evolve_rotating_ode(fr: EigenFrame, phi0, cfg: EvolutionConfig) -> Trajectory:
    """Solve ``d/ds |phi> = -K_T(s) |phi>`` with the method of ``cfg``.

    States are returned in the computational basis; internally the
    coefficients ``<n(0)|phi>`` are propagated.
    """
    c0 = fr.vectors[0].conj().T @ _initial_state(phi0, fr.dim)
    cfg.check(frame_max_frequency(fr))
    blocks = _generator_blocks(lambda s: -kernel_stack(fr, cfg.T, s), cfg)
    coeffs = _march(blocks, c0, cfg.n_steps)
    return _finish(FRAME_ROTATING, coeffs @ fr.vectors[0].T, cfg)


def evolve_rotating_volterra(fr: EigenFrame, phi0, cfg: EvolutionConfig) -> Trajectory:
    """March the Volterra form ``phi(s) = phi(0) - int_0^s K_T phi`` with the trapezoid rule.

    The quadrature over [0, s_{k+1}] reuses every stored value; only the new
    end-point term is unknown, and it is solved for directly:

        (I + h/2 K_{k+1}) phi_{k+1} = phi_0 - h (K_0 phi_0 / 2 + sum_{j=1..k} K_j phi_j)

    ``cfg.method`` is ignored; the scheme is second order.
    """
    y0 = fr.vectors[0].conj().T @ _initial_state(phi0, fr.dim)
    cfg.check(frame_max_frequency(fr))
    n, h = cfg.n_steps, 1.0 / cfg.n_steps
    d = fr.dim
    eye = np.eye(d, dtype=complex)
    states = np.empty((n + 1, d), dtype=complex)
    states[0] = y0
    acc = None
    for start in range(0, n + 1, _BLOCK):
        stop = min(n + 1, start + _BLOCK)
        kmats = kernel_stack(fr, cfg.T, np.arange(start, stop) * h)
        try:
            solvers = np.linalg.inv(eye + 0.5 * h * kmats)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular end-point system in Volterra march") from exc
        for j in range(stop - start):
            k = start + j
            if k == 0:
                acc = 0.5 * (kmats[0] @ y0)
                continue
            y = solvers[j] @ (y0 - h * acc)
            states[k] = y
            acc = acc + kmats[j] @ y
    return _finish(FRAME_ROTATING, states @ fr.vectors[0].T, cfg)


def lab_from_rotating(traj: Trajectory, fr: EigenFrame) -> np.ndarray:
    """Map rotating-frame states to the lab frame, ``psi(s) phi(s)``."""
    if traj.frame_tag != FRAME_ROTATING:
        raise FrameMismatchError("expected a rotating-frame trajectory")
    return np.stack(
        [adiabatic_map(fr, traj.config.T, s) @ y for s, y in zip(traj.grid, traj.states)]
    )


def coefficients(traj: Trajectory, fr: EigenFrame) -> np.ndarray:
    """``C_m(s_k) = <m(0)|phi(s_k)>``, shape (N, d)."""
    if traj.frame_tag != FRAME_ROTATING:
        raise FrameMismatchError("coefficients need a rotating-frame trajectory")
    if traj.states.shape[1] != fr.dim:
        raise FrameMismatchError("trajectory and frame dimensions differ")
    return traj.states @ fr.vectors[0].conj()


def connection_integral(fr: EigenFrame, m: int) -> np.ndarray:
    """``int_0^{s_k} <m|d/ds m> ds'`` on the frame grid (cumulative Simpson)."""
    a = berry_connection(fr, m)
    # scipy's cumulative Simpson silently drops imaginary parts
    re = cumulative_simpson(a.real, x=fr.grid, initial=0.0)
    im = cumulative_simpson(a.imag, x=fr.grid, initial=0.0)
    return re + 1j * im


def phi_limit(fr: EigenFrame, m: int) -> np.ndarray:
    """Adiabatic-limit rotating state ``exp(-int_0^s <m|dm>) |m(0)>`` on the frame grid."""
    return np.exp(-connection_integral(fr, m))[:, None] * fr.vectors[0][:, m][None, :]
