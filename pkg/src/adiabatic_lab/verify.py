"""Numerical experiments on the adiabatic limit.

* ``ms_check`` compares the eigenstate overlap <m(0)|m(s)> with the
  exponentiated connection integral (the relation that forces a trivial
  Berry factor when it holds on a closed loop).
* ``restriction_residual`` / ``projection_harness`` measure how far a frame
  is from having vanishing off-diagonal couplings.
* ``limit_commutation_probe`` shows that the finite-T rotating state
  converges to its adiabatic limit while its s-derivative does not.
* ``adiabatic_sweep`` measures convergence of lab-frame evolution towards
  the adiabatic state as T grows.
* ``vanishing_phase_scan`` scans the spin-1/2 polar angle for frames that satisfy
  the restriction, and reports their (trivial) Berry factors.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from adiabatic_lab import tolerances as tol
from adiabatic_lab.errors import AdiabaticLabError, StepControlError
from adiabatic_lab.hamiltonian import (
    GAUGE_ANALYTIC,
    GAUGE_NUMERIC,
    SPIN_DOWN,
    SPIN_UP,
    EigenFrame,
    HamiltonianFamily,
    SpinHalfParams,
    berry_connection,
    build_spin_half,
    eigenframe,
    offdiag_coupling,
)
from adiabatic_lab.phases import adiabatic_state, berry_phase, extract_geometric_phase
from adiabatic_lab.propagate import (
    METHOD_RK4,
    EvolutionConfig,
    connection_integral,
    evolve_lab,
    evolve_rotating_volterra,
    frame_max_frequency,
    kernel_KT,
    phi_limit,
    suggest_steps,
)

THREADS_ENV = "ADIABATIC_LAB_THREADS"


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, min(4, os.cpu_count() or 1))


def _map_by_T(fn, T_list, max_workers):
    """Evaluate ``fn(T)`` for each T (possibly concurrently), ordered by T."""
    ts = sorted(float(t) for t in T_list)
    workers = default_workers() if max_workers is None else max(1, int(max_workers))
    if workers == 1 or len(ts) == 1:
        return [fn(t) for t in ts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, ts))


# ---------------------------------------------------------------------------
# overlap vs exponentiated connection


@dataclass(frozen=True)
class MsReport:
    grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    gap: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gap))

    def at(self, s: float) -> tuple[complex, complex, float]:
        k = int(np.argmin(np.abs(self.grid - s)))
        return complex(self.lhs[k]), complex(self.rhs[k]), float(self.gap[k])


def ms_check(fr: EigenFrame, m: int) -> MsReport:
    """Both sides of <m(0)|m(s)> = exp(int_0^s <m|dm>) on the frame grid."""
    lhs = fr.vectors[:, :, m] @ fr.vectors[0][:, m].conj()
    rhs = np.exp(connection_integral(fr, m))
    return MsReport(fr.grid, lhs, rhs, np.abs(lhs - rhs))


def restriction_residual(fr: EigenFrame) -> float:
    """max over s and n != m of |<n(s)|d/ds m(s)>|."""
    d = fr.dim
    if d < 2:
        return 0.0
    best = 0.0
    for n in range(d):
        for m in range(d):
            if n != m:
                best = max(best, float(np.max(np.abs(offdiag_coupling(fr, n, m)))))
    return best


@dataclass(frozen=True)
class ProjectionReport:
    projection_residual: float
    coupling_residual: float
    overlap_gap: float


def projected_derivative_residual(fr: EigenFrame) -> float:
    """max over s, m of || d|m> - <m|dm> |m> ||."""
    v, dv = fr.vectors, fr.dvectors
    conn = np.einsum("kim,kim->km", v.conj(), dv)
    phi = dv - conn[:, None, :] * v
    return float(np.max(np.linalg.norm(phi, axis=1)))


def projection_harness(fr: EigenFrame) -> ProjectionReport:
    gap = max(ms_check(fr, m).max_gap for m in range(fr.dim))
    return ProjectionReport(projected_derivative_residual(fr), restriction_residual(fr), gap)


# ---------------------------------------------------------------------------
# limit / derivative commutation


@dataclass(frozen=True)
class ProbeRow:
    T: float
    n_steps: int
    state_gap: float
    derivative_gap: float
    max_state_gap: float


@dataclass(frozen=True)
class ProbeResult:
    s: float
    level: int
    coupling: float
    rows: list = field(default_factory=list)

    @property
    def T(self) -> np.ndarray:
        return np.array([r.T for r in self.rows])

    @property
    def state_gaps(self) -> np.ndarray:
        return np.array([r.state_gap for r in self.rows])

    @property
    def derivative_gaps(self) -> np.ndarray:
        return np.array([r.derivative_gap for r in self.rows])


def limit_commutation_probe(
    fr: EigenFrame,
    s: float,
    T_list: Sequence[float],
    level: Optional[int] = None,
    *,
    steps_per_period: float = 256.0,
    min_steps: int = 65536,
    max_workers: Optional[int] = None,
) -> ProbeResult:
    """Compare phi_T and d/ds phi_T with their adiabatic limits at ``s``.

    phi_T comes from the Volterra march started in ``|level(0)>`` (default:
    the highest level); d/ds phi_T = -K_T(s) phi_T(s).  The limit state is
    exp(-int <m|dm>) |m(0)> and its derivative -<m|dm> times itself.
    """
    m = fr.dim - 1 if level is None else level
    k_frame = fr.index_of(s)
    if not (0 < k_frame < fr.n_grid - 1):
        raise ValueError("probe point must be an interior grid point")
    ts = [float(t) for t in T_list]
    if ts != sorted(ts):
        raise ValueError("T_list must be ascending")
    limit = phi_limit(fr, m)
    conn = berry_connection(fr, m)
    v0 = fr.vectors[0]
    coupling = max(
        (abs(complex(offdiag_coupling(fr, n, m)[k_frame])) for n in range(fr.dim) if n != m),
        default=0.0,
    )
    omega = frame_max_frequency(fr)
    floor = fr.n_grid - 1

    def run(T):
        n = suggest_steps(T, omega, steps_per_period, floor=max(floor, min_steps))
        n = floor * math.ceil(n / floor)
        traj = evolve_rotating_volterra(fr, v0[:, m], EvolutionConfig(T, n))
        stride = n // floor
        on_frame = traj.states[::stride]
        k = traj.index_of(s)
        phi_t = traj.states[k]
        state_gap = float(np.linalg.norm(phi_t - limit[k_frame]))
        kmat = kernel_KT(fr, T, s).matrix
        # -K phi_T in the computational basis; the limit derivative is -A phi_inf
        d_phi_t = -(v0 @ (kmat @ (v0.conj().T @ phi_t)))
        d_phi_inf = -conn[k_frame] * limit[k_frame]
        deriv_gap = float(np.linalg.norm(d_phi_t - d_phi_inf))
        max_gap = float(np.max(np.linalg.norm(on_frame - limit, axis=1)))
        return ProbeRow(T, n, state_gap, deriv_gap, max_gap)

    rows = _map_by_T(run, ts, max_workers)
    return ProbeResult(float(s), m, coupling, rows)


# ---------------------------------------------------------------------------
# adiabatic convergence sweep


@dataclass(frozen=True)
class SweepEntry:
    T: float
    n_steps: int
    fidelity_error: float
    transition_prob: float
    transition_prob_peak: float
    geometric_phase_error: float
    status: str = "ok"


@dataclass(frozen=True)
class SweepResult:
    level: int
    entries: list

    @property
    def T(self) -> np.ndarray:
        return np.array([e.T for e in self.entries])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(e, name) for e in self.entries], dtype=float)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def frame_for(f: HamiltonianFamily, n_grid: int) -> EigenFrame:
    return eigenframe(f, n_grid, GAUGE_ANALYTIC if f.spin is not None else GAUGE_NUMERIC)


def adiabatic_sweep(
    f: HamiltonianFamily,
    m: int,
    T_list: Sequence[float],
    *,
    method: str = METHOD_RK4,
    steps_per_period: float = 256.0,
    min_steps: int = 4096,
    n_steps: Optional[int] = None,
    osc_resolution: float = tol.DEFAULT_OSC_RESOLUTION,
    max_workers: Optional[int] = None,
) -> SweepResult:
    """Lab-frame evolution from ``|m(0)>`` for each T, scored against the adiabatic state.

    ``transition_prob`` is the population outside level ``m`` at s = 1;
    ``transition_prob_peak`` is its maximum over the whole grid.  The
    geometric-phase error is measured against :func:`berry_phase` and is NaN
    for non-cyclic families.  Failures for one T (e.g. a fixed ``n_steps``
    that violates step control) are recorded in ``status``.
    """
    omega = f.max_frequency()

    def run(T):
        n = n_steps if n_steps is not None else suggest_steps(T, omega, steps_per_period, floor=min_steps)
        try:
            fr = frame_for(f, n + 1)
            cfg = EvolutionConfig(T, n, method, osc_resolution)
            traj = evolve_lab(f, fr.vectors[0][:, m], cfg)
        except StepControlError as exc:
            nan = float("nan")
            return SweepEntry(T, n, nan, nan, nan, nan, f"step-control: {exc}")
        except AdiabaticLabError as exc:
            nan = float("nan")
            return SweepEntry(T, n, nan, nan, nan, nan, f"{type(exc).__name__}: {exc}")
        target = adiabatic_state(fr, m, T)[-1]
        fidelity_error = 1.0 - abs(np.vdot(target, traj.final))
        pops = np.abs(np.einsum("kin,ki->kn", fr.vectors.conj(), traj.states)) ** 2
        leak = 1.0 - pops[:, m]
        leak = np.clip(leak, 0.0, 1.0)
        status = "ok"
        geo_err = float("nan")
        if f.cyclic:
            try:
                report = extract_geometric_phase(traj, fr, m, T)
                geo_err = abs(report.geometric_phase - berry_phase(fr, m))
            except AdiabaticLabError as exc:
                status = f"{type(exc).__name__}: {exc}"
        return SweepEntry(T, n, float(fidelity_error), float(leak[-1]), float(np.max(leak)), geo_err, status)

    return SweepResult(m, _map_by_T(run, T_list, max_workers))


# ---------------------------------------------------------------------------
# spin-1/2 polar-angle scan


@dataclass(frozen=True)
class PolarScanRow:
    theta: float
    residual: float
    gamma: float
    factor: complex

    @property
    def satisfies_restriction(self) -> bool:
        return self.residual <= tol.RESIDUAL_GATE


@dataclass(frozen=True)
class PolarScanResult:
    rows: list

    @property
    def zero_residual_thetas(self) -> list[float]:
        return [r.theta for r in self.rows if r.satisfies_restriction]

    @property
    def zero_residual_rows(self) -> list[PolarScanRow]:
        return [r for r in self.rows if r.satisfies_restriction]


def vanishing_phase_scan(mu_b: float, theta_grid: Sequence[float], n_grid: int = 4097) -> PolarScanResult:
    """Off-diagonal coupling and Berry phase of the upper level across theta."""
    rows = []
    for theta in theta_grid:
        fr = eigenframe(build_spin_half(SpinHalfParams(mu_b, float(theta))), n_grid, GAUGE_ANALYTIC)
        residual = float(np.max(np.abs(offdiag_coupling(fr, SPIN_UP, SPIN_DOWN))))
        gamma = berry_phase(fr, SPIN_UP)
        rows.append(PolarScanRow(float(theta), residual, gamma, complex(np.exp(1j * gamma))))
    return PolarScanResult(rows)
