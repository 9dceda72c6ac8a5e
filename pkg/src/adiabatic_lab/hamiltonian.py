"""Hamiltonian families H(s), s in [0, 1], and their instantaneous eigenframes.

A family is a map from the scaled time ``s = t/T`` to a Hermitian matrix.
An :class:`EigenFrame` samples the instantaneous spectrum and eigenvectors
of a family on a uniform grid, with a smooth (continuous) gauge, together
with the s-derivatives of the eigenvectors.  Frames also know how to
evaluate themselves between grid points, which the RK4 propagators need at
half steps.

Levels are indexed by ascending energy.  For the spin-1/2 rotating-field
model level 0 is spin-down (energy -mu_b) and level 1 is spin-up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from adiabatic_lab import linalg
from adiabatic_lab import tolerances as tol
from adiabatic_lab.errors import (
    CyclicityError,
    DegenerateSpectrumError,
    GridError,
    NotHermitianError,
    NumericalError,
)

SPIN_DOWN = 0
SPIN_UP = 1

GAUGE_NUMERIC = "numeric-continuous"
GAUGE_ANALYTIC = "analytic-spin-half"


@dataclass(frozen=True)
class SpinHalfParams:
    """Field strength ``mu_b`` (energy units, hbar = 1) and polar angle ``theta``."""

    mu_b: float
    theta: float

    def __post_init__(self):
        if not (np.isfinite(self.mu_b) and self.mu_b > 0):
            raise ValueError(f"mu_b must be finite and positive, got {self.mu_b}")
        if not (0.0 <= self.theta <= np.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


@dataclass(frozen=True)
class HamiltonianFamily:
    """A map ``s -> H(s)`` with optional analytic derivative ``dH/ds``.

    ``evaluate`` and ``derivative`` take a 1-d array of s values and return a
    stack ``(len(s), dim, dim)``.  Use :meth:`__call__` for a single point.
    """

    dim: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    cyclic: bool = False
    label: str = ""
    spin: Optional[SpinHalfParams] = None

    def __post_init__(self):
        probe = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        hs = self.sample(probe)
        if hs.shape != (probe.size, self.dim, self.dim):
            raise ValueError(f"family returned shape {hs.shape}, expected (5, {self.dim}, {self.dim})")
        for s, h in zip(probe, hs):
            if linalg.hermiticity_defect(h) > tol.HERMITIAN_RTOL:
                raise NotHermitianError(f"H({s}) is not Hermitian")
        if self.cyclic and np.max(np.abs(hs[-1] - hs[0])) > tol.CYCLIC_TOL:
            raise CyclicityError(f"family {self.label!r} flagged cyclic but H(1) != H(0)")

    def __call__(self, s: float) -> np.ndarray:
        return self.sample(np.array([float(s)]))[0]

    def sample(self, s) -> np.ndarray:
        return np.asarray(self.evaluate(np.atleast_1d(np.asarray(s, dtype=float))), dtype=complex)

    def sample_derivative(self, s, step: float = 1e-4) -> np.ndarray:
        """dH/ds at ``s``; central differences of H when no analytic form exists.

        Near the ends of [0, 1] the three-point one-sided formula is used so
        the family is never evaluated outside its domain.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.derivative is not None:
            return np.asarray(self.derivative(s), dtype=complex)
        out = np.empty((s.size, self.dim, self.dim), dtype=complex)
        lo = s - step < 0.0
        hi = s + step > 1.0
        mid = ~(lo | hi)
        if mid.any():
            sm = s[mid]
            out[mid] = (self.sample(sm + step) - self.sample(sm - step)) / (2 * step)
        if lo.any():
            sl = s[lo]
            out[lo] = (-3 * self.sample(sl) + 4 * self.sample(sl + step) - self.sample(sl + 2 * step)) / (2 * step)
        if hi.any():
            sh = s[hi]
            out[hi] = (3 * self.sample(sh) - 4 * self.sample(sh - step) + self.sample(sh - 2 * step)) / (2 * step)
        return out

    def max_frequency(self, n_probe: int = 257) -> float:
        """max over s of the largest level spacing, used for step control."""
        values = np.linalg.eigvalsh(self.sample(np.linspace(0.0, 1.0, n_probe)))
        return float(np.max(values[:, -1] - values[:, 0]))


def build_spin_half(p: SpinHalfParams) -> HamiltonianFamily:
    """Spin-1/2 in a field of strength ``mu_b`` precessing once about z at polar angle theta."""
    st, ct = np.sin(p.theta), np.cos(p.theta)

    def evaluate(s):
        phi = 2 * np.pi * s
        out = np.empty((s.size, 2, 2), dtype=complex)
        out[:, 0, 0] = p.mu_b * ct
        out[:, 1, 1] = -p.mu_b * ct
        out[:, 0, 1] = p.mu_b * st * np.exp(-1j * phi)
        out[:, 1, 0] = p.mu_b * st * np.exp(1j * phi)
        return out

    def derivative(s):
        phi = 2 * np.pi * s
        out = np.zeros((s.size, 2, 2), dtype=complex)
        out[:, 0, 1] = -2j * np.pi * p.mu_b * st * np.exp(-1j * phi)
        out[:, 1, 0] = 2j * np.pi * p.mu_b * st * np.exp(1j * phi)
        return out

    return HamiltonianFamily(
        dim=2,
        evaluate=evaluate,
        derivative=derivative,
        cyclic=True,
        label=f"spin-half(mu_b={p.mu_b!r}, theta={p.theta!r})",
        spin=p,
    )


def build_constant(h0, label: str = "constant") -> HamiltonianFamily:
    h0 = linalg.as_hermitian(h0).copy()
    h0.setflags(write=False)
    d = h0.shape[0]
    return HamiltonianFamily(
        dim=d,
        evaluate=lambda s: np.broadcast_to(h0, (s.size, d, d)).copy(),
        derivative=lambda s: np.zeros((s.size, d, d), dtype=complex),
        cyclic=True,
        label=label,
    )


def build_sampled_grid(samples, label: str = "sampled-grid") -> HamiltonianFamily:
    """Entry-wise linear interpolation of H given on a uniform grid over [0, 1].

    The interpolant is re-symmetrised so every evaluation is exactly
    Hermitian.  The family is cyclic when the first and last samples agree.
    """
    hs = np.asarray(samples, dtype=complex)
    if hs.ndim != 3 or hs.shape[0] < 2 or hs.shape[1] != hs.shape[2]:
        raise ValueError(f"samples must have shape (n >= 2, d, d), got {hs.shape}")
    for k, h in enumerate(hs):
        if linalg.hermiticity_defect(h) > tol.HERMITIAN_RTOL:
            raise NotHermitianError(f"sample {k} is not Hermitian")
    n = hs.shape[0]
    hs = hs.copy()
    hs.setflags(write=False)
    slopes = np.diff(hs, axis=0) * (n - 1)

    def locate(s):
        x = np.clip(s, 0.0, 1.0) * (n - 1)
        k = np.minimum(np.floor(x).astype(int), n - 2)
        return k, (x - k)[:, None, None]

    def evaluate(s):
        k, w = locate(s)
        h = (1 - w) * hs[k] + w * hs[k + 1]
        return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))

    def derivative(s):
        k, _ = locate(s)
        d = slopes[k]
        return 0.5 * (d + np.conj(np.swapaxes(d, -1, -2)))

    cyclic = bool(np.max(np.abs(hs[-1] - hs[0])) <= tol.CYCLIC_TOL)
    return HamiltonianFamily(
        dim=hs.shape[1], evaluate=evaluate, derivative=derivative, cyclic=cyclic, label=label
    )


def build_conjugated(d0, generator, label: str = "conjugated") -> HamiltonianFamily:
    """H(s) = U(s) diag(d0) U(s)^H with U(s) = exp(-2 pi i s K).

    Cyclic whenever K has integer spectrum, since then U(1) = I.
    """
    d0 = np.asarray(d0, dtype=float)
    k = linalg.as_hermitian(generator)
    kv, kw = np.linalg.eigh(k)
    h0 = np.diag(d0).astype(complex)

    def unitary(s):
        ph = np.exp(-2j * np.pi * s[:, None] * kv[None, :])
        return (kw[None] * ph[:, None, :]) @ kw.conj().T[None]

    def evaluate(s):
        u = unitary(s)
        return u @ h0 @ np.conj(np.swapaxes(u, -1, -2))

    def derivative(s):
        u = unitary(s)
        h = u @ h0 @ np.conj(np.swapaxes(u, -1, -2))
        # d/ds (U H0 U^H) = -2 pi i [K, H]
        return -2j * np.pi * (k @ h - h @ k)

    cyclic = bool(np.allclose(kv, np.round(kv), atol=1e-12, rtol=0))
    return HamiltonianFamily(
        dim=d0.size, evaluate=evaluate, derivative=derivative, cyclic=cyclic, label=label
    )


# ---------------------------------------------------------------------------
# eigenframes

# sampler(s) -> (energies (M, d), vectors (M, d, d), dvectors (M, d, d))
Sampler = Callable[[np.ndarray], tuple]


@dataclass(frozen=True)
class EigenFrame:
    """Gauge-fixed instantaneous eigensystem on a uniform grid.

    ``vectors[k][:, n]`` is ``|n(s_k)>`` and ``dvectors[k][:, n]`` its
    s-derivative.  ``sampler`` evaluates the same smooth gauge between grid
    points.
    """

    grid: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    dvectors: np.ndarray
    analytic: bool
    cyclic: bool
    sampler: Sampler = field(repr=False)
    label: str = ""

    @property
    def dim(self) -> int:
        return self.energies.shape[1]

    @property
    def n_grid(self) -> int:
        return self.grid.size

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def index_of(self, s: float) -> int:
        k = int(np.rint(s / self.spacing))
        if not (0 <= k < self.n_grid) or abs(self.grid[k] - s) > 1e-12:
            raise GridError(f"s={s!r} is not a point of the {self.n_grid}-point frame grid")
        return k

    def sample(self, s):
        """Energies, vectors and derivatives at arbitrary ``s`` (stored values on the grid)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.rint(s / self.spacing).astype(int)
        inside = (k >= 0) & (k < self.n_grid)
        on_grid = inside.copy()
        on_grid[inside] = np.abs(self.grid[k[inside]] - s[inside]) <= 1e-14
        e = np.empty((s.size, self.dim))
        v = np.empty((s.size, self.dim, self.dim), dtype=complex)
        dv = np.empty_like(v)
        if on_grid.any():
            kk = k[on_grid]
            e[on_grid], v[on_grid], dv[on_grid] = self.energies[kk], self.vectors[kk], self.dvectors[kk]
        off = ~on_grid
        if off.any():
            e[off], v[off], dv[off] = self.sampler(s[off])
        return e, v, dv

    @cached_property
    def energy_integrals(self) -> np.ndarray:
        """Cumulative trapezoid of E_n over the grid, shape (N, d)."""
        return cumulative_trapezoid(self.energies, self.grid, axis=0, initial=0.0)

    def energy_integrals_at(self, s) -> np.ndarray:
        """Integral of E_n from 0 to s, continuing the grid trapezoid rule off-grid."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.clip(np.floor(s / self.spacing + 1e-9).astype(int), 0, self.n_grid - 1)
        base = self.energy_integrals[k]
        rem = s - self.grid[k]
        out = base.copy()
        part = rem > 1e-14
        if part.any():
            e_s, _, _ = self.sampler(s[part])
            out[part] += 0.5 * rem[part, None] * (self.energies[k[part]] + e_s)
        return out

    def overlaps(self, n: int) -> np.ndarray:
        """``<n(s_k)|n(s_{k+1})>`` for consecutive grid points."""
        v = self.vectors[:, :, n]
        return np.einsum("ki,ki->k", v[:-1].conj(), v[1:])

    def holonomy(self, n: int) -> float:
        """Phase alpha with |n(1)> = e^{i alpha} |n(0)> (0 for single-valued gauges)."""
        if not self.cyclic:
            raise CyclicityError(f"frame {self.label!r} is not cyclic")
        ov = np.vdot(self.vectors[0][:, n], self.vectors[-1][:, n])
        if abs(abs(ov) - 1.0) > 1e-6:
            raise CyclicityError(f"level {n} does not close on itself (|overlap| = {abs(ov):.3e})")
        return float(np.angle(ov))


def _check_frame(fr: EigenFrame) -> EigenFrame:
    n_pts, d = fr.energies.shape
    gram = np.conj(np.swapaxes(fr.vectors, -1, -2)) @ fr.vectors
    defect = np.max(np.abs(gram - np.eye(d)))
    if defect > tol.FRAME_ORTHONORMAL_TOL:
        raise NumericalError(f"frame vectors not orthonormal (defect {defect:.3e})")
    if d > 1:
        gaps = np.min(np.diff(fr.energies, axis=1), axis=1)
        scale = np.max(np.abs(fr.energies), axis=1)
        bad = np.nonzero(gaps <= tol.GAP_RTOL * scale)[0]
        if bad.size:
            s_bad = float(fr.grid[bad[0]])
            raise DegenerateSpectrumError(f"degenerate spectrum at s={s_bad!r}", s=s_bad)
    for n in range(d):
        ov = fr.overlaps(n)
        jump = np.maximum(np.abs(np.angle(ov)), np.arccos(np.clip(np.abs(ov), 0.0, 1.0)))
        if np.any(ov.real <= 0) or np.max(jump) > tol.MAX_NEIGHBOUR_JUMP:
            k = int(np.argmax(jump))
            raise GridError(
                f"grid too coarse: level {n} jumps by {jump[k]:.3f} rad near s={fr.grid[k]!r}"
            )
    return fr


def _perturbative_derivative(values, vectors, dh):
    """Parallel-transport derivative of eigenvectors from dH/ds.

    d|n> = sum_{m != n} |m> <m|dH|n> / (E_n - E_m), with no component along |n>.
    """
    vh = np.conj(np.swapaxes(vectors, -1, -2))
    x = vh @ dh @ vectors
    denom = values[:, None, :] - values[:, :, None]
    d = values.shape[1]
    off = ~np.eye(d, dtype=bool)
    coef = np.zeros_like(x)
    coef[:, off] = x[:, off] / denom[:, off]
    return vectors @ coef


def _align_to(raw, reference):
    """Rephase columns of ``raw`` so each overlap with ``reference`` is real positive."""
    ov = np.einsum("...in,...in->...n", reference.conj(), raw)
    mag = np.abs(ov)
    if np.any(mag < 1e-3):
        raise GridError("eigenvector changed too much between neighbouring points to track its phase")
    return raw * (ov.conj() / mag)[..., None, :]


def _numeric_frame(f: HamiltonianFamily, n_grid: int) -> EigenFrame:
    grid = np.linspace(0.0, 1.0, n_grid)
    step = float(grid[1] - grid[0])
    hs = f.sample(grid)
    values, raw = linalg.eigh_stack(hs)
    if f.dim > 1:
        gaps = np.min(np.diff(values, axis=1), axis=1)
        scale = np.max(np.abs(values), axis=1)
        bad = np.nonzero(gaps <= tol.GAP_RTOL * scale)[0]
        if bad.size:
            s_bad = float(grid[bad[0]])
            raise DegenerateSpectrumError(f"degenerate spectrum at s={s_bad!r}", s=s_bad)
    raw[0] = linalg.fix_phase(raw[0])
    # continuous gauge: <n(s_k)|n(s_{k+1})> real positive, accumulated as angles
    ov = np.einsum("kin,kin->kn", raw[:-1].conj(), raw[1:])
    if np.any(np.abs(ov) < 1e-3):
        k = int(np.argmin(np.min(np.abs(ov), axis=1)))
        raise GridError(f"grid too coarse to track eigenvectors near s={grid[k]!r}")
    # raw[0] was rephased above, so the first overlap already refers to it
    shifts = np.concatenate([np.zeros((1, f.dim)), np.cumsum(-np.angle(ov), axis=0)])
    vectors = raw * np.exp(1j * shifts)[:, None, :]
    dh = f.sample_derivative(grid, step=step)
    dvectors = _perturbative_derivative(values, vectors, dh)

    def sampler(s):
        s = np.atleast_1d(s)
        e, w = linalg.eigh_stack(f.sample(s))
        k = np.clip(np.rint(s / step).astype(int), 0, n_grid - 1)
        w = _align_to(w, vectors[k])
        dv = _perturbative_derivative(e, w, f.sample_derivative(s, step=step))
        return e, w, dv

    return EigenFrame(
        grid=grid,
        energies=values,
        vectors=vectors,
        dvectors=dvectors,
        analytic=False,
        cyclic=f.cyclic,
        sampler=sampler,
        label=f.label,
    )


def spin_half_sampler(p: SpinHalfParams) -> Sampler:
    """Closed-form eigensystem of the rotating-field model (single-valued gauge)."""
    c, sn = np.cos(p.theta / 2), np.sin(p.theta / 2)

    def sampler(s):
        s = np.atleast_1d(s)
        ph = np.exp(2j * np.pi * s)
        e = np.empty((s.size, 2))
        e[:, SPIN_DOWN] = -p.mu_b
        e[:, SPIN_UP] = p.mu_b
        v = np.zeros((s.size, 2, 2), dtype=complex)
        dv = np.zeros_like(v)
        v[:, 0, SPIN_UP] = c
        v[:, 1, SPIN_UP] = sn * ph
        v[:, 0, SPIN_DOWN] = -sn * ph.conj()
        v[:, 1, SPIN_DOWN] = c
        dv[:, 1, SPIN_UP] = 2j * np.pi * sn * ph
        dv[:, 0, SPIN_DOWN] = 2j * np.pi * sn * ph.conj()
        return e, v, dv

    return sampler


def frame_from_sampler(
    sampler: Sampler, n_grid: int, *, cyclic: bool, label: str = "", analytic: bool = True
) -> EigenFrame:
    """Build a frame from a closed-form eigensystem evaluated on a uniform grid."""
    if n_grid < tol.MIN_FRAME_GRID:
        raise GridError(f"n_grid must be >= {tol.MIN_FRAME_GRID}, got {n_grid}")
    grid = np.linspace(0.0, 1.0, n_grid)
    e, v, dv = sampler(grid)
    fr = EigenFrame(
        grid=grid, energies=e, vectors=v, dvectors=dv, analytic=analytic,
        cyclic=cyclic, sampler=sampler, label=label,
    )
    return _check_frame(fr)


def eigenframe(f: HamiltonianFamily, n_grid: int, gauge: str = GAUGE_NUMERIC) -> EigenFrame:
    """Instantaneous eigenframe of ``f`` on ``n_grid`` uniform points.

    ``gauge`` is ``"numeric-continuous"`` (diagonalise and parallel-align
    neighbours; any end-point mismatch is kept as holonomy) or
    ``"analytic-spin-half"`` (closed-form eigenvectors, spin-1/2 only).
    """
    if n_grid < tol.MIN_FRAME_GRID:
        raise GridError(f"n_grid must be >= {tol.MIN_FRAME_GRID}, got {n_grid}")
    if gauge == GAUGE_ANALYTIC:
        if f.spin is None:
            raise ValueError("analytic gauge is only available for spin-half families")
        return frame_from_sampler(spin_half_sampler(f.spin), n_grid, cyclic=True, label=f.label)
    if gauge != GAUGE_NUMERIC:
        raise ValueError(f"unknown gauge {gauge!r}")
    return _check_frame(_numeric_frame(f, n_grid))


def phase_only_frame(energies, betas, dbetas, n_grid: int, basis=None, label: str = "phase-only") -> EigenFrame:
    """Frame whose eigenvectors only acquire phases: |n(s)> = e^{i beta_n(s)} |n(0)>.

    ``betas(s)`` and ``dbetas(s)`` return arrays ``(len(s), d)``.  This is
    the family for which the projected-derivative condition holds exactly.
    """
    energies = np.asarray(energies, dtype=float)
    d = energies.size
    basis = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)

    def sampler(s):
        s = np.atleast_1d(s)
        ph = np.exp(1j * np.asarray(betas(s)))
        v = basis[None] * ph[:, None, :]
        dv = 1j * np.asarray(dbetas(s))[:, None, :] * v
        return np.broadcast_to(energies, (s.size, d)).copy(), v, dv

    ends = np.asarray(betas(np.array([0.0, 1.0])))
    wind = (ends[1] - ends[0]) / (2 * np.pi)
    cyclic = bool(np.allclose(wind, np.round(wind), atol=1e-12, rtol=0))
    return frame_from_sampler(sampler, n_grid, cyclic=cyclic, label=label)


def rephase_frame(fr: EigenFrame, betas, dbetas) -> EigenFrame:
    """Apply a smooth per-level gauge change |n(s)> -> e^{i beta_n(s)} |n(s)>."""

    def sampler(s):
        e, v, dv = fr.sampler(s)
        ph = np.exp(1j * np.asarray(betas(s)))[:, None, :]
        db = np.asarray(dbetas(s))[:, None, :]
        return e, v * ph, (dv + 1j * db * v) * ph

    ends = np.asarray(betas(np.array([0.0, 1.0])))
    closes = np.allclose(np.exp(1j * ends[0]), np.exp(1j * ends[1]), atol=1e-12, rtol=0)
    return frame_from_sampler(
        sampler, fr.n_grid, cyclic=fr.cyclic and closes, label=fr.label, analytic=fr.analytic
    )


def berry_connection(fr: EigenFrame, n: int) -> np.ndarray:
    """``<n(s_k)|d/ds n(s_k)>`` on the frame grid (purely imaginary)."""
    a = np.einsum("ki,ki->k", fr.vectors[:, :, n].conj(), fr.dvectors[:, :, n])
    if np.max(np.abs(a.real)) > tol.CONNECTION_REAL_TOL:
        raise NumericalError(f"connection of level {n} has a real part {np.max(np.abs(a.real)):.3e}")
    return a


def offdiag_coupling(fr: EigenFrame, n: int, m: int) -> np.ndarray:
    """``<n(s_k)|d/ds m(s_k)>`` for n != m on the frame grid."""
    if n == m:
        raise ValueError("offdiag_coupling needs two distinct levels")
    return np.einsum("ki,ki->k", fr.vectors[:, :, n].conj(), fr.dvectors[:, :, m])
