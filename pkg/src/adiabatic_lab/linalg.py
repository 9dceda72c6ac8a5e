"""Dense complex linear algebra for small Hilbert spaces (dim <= 16).

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
The helpers here validate shape and Hermiticity, diagonalise, and build the
exact unitary step ``exp(-i M dt)`` used by the propagators.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from adiabatic_lab import tolerances as tol
from adiabatic_lab.errors import NotHermitianError, NumericalError

MAX_DIM = 16

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


class Eigensystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray
    degenerate: bool
    min_gap: float


def as_vector(u) -> np.ndarray:
    v = np.asarray(u, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NumericalError("vector has non-finite entries")
    return v


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    """Relative defect ``||M - M^H||_max / ||M||_max`` (0 for the zero matrix)."""
    scale = np.max(np.abs(m))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)) / scale)


def as_hermitian(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds supported maximum {MAX_DIM}")
    defect = hermiticity_defect(a)
    if defect > tol.HERMITIAN_RTOL:
        raise NotHermitianError(f"matrix is not Hermitian (relative defect {defect:.3e})")
    return a


def inner(u, v) -> complex:
    """Return ``<u|v>``, conjugate-linear in the first argument."""
    a = as_vector(u)
    b = as_vector(v)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def norm(u) -> float:
    return float(np.linalg.norm(as_vector(u)))


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rephase each column so that its largest-magnitude entry is real positive.

    Works on a single matrix ``(d, d)`` or a stack ``(..., d, d)``.
    """
    idx = np.argmax(np.abs(vectors), axis=-2)
    pivot = np.take_along_axis(vectors, idx[..., None, :], axis=-2)
    out = vectors * (np.abs(pivot) / pivot)
    # clear the rounding residue so the pivot is exactly real
    np.put_along_axis(out, idx[..., None, :], np.abs(pivot).astype(out.dtype), axis=-2)
    return out


def _gap(values: np.ndarray) -> float:
    if values.shape[-1] < 2:
        return float("inf")
    return float(np.min(np.diff(values, axis=-1)))


def eig_hermitian(m) -> Eigensystem:
    """Diagonalise a Hermitian matrix.

    Eigenvalues come back ascending.  Eigenvector columns are orthonormal
    with the largest component of each made real positive.  ``degenerate``
    is set when the smallest gap is below ``GAP_RTOL * ||M||_2``; callers
    that need trackable eigenvectors must reject such spectra.
    """
    a = as_hermitian(m)
    # symmetrise so eigh sees exactly Hermitian input
    values, vectors = np.linalg.eigh(0.5 * (a + a.conj().T))
    vectors = fix_phase(vectors)
    gap = _gap(values)
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    degenerate = a.shape[0] > 1 and gap <= tol.GAP_RTOL * scale
    return Eigensystem(values, vectors, bool(degenerate), gap)


def eigh_stack(ms: np.ndarray):
    """Batched ``eigh`` over a stack ``(n, d, d)`` of Hermitian matrices."""
    ms = np.asarray(ms, dtype=complex)
    return np.linalg.eigh(0.5 * (ms + np.conj(np.swapaxes(ms, -1, -2))))


def expm_step(m, dt: float) -> np.ndarray:
    """Return the unitary ``exp(-i M dt)`` for Hermitian ``M``."""
    a = as_hermitian(m)
    if not np.isfinite(dt):
        raise ValueError("dt must be finite")
    if dt == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    values, vectors = np.linalg.eigh(0.5 * (a + a.conj().T))
    return (vectors * np.exp(-1j * values * dt)) @ vectors.conj().T


def expm_step_stack(ms: np.ndarray, dt) -> np.ndarray:
    """Batched ``exp(-i M_k dt)`` for a stack of Hermitian matrices."""
    values, vectors = eigh_stack(ms)
    phases = np.exp(-1j * values * np.asarray(dt)[..., None])
    return (vectors * phases[..., None, :]) @ np.conj(np.swapaxes(vectors, -1, -2))


def unitarity_defect(u) -> float:
    a = as_matrix(u)
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def is_unitary(u, atol: float = tol.UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= atol
