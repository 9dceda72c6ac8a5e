"""Closed-form reference solutions used to check the propagators.

The spin-1/2 rotating-field model is exactly solvable.  In the frame that
co-rotates with the field about z, the Hamiltonian is constant:

    Psi(s) = exp(-i pi s sigma_z) exp(-i s G) Psi(0),
    G      = T H(0) - pi sigma_z.

Nothing here touches the package propagators or its eigen-solver; the
exponential comes from ``scipy.linalg.expm``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def rabi_generator(T: float, mu_b: float, theta: float) -> np.ndarray:
    h0 = mu_b * (np.sin(theta) * _SX + np.cos(theta) * _SZ)
    return T * h0 - np.pi * _SZ


def rabi_state(T: float, mu_b: float, theta: float, psi0, s) -> np.ndarray:
    """Exact lab-frame state(s) at parameter value(s) ``s``.

    Returns shape ``(2,)`` for scalar ``s`` and ``(len(s), 2)`` otherwise.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    gen = rabi_generator(T, mu_b, theta)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty((s_arr.size, 2), dtype=complex)
    for k, sk in enumerate(s_arr):
        rot = np.diag([np.exp(-1j * np.pi * sk), np.exp(1j * np.pi * sk)])
        out[k] = rot @ (expm(-1j * sk * gen) @ psi0)
    return out[0] if np.ndim(s) == 0 else out


def rabi_transition_probability(T: float, mu_b: float, theta: float, s: float) -> float:
    """Probability of leaving the upper instantaneous level by parameter ``s``.

    Closed form: (pi sin(theta) / |G|)^2 sin^2(s |G|), where |G| is the norm
    of the co-rotating generator's Bloch vector.
    """
    g = np.sqrt((T * mu_b) ** 2 - 2 * np.pi * T * mu_b * np.cos(theta) + np.pi**2)
    return float((np.pi * np.sin(theta) / g) ** 2 * np.sin(s * g) ** 2)


def spin_up(theta: float, s):
    """Upper eigenvector of the rotating-field Hamiltonian in the single-valued gauge."""
    return np.array(
        [np.cos(theta / 2), np.sin(theta / 2) * np.exp(2j * np.pi * s)], dtype=complex
    )


def spin_down(theta: float, s):
    return np.array(
        [-np.sin(theta / 2) * np.exp(-2j * np.pi * s), np.cos(theta / 2)], dtype=complex
    )


def berry_phase_spin_half(theta: float) -> float:
    """Solid-angle result for the upper level, in the gauge of ``spin_up``."""
    return -np.pi * (1.0 - np.cos(theta))
