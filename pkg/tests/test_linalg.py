import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiabatic_lab import linalg
from adiabatic_lab.errors import NotHermitianError, NumericalError
from adiabatic_lab.linalg import SIGMA_Z, eig_hermitian, expm_step, inner
from adiabatic_lab.oracles import spin_up

from conftest import random_hermitian

E1 = np.array([1, 0], dtype=complex)
E2 = np.array([0, 1], dtype=complex)


def test_inner_basis():
    assert inner(E1, E1) == 1
    assert inner(E1, E2) == 0


def test_inner_spin_up_overlap():
    for s in np.linspace(0, 1, 9):
        expected = (1 + np.exp(2j * np.pi * s)) / 2
        assert abs(inner(spin_up(np.pi / 2, 0.0), spin_up(np.pi / 2, s)) - expected) < 1e-15


def test_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        inner(E1, np.ones(3))


def test_inner_rejects_nonfinite():
    with pytest.raises(NumericalError):
        inner(np.array([np.nan, 0]), E1)


vec = st.integers(1, 6).flatmap(
    lambda d: st.tuples(
        *[st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=d, max_size=d)] * 2
    )
)


@given(vec)
def test_inner_conjugate_symmetry(uv):
    u, v = map(np.array, uv)
    assert abs(inner(u, v) - np.conj(inner(v, u))) <= 1e-12 * (1 + np.linalg.norm(u) * np.linalg.norm(v))
    assert abs(inner(u, u).imag) == 0 and inner(u, u).real >= 0


def test_eig_sigma_z():
    es = eig_hermitian(SIGMA_Z)
    np.testing.assert_array_equal(es.values, [-1.0, 1.0])
    np.testing.assert_allclose(np.abs(es.vectors[:, 0]), [0, 1])
    np.testing.assert_allclose(np.abs(es.vectors[:, 1]), [1, 0])
    assert not es.degenerate


def test_eig_identity_degenerate():
    es = eig_hermitian(np.eye(2))
    np.testing.assert_array_equal(es.values, [1.0, 1.0])
    assert es.degenerate


def test_eig_spin_half_levels():
    from adiabatic_lab.hamiltonian import SpinHalfParams, build_spin_half

    for theta in (0.0, 0.3, np.pi / 2, 2.5):
        f = build_spin_half(SpinHalfParams(1.7, theta))
        for s in (0.0, 0.21, 0.5, 0.93):
            np.testing.assert_allclose(eig_hermitian(f(s)).values, [-1.7, 1.7], atol=1e-14)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_eig_phase_convention():
    rng = np.random.default_rng(3)
    es = eig_hermitian(random_hermitian(rng, 5))
    for k in range(5):
        col = es.vectors[:, k]
        j = np.argmax(np.abs(col))
        assert col[j].imag == 0 and col[j].real > 0


@given(st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_eig_reconstruction(d, seed):
    m = random_hermitian(np.random.default_rng(seed), d)
    es = eig_hermitian(m)
    rebuilt = (es.vectors * es.values) @ es.vectors.conj().T
    assert np.max(np.abs(rebuilt - m)) <= 1e-10 * np.max(np.abs(m))
    assert np.all(np.diff(es.values) >= 0)
    assert linalg.unitarity_defect(es.vectors) < 1e-12


def test_eig_dimension_limit():
    with pytest.raises(ValueError):
        eig_hermitian(np.eye(17))


def test_expm_zero_step():
    np.testing.assert_array_equal(expm_step(SIGMA_Z * 3.7, 0.0), np.eye(2))


def test_expm_sigma_z_pi():
    np.testing.assert_allclose(expm_step(SIGMA_Z, np.pi), -np.eye(2), atol=1e-15)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(-5, 5))
def test_expm_inverse_and_norm(d, seed, dt):
    rng = np.random.default_rng(seed)
    h = random_hermitian(rng, d)
    u = expm_step(h, dt)
    np.testing.assert_allclose(u @ expm_step(h, -dt), np.eye(d), atol=1e-12)
    x = rng.normal(size=d) + 1j * rng.normal(size=d)
    assert abs(np.linalg.norm(u @ x) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)


def test_expm_matches_scipy():
    from scipy.linalg import expm

    h = random_hermitian(np.random.default_rng(9), 4)
    np.testing.assert_allclose(expm_step(h, 0.37), expm(-1j * 0.37 * h), atol=1e-13)


def test_expm_stack_matches_single():
    rng = np.random.default_rng(4)
    hs = np.stack([random_hermitian(rng, 3) for _ in range(5)])
    us = linalg.expm_step_stack(hs, 0.2)
    for h, u in zip(hs, us):
        np.testing.assert_allclose(u, expm_step(h, 0.2), atol=1e-14)
