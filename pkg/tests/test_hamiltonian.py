import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiabatic_lab.errors import DegenerateSpectrumError, GridError, NotHermitianError
from adiabatic_lab.hamiltonian import (
    GAUGE_ANALYTIC,
    GAUGE_NUMERIC,
    SPIN_DOWN,
    SPIN_UP,
    HamiltonianFamily,
    SpinHalfParams,
    berry_connection,
    build_constant,
    build_sampled_grid,
    build_spin_half,
    eigenframe,
    offdiag_coupling,
    rephase_frame,
)
from adiabatic_lab.linalg import SIGMA_X, SIGMA_Y, SIGMA_Z
from adiabatic_lab.oracles import spin_down, spin_up
from adiabatic_lab.phases import berry_phase
from adiabatic_lab.zoo import conjugated_member


def test_spin_half_theta_zero_is_constant():
    f = build_spin_half(SpinHalfParams(1.3, 0.0))
    for s in (0.0, 0.4, 1.0):
        np.testing.assert_array_equal(f(s), 1.3 * SIGMA_Z)


def test_spin_half_quarter_turn_is_sigma_y():
    f = build_spin_half(SpinHalfParams(1.0, math.pi / 2))
    np.testing.assert_allclose(f(0.25), SIGMA_Y, atol=1e-15)
    np.testing.assert_allclose(f(0.0), SIGMA_X, atol=1e-15)


@given(st.floats(0, math.pi), st.floats(0.1, 10))
def test_spin_half_closes(theta, mu_b):
    f = build_spin_half(SpinHalfParams(mu_b, theta))
    assert np.max(np.abs(f(1.0) - f(0.0))) <= 1e-15 * max(1.0, mu_b)


def test_spin_half_params_validated():
    with pytest.raises(ValueError):
        SpinHalfParams(-1.0, 0.2)
    with pytest.raises(ValueError):
        SpinHalfParams(1.0, 4.0)


def test_spin_half_derivative_matches_finite_difference():
    f = build_spin_half(SpinHalfParams(0.8, 1.1))
    s = np.array([0.13, 0.5, 0.77])
    h = 1e-6
    fd = (f.sample(s + h) - f.sample(s - h)) / (2 * h)
    np.testing.assert_allclose(f.sample_derivative(s), fd, atol=1e-7)


def test_constant_family():
    f = build_constant(SIGMA_Z)
    np.testing.assert_array_equal(f(0.7), SIGMA_Z)
    np.testing.assert_array_equal(f.sample_derivative(np.array([0.3]))[0], np.zeros((2, 2)))
    fr = eigenframe(f, 64)
    assert np.max(np.abs(fr.vectors - fr.vectors[0])) == 0.0


def test_family_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        HamiltonianFamily(dim=2, evaluate=lambda s: np.broadcast_to(np.array([[0, 1], [0, 0]], complex), (s.size, 2, 2)))


def test_sampled_grid_interpolates():
    grid = np.linspace(0, 1, 5)
    samples = np.stack([np.cos(a) * SIGMA_Z + np.sin(a) * SIGMA_X for a in grid])
    f = build_sampled_grid(samples)
    np.testing.assert_allclose(f(0.125), 0.5 * (samples[0] + samples[1]), atol=1e-15)


def test_analytic_frame_matches_closed_form(spin_frames):
    _, fr = spin_frames(math.pi / 2)
    k = fr.index_of(0.5)
    np.testing.assert_allclose(fr.vectors[k][:, SPIN_UP], np.array([1, -1]) / math.sqrt(2), atol=1e-15)
    for s in (0.0, 0.3125, 0.5):
        k = fr.index_of(s)
        np.testing.assert_allclose(fr.vectors[k][:, SPIN_UP], spin_up(math.pi / 2, s), atol=1e-15)
        np.testing.assert_allclose(fr.vectors[k][:, SPIN_DOWN], spin_down(math.pi / 2, s), atol=1e-15)


def test_energies_are_plus_minus_mu_b(spin_frames):
    _, fr = spin_frames(2.0, mu_b=1.0)
    np.testing.assert_allclose(fr.energies, np.tile([-1.0, 1.0], (fr.n_grid, 1)), atol=1e-14)


def test_constant_numeric_frame_constant():
    fr = eigenframe(build_constant(SIGMA_Z), 4097, GAUGE_NUMERIC)
    assert np.all(fr.vectors == fr.vectors[0])


@pytest.mark.parametrize("theta", [0.3, math.pi / 2, 2.5])
def test_numeric_and_analytic_rays_agree(theta):
    f = build_spin_half(SpinHalfParams(1.0, theta))
    num = eigenframe(f, 4097, GAUGE_NUMERIC)
    ana = eigenframe(f, 4097, GAUGE_ANALYTIC)
    ov = np.abs(np.einsum("kin,kin->kn", num.vectors.conj(), ana.vectors))
    assert np.max(np.abs(ov - 1.0)) <= 1e-8


def test_numeric_gauge_is_continuous():
    f = build_spin_half(SpinHalfParams(1.0, 1.0))
    fr = eigenframe(f, 1025, GAUGE_NUMERIC)
    for n in range(2):
        ov = np.einsum("ki,ki->k", fr.vectors[:-1, :, n].conj(), fr.vectors[1:, :, n])
        assert np.max(np.abs(ov.imag)) < 1e-12 and np.all(ov.real > 0)


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2, 2.0, math.pi])
def test_connection_closed_form(spin_frames, theta):
    _, fr = spin_frames(theta)
    a = berry_connection(fr, SPIN_UP)
    np.testing.assert_allclose(a, 1j * math.pi * (1 - math.cos(theta)), atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 0.4, math.pi / 2, 2.0, math.pi])
def test_offdiag_modulus(spin_frames, theta):
    _, fr = spin_frames(theta)
    c = np.abs(offdiag_coupling(fr, SPIN_UP, SPIN_DOWN))
    np.testing.assert_allclose(c, math.pi * math.sin(theta), atol=1e-12)


def test_constant_connection_zero():
    fr = eigenframe(build_constant(SIGMA_Z), 64)
    assert np.max(np.abs(berry_connection(fr, 0))) == 0
    assert np.max(np.abs(offdiag_coupling(fr, 0, 1))) == 0


def test_offdiag_requires_distinct_levels(spin_frames):
    _, fr = spin_frames(1.0)
    with pytest.raises(ValueError):
        offdiag_coupling(fr, 0, 0)


def test_completeness():
    fr = conjugated_member(513).frame
    proj = np.einsum("kin,kjn->kij", fr.vectors, fr.vectors.conj())
    assert np.max(np.abs(proj - np.eye(3))) <= 1e-10


def test_grid_too_small():
    with pytest.raises(GridError):
        eigenframe(build_constant(SIGMA_Z), 8)


def test_degenerate_family_rejected():
    with pytest.raises(DegenerateSpectrumError):
        eigenframe(build_constant(np.eye(2)), 64)


def test_degenerate_crossing_reports_location():
    # H(s) = (2s - 1) sigma_z crosses zero at s = 1/2
    f = HamiltonianFamily(dim=2, evaluate=lambda s: (2 * s - 1)[:, None, None] * SIGMA_Z[None])
    with pytest.raises(DegenerateSpectrumError) as info:
        eigenframe(f, 65)
    assert info.value.s == pytest.approx(0.5)


def test_analytic_gauge_needs_spin_family():
    with pytest.raises(ValueError):
        eigenframe(build_constant(SIGMA_Z), 64, GAUGE_ANALYTIC)


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 2, 2 * math.pi / 3])
def test_numeric_berry_phase_matches_analytic(theta):
    f = build_spin_half(SpinHalfParams(1.0, theta))
    num = berry_phase(eigenframe(f, 4097, GAUGE_NUMERIC), SPIN_UP)
    ana = berry_phase(eigenframe(f, 4097, GAUGE_ANALYTIC), SPIN_UP)
    # the numeric gauge only fixes the phase modulo 2 pi
    assert abs(np.exp(1j * num) - np.exp(1j * ana)) <= 2e-6


@given(
    st.floats(-2, 2), st.floats(-2, 2), st.integers(-2, 2), st.integers(1, 3)
)
def test_berry_phase_gauge_invariance(a, b, wind, harmonic):
    f = build_spin_half(SpinHalfParams(1.0, 1.0))
    fr = eigenframe(f, 1025, GAUGE_ANALYTIC)

    def betas(s):
        s = np.asarray(s)
        w = a * np.sin(2 * np.pi * harmonic * s) + 2 * np.pi * wind * s
        return np.column_stack([b * np.sin(2 * np.pi * s) ** 2, w])

    def dbetas(s):
        s = np.asarray(s)
        dw = 2 * np.pi * harmonic * a * np.cos(2 * np.pi * harmonic * s) + 2 * np.pi * wind
        return np.column_stack([2 * np.pi * b * np.sin(4 * np.pi * s), dw])

    g = rephase_frame(fr, betas, dbetas)
    shift = berry_connection(g, SPIN_UP) - berry_connection(fr, SPIN_UP)
    np.testing.assert_allclose(shift, 1j * dbetas(fr.grid)[:, 1], atol=1e-9)
    before, after = berry_phase(fr, SPIN_UP), berry_phase(g, SPIN_UP)
    assert abs(np.exp(1j * after) - np.exp(1j * before)) <= 1e-8
    if wind == 0:
        assert abs(after - before) <= 1e-8
