import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("lab", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")


@pytest.fixture(scope="session")
def spin_frames():
    """Analytic spin-1/2 frames on the standard 4097-point grid, keyed by theta."""
    from adiabatic_lab.hamiltonian import GAUGE_ANALYTIC, SpinHalfParams, build_spin_half, eigenframe

    cache = {}

    def get(theta, n_grid=4097, mu_b=1.0):
        key = (float(theta), n_grid, mu_b)
        if key not in cache:
            f = build_spin_half(SpinHalfParams(mu_b, theta))
            cache[key] = (f, eigenframe(f, n_grid, GAUGE_ANALYTIC))
        return cache[key]

    return get


HALF_PI = math.pi / 2


def random_hermitian(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (z + z.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
            terminalreporter.write_line(line[1])
