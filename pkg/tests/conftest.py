import numpy as np
import pytest

from zaklab.fields import FourierField, ZakharovState, phase_space_norm
from zaklab.propagators import PhysicalConstants


@pytest.fixture(scope="session")
def consts():
    return PhysicalConstants(1.0, 0.5)


def make_smooth_state(grid_size, seed, norm=1.0, decay=0.4, band=None):
    """Random state with decaying spectrum, scaled to the requested norm."""
    rng = np.random.default_rng(seed)
    z = ZakharovState.zeros(grid_size)
    limit = band if band is not None else grid_size
    for k in range(-limit, limit + 1):
        z.u.coeffs[k + grid_size] = (
            (rng.standard_normal() + 1j * rng.standard_normal())
            * np.exp(-decay * abs(k))
        )
    for f in (z.n, z.ndot):
        for k in range(1, limit + 1):
            a = (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-decay * k)
            f.coeffs[k + grid_size] = a
            f.coeffs[-k + grid_size] = np.conj(a)
    return z.scale(norm / phase_space_norm(z))


@pytest.fixture
def smooth_state():
    return make_smooth_state


def quadrature_integral(fn, n_points=4096):
    """Independent Riemann-sum oracle for integrals over [0, 2pi)."""
    x = 2.0 * np.pi * np.arange(n_points) / n_points
    return np.sum(fn(x)) * 2.0 * np.pi / n_points


def quadrature_coefficient(fn, k, n_points=4096):
    """Oracle for u_hat[k] = int exp(-ikx) u(x) dx."""
    x = 2.0 * np.pi * np.arange(n_points) / n_points
    return np.sum(np.exp(-1j * k * x) * fn(x)) * 2.0 * np.pi / n_points
