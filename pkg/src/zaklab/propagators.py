"""Exact linear propagators, the two nonlinearities, and a Picard oracle.

The linear group splits per mode: the Schrodinger factor is the unit-modulus
symbol exp(-i alpha k^2 t), the wave factor is a rotation in the scaled
coordinates (n_hat, ndot_hat / (beta |k|)).  The Picard iterator evaluates
the Duhamel integrals with composite-trapezoid quadrature and serves as an
independent small-time oracle for the production stepper.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    FourierField,
    ZakharovState,
    MeanZeroError,
    dealiased_product,
    modes,
    pad_size,
    to_grid,
    from_grid,
)


@dataclass(frozen=True)
class PhysicalConstants:
    """Dispersion coefficient alpha and ion-acoustic speed beta.

    beta/alpha must stay away from the integers: the resonance lower
    bounds degenerate there, so an integer ratio is a configuration error.
    """

    alpha: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        ratio = self.beta / self.alpha
        if abs(ratio - round(ratio)) <= 1e-9:
            raise ValueError(
                f"beta/alpha = {ratio} is an integer (to 1e-9); rejected"
            )


@dataclass(frozen=True)
class PicardSettings:
    iterations: int = 8
    quadrature_nodes: int = 32
    window: float = 1e-2

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.quadrature_nodes < 1:
            raise ValueError("need at least one quadrature interval")
        if not 0 < self.window <= 1:
            raise ValueError("window must lie in (0, 1]")


def free_schrodinger(u: FourierField, t: float, c: PhysicalConstants) -> FourierField:
    """u_hat[k] -> exp(-i alpha k^2 t) u_hat[k]."""
    k = modes(u.grid_size)
    return FourierField(np.exp(-1j * c.alpha * k**2 * t) * u.coeffs,
                        u.grid_size, u.is_real)


def _wave_rotation(grid_size: int, t: float, c: PhysicalConstants):
    """Per-mode entries of the homogeneous wave group (k=0 excluded)."""
    k = modes(grid_size)
    omega = c.beta * np.abs(k).astype(float)
    cos = np.cos(omega * t)
    sin = np.sin(omega * t)
    # sin(omega t)/omega with the k=0 slot patched to the t-limit; callers
    # either forbid the mean mode or handle it explicitly.
    sinc = np.empty_like(cos)
    nz = k != 0
    sinc[nz] = sin[nz] / omega[nz]
    sinc[~nz] = t
    return cos, sin, sinc, omega


def free_wave(n: FourierField, ndot: FourierField, t: float, c: PhysicalConstants,
              allow_mean: bool = False):
    """Exact homogeneous wave evolution of the pair (n, ndot).

    Per mode k != 0:
        n(t)    =  cos(beta|k|t) n0 + sin(beta|k|t)/(beta|k|) ndot0
        ndot(t) = -beta|k| sin(beta|k|t) n0 + cos(beta|k|t) ndot0

    The propagator symbol is singular at k = 0, so nonzero means are a hard
    error unless allow_mean is set, in which case the exact limit
    n(t) = n0 + t*ndot0 is used for the mean mode.
    """
    if not allow_mean:
        if n.mean_coefficient != 0 or ndot.mean_coefficient != 0:
            raise MeanZeroError("free wave flow requires mean-zero data")
    cos, sin, sinc, omega = _wave_rotation(n.grid_size, t, c)
    n_new = cos * n.coeffs + sinc * ndot.coeffs
    ndot_new = -omega * sin * n.coeffs + cos * ndot.coeffs
    return (FourierField(n_new, n.grid_size, n.is_real),
            FourierField(ndot_new, ndot.grid_size, ndot.is_real))


def schrodinger_nonlinearity(u: FourierField, n: FourierField) -> FourierField:
    """Coefficients of the pointwise product u*n on the shared window.

    Computed by transform-multiply-transform on a grid of >= 3K+1 points,
    which reproduces the convolution sum exactly on |k| <= K.
    """
    return dealiased_product(u, n)


def wave_forcing(u: FourierField) -> FourierField:
    """Coefficients of d^2/dx^2 |u|^2; real and mean-zero by construction."""
    m = pad_size(u.grid_size)
    vals = to_grid(u, m)
    q = from_grid(vals * np.conj(vals), u.grid_size, is_real=True)
    k = modes(u.grid_size)
    coeffs = -(k.astype(float) ** 2) * q.coeffs
    return FourierField(coeffs, u.grid_size, is_real=True)


def zakharov_rhs(z: ZakharovState, c: PhysicalConstants) -> ZakharovState:
    """Right side of the evolution written in first-order form:

        u_t    = i (alpha u_xx - u n)
        n_t    = ndot
        ndot_t = beta^2 (n_xx + d^2/dx^2 |u|^2)
    """
    k = modes(z.grid_size).astype(float)
    un = schrodinger_nonlinearity(z.u, z.n)
    u_t = 1j * (-c.alpha * k**2 * z.u.coeffs - un.coeffs)
    n_t = z.ndot.coeffs.copy()
    forcing = wave_forcing(z.u)
    ndot_t = c.beta**2 * (-(k**2) * z.n.coeffs + forcing.coeffs)
    return ZakharovState(
        FourierField(u_t, z.grid_size),
        FourierField(n_t, z.grid_size, is_real=True),
        FourierField(ndot_t, z.grid_size, is_real=True),
        z.time,
    )


def picard_iterate(z0: ZakharovState, settings: PicardSettings,
                   c: PhysicalConstants, allow_mean: bool = False) -> ZakharovState:
    """Fixed number of Picard iterations of the coupled Duhamel maps.

        u(t) = U(t)u0 - i int_0^t U(t-s) [u n](s) ds
        n(t) = dtV(t) n0 + V(t) n1 + beta^2 int_0^t V(t-s) dxx|u|^2 (s) ds

    with the matching formula for ndot.  Time integrals use composite
    trapezoid on quadrature_nodes uniform intervals; iterations = 0 returns
    the free evolution.  The iterate at the final node is returned.
    """
    if not allow_mean:
        z0.require_mean_zero("Picard iteration")
    grid_size = z0.grid_size
    k = modes(grid_size).astype(float)
    q_nodes = settings.quadrature_nodes
    h = settings.window / q_nodes
    times = h * np.arange(q_nodes + 1)

    # free evolution at every node
    free_u = [free_schrodinger(z0.u, t, c).coeffs for t in times]
    free_wave_pairs = [free_wave(z0.n, z0.ndot, t, c, allow_mean=allow_mean)
                       for t in times]

    u_nodes = [cu.copy() for cu in free_u]
    n_nodes = [p[0].coeffs.copy() for p in free_wave_pairs]
    ndot_nodes = [p[1].coeffs.copy() for p in free_wave_pairs]

    sch_symbol = lambda t: np.exp(-1j * c.alpha * k**2 * t)

    for _ in range(settings.iterations):
        # integrands at all nodes for the current iterate
        un = []
        forcing = []
        for i in range(q_nodes + 1):
            ui = FourierField(u_nodes[i], grid_size)
            ni = FourierField(n_nodes[i], grid_size, is_real=True)
            un.append(schrodinger_nonlinearity(ui, ni).coeffs)
            forcing.append(wave_forcing(ui).coeffs)

        new_u = [free_u[0].copy()]
        new_n = [free_wave_pairs[0][0].coeffs.copy()]
        new_ndot = [free_wave_pairs[0][1].coeffs.copy()]
        for i in range(1, q_nodes + 1):
            t = times[i]
            acc_u = np.zeros_like(u_nodes[0])
            acc_n = np.zeros_like(n_nodes[0])
            acc_nd = np.zeros_like(ndot_nodes[0])
            for j in range(i + 1):
                w = h * (0.5 if j in (0, i) else 1.0)
                dt_back = t - times[j]
                acc_u += w * sch_symbol(dt_back) * un[j]
                cos, sin, sinc, omega = _wave_rotation(grid_size, dt_back, c)
                acc_n += w * sinc * forcing[j]
                acc_nd += w * cos * forcing[j]
            new_u.append(free_u[i] - 1j * acc_u)
            new_n.append(free_wave_pairs[i][0].coeffs + c.beta**2 * acc_n)
            new_ndot.append(free_wave_pairs[i][1].coeffs + c.beta**2 * acc_nd)
        u_nodes, n_nodes, ndot_nodes = new_u, new_n, new_ndot

    return ZakharovState(
        FourierField(u_nodes[-1], grid_size),
        FourierField(n_nodes[-1], grid_size, is_real=True),
        FourierField(ndot_nodes[-1], grid_size, is_real=True),
        z0.time + settings.window,
    )
