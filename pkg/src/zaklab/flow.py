"""Time-stepping for the full flow and the frequency-truncated hybrid flow.

The production stepper is Strang splitting.  Both sub-flows are solved
exactly:

* linear half-step: per-mode Schrodinger phase and wave rotation;
* nonlinear kick over dt: with n frozen, u rotates pointwise by
  exp(-i n dt) (|u| pointwise invariant) and ndot picks up
  dt * beta^2 * dxx|u|^2, n unchanged.

For the hybrid flow the kick acts on the low block only, through the
projected product P_N[(P_N u)(P_N n)].  That projected kick is itself the
exact flow of the projected cubic energy: u_lo evolves by the exponential
of the Hermitian band matrix of multiplication-by-n, and the ndot kick
uses the time average of |u_lo|^2 over the step.  Composing exact
sub-flows makes mass conservation structural and keeps the map exactly
symplectic; the high block sees only the free phases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .fields import (
    TWO_PI,
    FourierField,
    ZakharovState,
    MeanZeroError,
    modes,
    pad_size,
    to_grid,
    from_grid,
    grid_quadrature,
    sobolev_norm,
)
from .propagators import PhysicalConstants, PicardSettings, free_wave, picard_iterate


class BlowupError(RuntimeError):
    """A non-finite coefficient appeared; carries the last valid model time."""

    def __init__(self, last_good_time: float):
        super().__init__(f"non-finite state detected; last good time t={last_good_time}")
        self.last_good_time = last_good_time


@dataclass
class SchemeSpec:
    scheme: str = "strang_splitting"
    dt: float = 1e-3
    dealias: bool = True
    linear_only: bool = False
    sample_stride: int = 1
    picard: PicardSettings | None = None

    def __post_init__(self):
        if self.scheme not in ("strang_splitting", "picard_oracle"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not self.dealias:
            raise ValueError("dealiased products are fixed on")
        if self.sample_stride < 1:
            raise ValueError("sample stride must be >= 1")


@dataclass
class TrajectoryRecord:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    mass_series: list = field(default_factory=list)
    hamiltonian_series: list = field(default_factory=list)
    mode_series: dict = field(default_factory=dict)  # k -> list of (|u|,|n|,|ndot|)

    @property
    def final_state(self) -> ZakharovState:
        return self.states[-1]

    def sample(self, z: ZakharovState, c: PhysicalConstants, probes):
        self.times.append(z.time)
        self.states.append(z.copy())
        self.mass_series.append(mass(z))
        if z.ndot.mean_coefficient == 0:
            self.hamiltonian_series.append(hamiltonian(z, c))
        else:
            self.hamiltonian_series.append(None)
        for k in probes:
            u_abs, n_abs, nd_abs = (abs(v) for v in z.mode_triple(k))
            self.mode_series.setdefault(int(k), []).append((u_abs, n_abs, nd_abs))

    def to_jsonl(self, path, probes=()):
        with open(path, "w") as fh:
            for i, t in enumerate(self.times):
                row = {
                    "t": t,
                    "mass": self.mass_series[i],
                    "hamiltonian": self.hamiltonian_series[i],
                }
                for k in probes:
                    u_abs, n_abs, nd_abs = self.mode_series[int(k)][i]
                    row[f"mode_{k}"] = {"u": u_abs, "n": n_abs, "ndot": nd_abs}
                fh.write(json.dumps(row) + "\n")


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------

def mass(z: ZakharovState) -> float:
    """int |u|^2 dx = (1/2pi) sum |u_hat[k]|^2."""
    return float(np.sum(np.abs(z.u.coeffs) ** 2)) / TWO_PI


def _wave_energy_terms(z: ZakharovState, c: PhysicalConstants):
    k = modes(z.grid_size).astype(float)
    quad_n = 0.5 * float(np.sum(np.abs(z.n.coeffs) ** 2)) / TWO_PI
    nz = k != 0
    quad_ndot = (0.5 / c.beta**2) * float(
        np.sum(np.abs(z.ndot.coeffs[nz]) ** 2 / k[nz] ** 2)
    ) / TWO_PI
    return quad_n, quad_ndot


def hamiltonian(z: ZakharovState, c: PhysicalConstants) -> float:
    """Conserved energy of the flow:

        H = int ( alpha |u_x|^2 + n^2/2 + |dx^{-1} ndot|^2 / (2 beta^2)
                  + n |u|^2 ) dx

    Quadratic terms go through Parseval; the cubic term is integrated on a
    dealiased grid.  ndot must be mean-zero for the antiderivative.
    """
    if z.ndot.mean_coefficient != 0:
        raise MeanZeroError("hamiltonian requires mean-zero ndot")
    k = modes(z.grid_size).astype(float)
    kinetic = c.alpha * float(np.sum(k**2 * np.abs(z.u.coeffs) ** 2)) / TWO_PI
    quad_n, quad_ndot = _wave_energy_terms(z, c)
    m = pad_size(z.grid_size)
    u_vals = to_grid(z.u, m)
    n_vals = np.real(to_grid(z.n, m))
    cubic = grid_quadrature(n_vals * np.abs(u_vals) ** 2)
    return kinetic + quad_n + quad_ndot + cubic


def hamiltonian_truncated(z: ZakharovState, n_cut: int, c: PhysicalConstants) -> float:
    """Energy of the hybrid flow: full quadratic part, projected cubic part."""
    if z.ndot.mean_coefficient != 0:
        raise MeanZeroError("hamiltonian requires mean-zero ndot")
    k = modes(z.grid_size).astype(float)
    kinetic = c.alpha * float(np.sum(k**2 * np.abs(z.u.coeffs) ** 2)) / TWO_PI
    quad_n, quad_ndot = _wave_energy_terms(z, c)
    keep = np.abs(modes(z.grid_size)) <= n_cut
    u_lo = FourierField(np.where(keep, z.u.coeffs, 0), z.grid_size)
    n_lo = FourierField(np.where(keep, z.n.coeffs, 0), z.grid_size, is_real=True)
    m = pad_size(z.grid_size)
    cubic = grid_quadrature(np.real(to_grid(n_lo, m)) * np.abs(to_grid(u_lo, m)) ** 2)
    return kinetic + quad_n + quad_ndot + cubic


# ---------------------------------------------------------------------------
# Strang stepping
# ---------------------------------------------------------------------------

def _half_linear(z: ZakharovState, h: float, c: PhysicalConstants,
                 allow_mean: bool) -> ZakharovState:
    k = modes(z.grid_size)
    u = FourierField(np.exp(-1j * c.alpha * k**2 * h) * z.u.coeffs, z.grid_size)
    n, ndot = free_wave(z.n, z.ndot, h, c, allow_mean=allow_mean)
    return ZakharovState(u, n, ndot, z.time + h)


def _kick_full(z: ZakharovState, dt: float, c: PhysicalConstants) -> ZakharovState:
    """Exact nonlinear kick on the full window (n frozen)."""
    m = pad_size(z.grid_size)
    n_vals = np.real(to_grid(z.n, m))
    u_vals = to_grid(z.u, m)
    q_vals = np.abs(u_vals) ** 2
    u_new = from_grid(u_vals * np.exp(-1j * dt * n_vals), z.grid_size)
    q = from_grid(q_vals, z.grid_size, is_real=True)
    k2 = modes(z.grid_size).astype(float) ** 2
    delta = dt * c.beta**2 * k2 * q.coeffs
    delta[z.grid_size] = 0.0  # keep the ndot mean structurally exact
    ndot = FourierField(z.ndot.coeffs - delta, z.grid_size, is_real=True)
    return ZakharovState(u_new, z.n.copy(), ndot, z.time)


def _kick_truncated(z: ZakharovState, dt: float, c: PhysicalConstants,
                    n_cut: int) -> ZakharovState:
    """Exact flow of the projected cubic energy on the low block.

    With n_lo frozen, u_lo obeys i u_t = P_N[n_lo u_lo], a Hermitian linear
    system on the band, solved by eigendecomposition.  The ndot kick needs
    the time integral of |u_lo|^2, computed in closed form from the same
    eigenbasis.  High modes are untouched.
    """
    K = z.grid_size
    band = slice(K - n_cut, K + n_cut + 1)
    width = 2 * n_cut + 1
    # convolution kernel of multiplication by P_N n: only |k_i - k_j| <= N
    n_lo = np.zeros(4 * n_cut + 1, dtype=np.complex128)
    n_lo[n_cut : 3 * n_cut + 1] = z.n.coeffs[band]
    rows = np.arange(width)
    diff = rows[:, None] - rows[None, :]  # k_i - k_j in [-2N, 2N]
    m_mat = n_lo[diff + 2 * n_cut] / TWO_PI

    lam, vec = np.linalg.eigh(m_mat)
    u_lo = z.u.coeffs[band]
    coeffs = vec.conj().T @ u_lo
    u_lo_new = vec @ (np.exp(-1j * dt * lam) * coeffs)

    # time-averaged pair correlations: phi(x) = (1 - e^{-ix})/(ix)
    x = dt * (lam[:, None] - lam[None, :])
    phi = np.exp(-0.5j * x) * np.sinc(x / TWO_PI)
    corr = vec @ ((coeffs[:, None] * coeffs.conj()[None, :]) * phi) @ vec.conj().T

    q_bar = np.empty(2 * n_cut + 1, dtype=np.complex128)
    for m_shift in range(-n_cut, n_cut + 1):
        q_bar[m_shift + n_cut] = np.trace(corr, offset=-m_shift) / TWO_PI
    q_bar = 0.5 * (q_bar + q_bar[::-1].conj())

    out = z.copy()
    out.u.coeffs[band] = u_lo_new
    m_vals = np.arange(-n_cut, n_cut + 1, dtype=float)
    delta = dt * c.beta**2 * m_vals**2 * q_bar
    delta[n_cut] = 0.0  # keep the ndot mean structurally exact
    out.ndot.coeffs[band] = out.ndot.coeffs[band] - delta
    return out


def _strang_step(z: ZakharovState, dt: float, c: PhysicalConstants,
                 trunc_n: int | None = None, linear_only: bool = False,
                 allow_mean: bool = False) -> ZakharovState:
    if dt == 0.0:
        return z.copy()
    mid = _half_linear(z, 0.5 * dt, c, allow_mean)
    if not linear_only:
        if trunc_n is None:
            mid = _kick_full(mid, dt, c)
        else:
            mid = _kick_truncated(mid, dt, c, trunc_n)
    out = _half_linear(mid, 0.5 * dt, c, allow_mean)
    out.time = z.time + dt
    return out


def step_full(z: ZakharovState, dt: float, c: PhysicalConstants) -> ZakharovState:
    """One Strang step of the full flow from mean-zero data."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    z.require_mean_zero("full-flow step")
    return _strang_step(z, dt, c)


def _state_finite(z: ZakharovState) -> bool:
    return bool(np.all(np.isfinite(z.u.coeffs))
                and np.all(np.isfinite(z.n.coeffs))
                and np.all(np.isfinite(z.ndot.coeffs)))


def _drive(z0: ZakharovState, t_final: float, spec: SchemeSpec,
           c: PhysicalConstants, probes, trunc_n=None,
           allow_mean=False) -> TrajectoryRecord:
    if t_final < 0:
        raise ValueError("final time must be nonnegative")
    if not allow_mean:
        z0.require_mean_zero("evolution")
    record = TrajectoryRecord()
    record.sample(z0, c, probes)
    if t_final == 0:
        return record

    n_steps = int(math.floor(t_final / spec.dt + 1e-12))
    remainder = t_final - n_steps * spec.dt
    if remainder < 1e-12 * spec.dt:
        remainder = 0.0
    z = z0.copy()
    step_index = 0
    schedule = [spec.dt] * n_steps + ([remainder] if remainder > 0 else [])
    for i, dt in enumerate(schedule):
        last_good = z.time
        if spec.scheme == "picard_oracle":
            settings = spec.picard or PicardSettings()
            settings = PicardSettings(settings.iterations, settings.quadrature_nodes, dt)
            z = picard_iterate(z, settings, c, allow_mean=allow_mean)
        else:
            z = _strang_step(z, dt, c, trunc_n=trunc_n,
                             linear_only=spec.linear_only, allow_mean=allow_mean)
        if not _state_finite(z):
            raise BlowupError(last_good)
        step_index += 1
        if i == len(schedule) - 1:
            z.time = t_final  # land exactly, avoiding accumulated rounding
        if step_index % spec.sample_stride == 0 or i == len(schedule) - 1:
            record.sample(z, c, probes)
    return record


def evolve(z0: ZakharovState, t_final: float, spec: SchemeSpec,
           c: PhysicalConstants, probes=(), allow_mean: bool = False) -> TrajectoryRecord:
    """Iterate the full-flow step to time t_final, recording invariants."""
    return _drive(z0, t_final, spec, c, probes, trunc_n=None, allow_mean=allow_mean)


def evolve_truncated(z0: ZakharovState, t_final: float, n_cut: int,
                     spec: SchemeSpec, c: PhysicalConstants,
                     probes=()) -> TrajectoryRecord:
    """Hybrid flow: projected nonlinearity below n_cut, free flow above."""
    if n_cut > z0.grid_size:
        raise ValueError("truncation level exceeds the frequency window")
    if n_cut < 0:
        raise ValueError("truncation level must be nonnegative")
    return _drive(z0, t_final, spec, c, probes, trunc_n=n_cut)


# ---------------------------------------------------------------------------
# mass-driven interval gluing
# ---------------------------------------------------------------------------

def wave_data_norm(z: ZakharovState) -> float:
    """(||n||_{H^{-1/2}}^2 + ||ndot||_{H^{-3/2}}^2)^(1/2)."""
    return math.hypot(sobolev_norm(z.n, -0.5), sobolev_norm(z.ndot, -1.5))


def gwp_schedule(z0: ZakharovState, t_final: float, c: PhysicalConstants,
                 c_step: float = 0.1):
    """Partition [0, T] into intervals of length tau, where

        tau = c_step * min(1, 1/mass, 1/wave_norm).

    The local window shrinks with the conserved mass and with the wave-data
    norm; for wave_norm >> mass >= 1 the count over the natural horizon
    c_step/mass scales like wave_norm/mass.
    """
    if t_final <= 0:
        raise ValueError("schedule needs a positive horizon")
    m = mass(z0)
    w = wave_data_norm(z0)
    bounds = [1.0]
    if m > 0:
        bounds.append(1.0 / m)
    if w > 0:
        bounds.append(1.0 / w)
    tau = c_step * min(bounds)
    count = max(1, math.ceil(t_final / tau - 1e-12))
    cuts = [(i / count) * t_final for i in range(count + 1)]
    return [(cuts[i], cuts[i + 1]) for i in range(count)]
