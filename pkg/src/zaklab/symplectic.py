"""Symplectic structure of the phase space and flow-map verification.

The bilinear form implemented here is the one the evolution actually
preserves, written per Fourier mode:

    omega(a, b) = (2/2pi) sum_k Im[conj(a_u) b_u]
                + (1/(2pi beta^2)) sum_{k!=0} k^{-2}
                      Re[conj(a_n) b_ndot - conj(a_ndot) b_n]

Equivalently 2 Im int conj(a_u) b_u dx plus the cross pairing
beta^{-2} int (b_n dx^{-2} a_ndot - a_n dx^{-2} b_ndot) dx.  With the
compatible real inner product (weights 2 on u and 1/(beta^2 k^2) on the
wave pair) the almost-complex structure J is multiplication by -i on u
and the per-mode rotation (dn, dndot) -> (dndot, -dn); both defining
identities J^2 = -I and <a, J b> = omega(a, b) hold, and J grad H is the
Zakharov right side.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    TWO_PI,
    FourierField,
    ZakharovState,
    TangentVector,
    modes,
    phase_space_norm,
    fixed_mode_abs,
)
from .flow import hamiltonian
from .propagators import PhysicalConstants, zakharov_rhs


def _require_wave_mean_zero(a: ZakharovState):
    if a.n.mean_coefficient != 0 or a.ndot.mean_coefficient != 0:
        raise ValueError("tangent vectors must have mean-zero wave components")


def symplectic_form(a: TangentVector, b: TangentVector, c: PhysicalConstants) -> float:
    """Antisymmetric pairing preserved by the full and hybrid flows."""
    _require_wave_mean_zero(a)
    _require_wave_mean_zero(b)
    k = modes(a.grid_size).astype(float)
    u_part = 2.0 * float(np.sum(np.imag(np.conj(a.u.coeffs) * b.u.coeffs))) / TWO_PI
    nz = k != 0
    w = np.zeros_like(k)
    w[nz] = 1.0 / k[nz] ** 2
    cross = np.conj(a.n.coeffs) * b.ndot.coeffs - np.conj(a.ndot.coeffs) * b.n.coeffs
    wave_part = float(np.sum(w * np.real(cross))) / (TWO_PI * c.beta**2)
    return u_part + wave_part


def phase_space_inner(a: TangentVector, b: TangentVector, c: PhysicalConstants) -> float:
    """Real inner product compatible with the symplectic form and J."""
    _require_wave_mean_zero(a)
    _require_wave_mean_zero(b)
    k = modes(a.grid_size).astype(float)
    u_part = 2.0 * float(np.sum(np.real(np.conj(a.u.coeffs) * b.u.coeffs))) / TWO_PI
    nz = k != 0
    w = np.zeros_like(k)
    w[nz] = 1.0 / k[nz] ** 2
    pair = np.conj(a.n.coeffs) * b.n.coeffs + np.conj(a.ndot.coeffs) * b.ndot.coeffs
    wave_part = float(np.sum(w * np.real(pair))) / (TWO_PI * c.beta**2)
    return u_part + wave_part


def apply_J(a: TangentVector) -> TangentVector:
    """Almost-complex structure: -i on u, (dn, dndot) -> (dndot, -dn)."""
    _require_wave_mean_zero(a)
    return ZakharovState(
        FourierField(-1j * a.u.coeffs, a.grid_size),
        FourierField(a.ndot.coeffs.copy(), a.grid_size, is_real=True),
        FourierField(-a.n.coeffs, a.grid_size, is_real=True),
        a.time,
    )


# ---------------------------------------------------------------------------
# Hamiltonian vector field via finite-difference gradient
# ---------------------------------------------------------------------------

def hamiltonian_vector_field(z: ZakharovState, c: PhysicalConstants,
                             fd_step: float = 1e-5) -> TangentVector:
    """J grad H with the gradient taken by central differences.

    The gradient is assembled coordinate by coordinate (real and imaginary
    parts of each coefficient) and rescaled by the diagonal metric weights
    of the compatible inner product; applying J then reproduces the
    explicit right side of the evolution on the resolved band.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    z.require_mean_zero("Hamiltonian gradient")
    K = z.grid_size
    h = fd_step * (1.0 + phase_space_norm(z))

    def dH(make_perturbed) -> float:
        return (hamiltonian(make_perturbed(+h), c)
                - hamiltonian(make_perturbed(-h), c)) / (2 * h)

    grad = ZakharovState.zeros(K, z.time)

    # u block: metric weight 2/(2pi) per coefficient
    for k in range(-K, K + 1):
        i = k + K

        def bump_re(s, i=i):
            w = z.copy()
            w.u.coeffs[i] += s
            return w

        def bump_im(s, i=i):
            w = z.copy()
            w.u.coeffs[i] += 1j * s
            return w

        grad.u.coeffs[i] = (dH(bump_re) + 1j * dH(bump_im)) * math.pi

    # wave blocks: real fields, coordinates are the k >= 1 coefficients,
    # metric weight 2/(2pi beta^2 k^2) per coordinate direction
    for name in ("n", "ndot"):
        src = getattr(z, name)
        dst = getattr(grad, name)
        for k in range(1, K + 1):
            i_pos, i_neg = k + K, -k + K

            def bump_re(s, i_pos=i_pos, i_neg=i_neg, name=name):
                w = z.copy()
                f = getattr(w, name)
                f.coeffs[i_pos] += s
                f.coeffs[i_neg] += s
                return w

            def bump_im(s, i_pos=i_pos, i_neg=i_neg, name=name):
                w = z.copy()
                f = getattr(w, name)
                f.coeffs[i_pos] += 1j * s
                f.coeffs[i_neg] -= 1j * s
                return w

            val = (dH(bump_re) + 1j * dH(bump_im)) * math.pi * c.beta**2 * k**2
            dst.coeffs[i_pos] = val
            dst.coeffs[i_neg] = np.conj(val)

    return apply_J(grad)


def explicit_vector_field(z: ZakharovState, c: PhysicalConstants) -> TangentVector:
    """The closed-form right side, for cross-checking the gradient route."""
    return zakharov_rhs(z, c)


# ---------------------------------------------------------------------------
# flow-map symplecticity check
# ---------------------------------------------------------------------------

def random_tangent(grid_size: int, band: int, rng: np.random.Generator,
                   scale: float = 1.0) -> TangentVector:
    """Random perturbation supported in |k| <= band, mean-zero wave parts."""
    v = ZakharovState.zeros(grid_size)
    for k in range(-band, band + 1):
        v.u.coeffs[k + grid_size] = scale * (rng.standard_normal()
                                             + 1j * rng.standard_normal())
    for name in ("n", "ndot"):
        f = getattr(v, name)
        for k in range(1, band + 1):
            a = scale * (rng.standard_normal() + 1j * rng.standard_normal())
            f.coeffs[k + grid_size] = a
            f.coeffs[-k + grid_size] = np.conj(a)
    return v


def _power_of_two_near(x: float) -> float:
    return 2.0 ** round(math.log2(x))


@dataclass
class SymplecticReport:
    entries: list
    epsilon: float

    @property
    def max_defect(self) -> float:
        return max(e["defect"] for e in self.entries)

    def to_jsonl(self, path):
        with open(path, "w") as fh:
            for e in self.entries:
                fh.write(json.dumps(e) + "\n")


def check_symplectic(flow, z0: ZakharovState, t: float, band: int, pairs: int,
                     fd_step: float, c: PhysicalConstants,
                     rng: np.random.Generator | None = None) -> SymplecticReport:
    """Measure |omega(DPhi v, DPhi w) - omega(v, w)| / |omega(v, w)|.

    DPhi is the central finite-difference Jacobian of the flow map applied
    to random tangent pairs supported in |k| <= band.  The step is snapped
    to a power of two so that linear maps differentiate exactly.
    """
    rng = rng or np.random.default_rng(0)
    eps = _power_of_two_near(fd_step * (1.0 + phase_space_norm(z0)))
    entries = []
    for pair_index in range(pairs):
        for _ in range(64):
            v = random_tangent(z0.grid_size, band, rng)
            w = random_tangent(z0.grid_size, band, rng)
            before = symplectic_form(v, w, c)
            if abs(before) >= 1e-12:
                break
        else:
            raise RuntimeError("could not draw a nondegenerate tangent pair")

        def push(direction: TangentVector) -> TangentVector:
            plus = flow(z0 + direction.scale(eps), t)
            minus = flow(z0 - direction.scale(eps), t)
            return (plus - minus).scale(1.0 / (2.0 * eps))

        after = symplectic_form(push(v), push(w), c)
        defect = abs(after - before) / abs(before)
        entries.append({
            "pair": pair_index,
            "omega_before": before,
            "omega_after": after,
            "defect": defect,
        })
    return SymplecticReport(entries, eps)


# ---------------------------------------------------------------------------
# ball / cylinder geometry
# ---------------------------------------------------------------------------

@dataclass
class BallSpec:
    center: ZakharovState
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")


@dataclass
class CylinderSpec:
    k: int
    center: tuple  # (eta_u, eta_n, eta_ndot) in C^3
    radius: float

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("cylinder mode must be nonzero")
        if self.radius <= 0:
            raise ValueError("cylinder radius must be positive")
        if len(self.center) != 3:
            raise ValueError("cylinder center lives in C^3")


def ball_contains(spec: BallSpec, z: ZakharovState) -> bool:
    return phase_space_norm(z - spec.center) <= spec.radius


def mode_distance(z: ZakharovState, k: int, center) -> float:
    """Fixed-mode distance |u-eta_u| + |k|^{-1/2}|n-eta_n| + |k|^{-3/2}|ndot-eta_nd|."""
    if k == 0:
        raise ValueError("fixed-mode distance undefined at zero frequency")
    uu, nn, dd = z.mode_triple(k)
    w = float(abs(k))
    return (abs(uu - center[0])
            + w**-0.5 * abs(nn - center[1])
            + w**-1.5 * abs(dd - center[2]))


def cylinder_contains(spec: CylinderSpec, z: ZakharovState) -> bool:
    return mode_distance(z, spec.k, spec.center) <= spec.radius
