"""Fourier-side representation of periodic fields on T = R/(2*pi*Z).

Transform convention: u_hat[k] = int_T exp(-i k x) u(x) dx and
u(x) = (1/2pi) * sum_k u_hat[k] exp(i k x).  Sobolev norms carry the
matching 1/sqrt(2pi) factor so that the L2 norm of exp(i x) is sqrt(2pi).

Coefficients live on the symmetric window k in {-K, ..., K}; a field of
grid size K is an array of length 2K+1 indexed by i = k + K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.fft import next_fast_len

TWO_PI = 2.0 * math.pi
DOMAIN_LENGTH = TWO_PI


class MeanZeroError(ValueError):
    """A wave-component operation met a nonzero k=0 coefficient."""


def modes(grid_size: int) -> np.ndarray:
    """Integer frequencies -K..K in coefficient-array order."""
    return np.arange(-grid_size, grid_size + 1)


def bracket(k) -> np.ndarray:
    """Japanese bracket <k> = (1 + k^2)^(1/2)."""
    return np.sqrt(1.0 + np.asarray(k, dtype=float) ** 2)


@dataclass
class FourierField:
    """One periodic field as coefficients on the symmetric window.

    is_real marks fields that are real-valued in physical space, which
    pins the conjugate symmetry u_hat[-k] = conj(u_hat[k]).
    """

    coeffs: np.ndarray
    grid_size: int
    is_real: bool = False

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (2 * self.grid_size + 1,):
            raise ValueError(
                f"coefficient array has length {self.coeffs.shape}, "
                f"expected {2 * self.grid_size + 1}"
            )

    @classmethod
    def zeros(cls, grid_size: int, is_real: bool = False) -> "FourierField":
        return cls(np.zeros(2 * grid_size + 1, dtype=np.complex128), grid_size, is_real)

    @classmethod
    def from_modes(cls, grid_size: int, amplitudes: dict, is_real: bool = False) -> "FourierField":
        """Build a field from {k: amplitude}; unspecified modes are zero."""
        f = cls.zeros(grid_size, is_real)
        for k, a in amplitudes.items():
            if abs(k) > grid_size:
                raise ValueError(f"mode {k} outside window of size {grid_size}")
            f.coeffs[k + grid_size] = a
        return f

    def get(self, k: int) -> complex:
        if abs(k) > self.grid_size:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.grid_size])

    def copy(self) -> "FourierField":
        return FourierField(self.coeffs.copy(), self.grid_size, self.is_real)

    @property
    def mean_coefficient(self) -> complex:
        return complex(self.coeffs[self.grid_size])

    def realness_defect(self) -> float:
        """Max violation of the conjugate symmetry, in coefficient units."""
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))))

    def validate(self, tol: float = 0.0):
        if self.is_real:
            defect = self.realness_defect()
            if defect > tol:
                raise ValueError(f"real-flagged field violates conjugate symmetry by {defect}")

    def __add__(self, other: "FourierField") -> "FourierField":
        self._check_compatible(other)
        return FourierField(self.coeffs + other.coeffs, self.grid_size,
                            self.is_real and other.is_real)

    def __sub__(self, other: "FourierField") -> "FourierField":
        self._check_compatible(other)
        return FourierField(self.coeffs - other.coeffs, self.grid_size,
                            self.is_real and other.is_real)

    def scale(self, a: float) -> "FourierField":
        return FourierField(self.coeffs * a, self.grid_size, self.is_real)

    def _check_compatible(self, other: "FourierField"):
        if self.grid_size != other.grid_size:
            raise ValueError("fields live on different frequency windows")


@dataclass
class ZakharovState:
    """Phase-space point (u, n, ndot) in L2 x H^{-1/2} x H^{-3/2}."""

    u: FourierField
    n: FourierField
    ndot: FourierField
    time: float = 0.0

    def __post_init__(self):
        if not (self.u.grid_size == self.n.grid_size == self.ndot.grid_size):
            raise ValueError("state components live on different frequency windows")
        if not (self.n.is_real and self.ndot.is_real):
            raise ValueError("n and ndot must be real-flagged")

    @classmethod
    def zeros(cls, grid_size: int, time: float = 0.0) -> "ZakharovState":
        return cls(
            FourierField.zeros(grid_size),
            FourierField.zeros(grid_size, is_real=True),
            FourierField.zeros(grid_size, is_real=True),
            time,
        )

    @property
    def grid_size(self) -> int:
        return self.u.grid_size

    @property
    def is_mean_zero(self) -> bool:
        return self.n.mean_coefficient == 0 and self.ndot.mean_coefficient == 0

    def require_mean_zero(self, what: str = "operation"):
        if not self.is_mean_zero:
            raise MeanZeroError(
                f"{what} requires mean-zero wave data "
                f"(n_hat[0]={self.n.mean_coefficient}, ndot_hat[0]={self.ndot.mean_coefficient})"
            )

    def copy(self) -> "ZakharovState":
        return ZakharovState(self.u.copy(), self.n.copy(), self.ndot.copy(), self.time)

    def __add__(self, other: "ZakharovState") -> "ZakharovState":
        return ZakharovState(self.u + other.u, self.n + other.n,
                             self.ndot + other.ndot, self.time)

    def __sub__(self, other: "ZakharovState") -> "ZakharovState":
        return ZakharovState(self.u - other.u, self.n - other.n,
                             self.ndot - other.ndot, self.time)

    def scale(self, a: float) -> "ZakharovState":
        return ZakharovState(self.u.scale(a), self.n.scale(a), self.ndot.scale(a), self.time)

    def mode_triple(self, k: int) -> tuple:
        return (self.u.get(k), self.n.get(k), self.ndot.get(k))


# Tangent vectors share the state layout: a perturbation triple with real,
# mean-zero wave components.
TangentVector = ZakharovState


@dataclass
class NormSpec:
    """Selects a norm flavor: plain H^s, the phase-space sum, or a fixed mode."""

    s: float = 0.0
    flavor: str = "sobolev_Hs"  # sobolev_Hs | phase_space_H | fixed_mode_abs
    k0: int | None = None
    mode_weighting: str = "abs"  # abs -> |k0| powers, bracket -> <k0> powers

    def __post_init__(self):
        if self.flavor not in ("sobolev_Hs", "phase_space_H", "fixed_mode_abs"):
            raise ValueError(f"unknown norm flavor {self.flavor!r}")
        if self.flavor == "fixed_mode_abs" and not self.k0:
            raise ValueError("fixed_mode_abs flavor needs a nonzero k0")


# ---------------------------------------------------------------------------
# projections, derivatives, norms
# ---------------------------------------------------------------------------

def project(f: FourierField, n: int, kind: str = "low") -> FourierField:
    """Sharp frequency cutoff.

    kind="low" keeps |k| <= n, kind="high" keeps |k| >= n, and
    kind="annulus" keeps n <= |k| < 2n.  Surviving coefficients are
    bit-identical to the input.
    """
    if n < 0:
        raise ValueError("cutoff must be nonnegative")
    absk = np.abs(modes(f.grid_size))
    if kind == "low":
        mask = absk <= n
    elif kind == "high":
        mask = absk >= n
    elif kind == "annulus":
        mask = (absk >= n) & (absk < 2 * n)
    else:
        raise ValueError(f"unknown projection kind {kind!r}")
    return FourierField(np.where(mask, f.coeffs, 0.0 + 0.0j), f.grid_size, f.is_real)


def sobolev_norm(f: FourierField, s: float) -> float:
    """(1/sqrt(2pi)) * (sum <k>^(2s) |u_hat[k]|^2)^(1/2)."""
    w = bracket(modes(f.grid_size)) ** (2.0 * s)
    return math.sqrt(float(np.sum(w * np.abs(f.coeffs) ** 2))) / math.sqrt(TWO_PI)


def phase_space_norm(z: ZakharovState) -> float:
    """||u||_{L2} + ||n||_{H^{-1/2}} + ||ndot||_{H^{-3/2}}."""
    return (sobolev_norm(z.u, 0.0)
            + sobolev_norm(z.n, -0.5)
            + sobolev_norm(z.ndot, -1.5))


def state_norm(z: ZakharovState, spec: NormSpec) -> float:
    if spec.flavor == "phase_space_H":
        return phase_space_norm(z)
    if spec.flavor == "fixed_mode_abs":
        return fixed_mode_abs(z, spec.k0, weighting=spec.mode_weighting)
    # sobolev_Hs applies mode-wise to the u component
    return sobolev_norm(z.u, spec.s)


def fixed_mode_abs(z: ZakharovState, k0: int, weighting: str = "abs") -> float:
    """Single-mode absolute value |u_hat| + w^(-1/2)|n_hat| + w^(-3/2)|ndot_hat|.

    The default weight w = |k0| follows the phase-space convention for
    cylinders; weighting="bracket" swaps in <k0> instead.
    """
    if k0 == 0:
        raise ValueError("fixed-mode absolute value undefined at zero frequency")
    if weighting == "abs":
        w = float(abs(k0))
    elif weighting == "bracket":
        w = float(bracket(k0))
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    uu, nn, dd = z.mode_triple(k0)
    return abs(uu) + w ** -0.5 * abs(nn) + w ** -1.5 * abs(dd)


def derivative(f: FourierField, order: int) -> FourierField:
    """Apply the Fourier symbol (ik)^order; negative orders need zero mean."""
    if order == 0:
        return f.copy()
    k = modes(f.grid_size)
    if order < 0:
        if f.mean_coefficient != 0:
            raise MeanZeroError("antiderivative requires mean-zero field")
        symbol = np.zeros(len(k), dtype=np.complex128)
        nz = k != 0
        symbol[nz] = (1j * k[nz].astype(np.complex128)) ** order
    else:
        symbol = (1j * k.astype(np.complex128)) ** order
    return FourierField(symbol * f.coeffs, f.grid_size, f.is_real)


# ---------------------------------------------------------------------------
# physical-space bridges
# ---------------------------------------------------------------------------

def physical_evaluate(f: FourierField, points) -> np.ndarray:
    """u(x) = (1/2pi) sum_k u_hat[k] exp(ikx) at arbitrary points."""
    x = np.atleast_1d(np.asarray(points, dtype=float))
    k = modes(f.grid_size)
    phases = np.exp(1j * np.outer(x, k))
    return (phases @ f.coeffs) / TWO_PI


def grid_points(m: int) -> np.ndarray:
    return TWO_PI * np.arange(m) / m


def to_grid(f: FourierField, m: int) -> np.ndarray:
    """Values on the uniform m-point grid (exact for m >= 2K+1)."""
    if m < 2 * f.grid_size + 1:
        raise ValueError("grid too small to hold the frequency window")
    k = modes(f.grid_size)
    stacked = np.zeros(m, dtype=np.complex128)
    stacked[k % m] = f.coeffs
    return np.fft.ifft(stacked) * (m / TWO_PI)


def from_grid(values: np.ndarray, grid_size: int, is_real: bool = False) -> FourierField:
    """Coefficients -K..K from uniform grid samples (band-limited exact)."""
    m = len(values)
    if m < 2 * grid_size + 1:
        raise ValueError("grid too small for the requested window")
    stacked = np.fft.fft(np.asarray(values, dtype=np.complex128)) * (TWO_PI / m)
    k = modes(grid_size)
    return FourierField(stacked[k % m], grid_size, is_real)


def pad_size(grid_size: int) -> int:
    """FFT length making quadratic products exact on the retained window."""
    return next_fast_len(3 * grid_size + 1)


def dealiased_product(f: FourierField, g: FourierField) -> FourierField:
    """Coefficients of the pointwise product f*g, exact on |k| <= K.

    Both factors are band-limited to K, so evaluating on >= 3K+1 points and
    transforming back reproduces the convolution sum on the retained window.
    """
    f._check_compatible(g)
    m = pad_size(f.grid_size)
    values = to_grid(f, m) * to_grid(g, m)
    return from_grid(values, f.grid_size, f.is_real and g.is_real)


def grid_quadrature(values: np.ndarray) -> float:
    """(2pi/m) * sum of samples: exact integral for resolved trigonometric data."""
    return float(np.real(np.sum(values))) * TWO_PI / len(values)


# ---------------------------------------------------------------------------
# Galilean mean removal
# ---------------------------------------------------------------------------

def galilean_normalize(z: ZakharovState):
    """Strip the spatial means of (n, ndot) at t=0.

    Returns (state', c0, c1) with c0 = int n dx, c1 = int ndot dx; the
    u component is untouched because the compensating phase is 1 at t=0.
    """
    if z.time != 0.0:
        raise ValueError("mean removal is defined at initial time only")
    c0 = z.n.mean_coefficient
    c1 = z.ndot.mean_coefficient
    if abs(c0.imag) > 0 or abs(c1.imag) > 0:
        raise ValueError("mean coefficients of real fields must be real")
    out = z.copy()
    out.n.coeffs[z.grid_size] = 0.0
    out.ndot.coeffs[z.grid_size] = 0.0
    return out, float(c0.real), float(c1.real)


def galilean_phase(c0: float, c1: float, t: float) -> float:
    """Accumulated phase of the mean-removal transform at time t.

    The mean of n drifts as (c0 + c1 t)/(2pi), and the transformed u
    carries exp(i * phi(t)) with phi' equal to that mean, so
    phi(t) = (c0 t + c1 t^2 / 2) / (2pi).
    """
    return (c0 * t + 0.5 * c1 * t * t) / TWO_PI


def galilean_restore(z: ZakharovState, c0: float, c1: float) -> ZakharovState:
    """Map a mean-zero-frame state at time t back to the original frame."""
    t = z.time
    out = z.copy()
    out.u.coeffs *= np.exp(-1j * galilean_phase(c0, c1, t))
    out.n.coeffs[z.grid_size] += c0 + c1 * t
    out.ndot.coeffs[z.grid_size] += c1
    return out


# ---------------------------------------------------------------------------
# serialization: columnar text, bit-exact round trip
# ---------------------------------------------------------------------------

def _format_complex_row(k: int, c: complex) -> str:
    return f"{k} {c.real!r} {c.imag!r}"


def save_field(f: FourierField, path):
    with open(path, "w") as fh:
        fh.write(_field_block(f))


def _field_block(f: FourierField) -> str:
    lines = [f"grid_size={f.grid_size} is_real={int(f.is_real)}", "k re im"]
    for k, c in zip(modes(f.grid_size), f.coeffs):
        lines.append(_format_complex_row(int(k), complex(c)))
    return "\n".join(lines) + "\n"


def load_field(path) -> FourierField:
    with open(path) as fh:
        return _parse_field_block(fh.read().splitlines())


def _parse_field_block(lines) -> FourierField:
    meta = dict(item.split("=") for item in lines[0].split())
    grid_size = int(meta["grid_size"])
    is_real = bool(int(meta["is_real"]))
    f = FourierField.zeros(grid_size, is_real)
    for row in lines[2:]:
        if not row.strip():
            continue
        k_s, re_s, im_s = row.split()
        f.coeffs[int(k_s) + grid_size] = float(re_s) + 1j * float(im_s)
    return f


def save_state(z: ZakharovState, path):
    with open(path, "w") as fh:
        fh.write(f"state time={z.time!r}\n")
        for name, f in (("u", z.u), ("n", z.n), ("ndot", z.ndot)):
            fh.write(f"component {name}\n")
            fh.write(_field_block(f))


def load_state(path) -> ZakharovState:
    with open(path) as fh:
        lines = fh.read().splitlines()
    time = float(lines[0].split("=", 1)[1])
    blocks = {}
    i = 1
    while i < len(lines):
        assert lines[i].startswith("component ")
        name = lines[i].split()[1]
        meta = dict(item.split("=") for item in lines[i + 1].split())
        n_rows = 2 * int(meta["grid_size"]) + 1
        blocks[name] = _parse_field_block(lines[i + 1 : i + 3 + n_rows])
        i += 3 + n_rows
    return ZakharovState(blocks["u"], blocks["n"], blocks["ndot"], time)
