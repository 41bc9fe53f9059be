"""Resonance identities, discrete space-time norms, and bilinear ratio scans.

Space-time conventions: a mode exp(i(kx - tau t)) carries frequency pair
(k, tau), so free Schrodinger solutions sit on tau = alpha k^2 and free
wave solutions on |tau| = beta |k|.  Modulations measure the distance to
those characteristics:

    schrodinger:  <tau - alpha k^2>
    wave:         <|tau| - beta |k|>

The scan machinery builds fields from finitely many such atoms, windows
them in time with a smooth bump (1 on [-1,1], 0 outside [-2,2]), and
evaluates the Y/Z-type norms on per-mode tau grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import spearmanr

from .fields import TWO_PI, bracket
from .propagators import PhysicalConstants

SCHRODINGER = "schrodinger"
WAVE = "wave"


# ---------------------------------------------------------------------------
# exact resonance identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyTriple:
    """Interacting frequency triple with its additive constraints.

    schrodinger kind: tau0 = tau1 + tau2, k0 = k1 + k2 != 0
    wave kind:        tau0 = tau1 - tau2, k0 = k1 - k2 != 0
    """

    kind: str
    k0: int
    k1: int
    k2: int
    tau0: float
    tau1: float
    tau2: float

    def __post_init__(self):
        if self.kind == SCHRODINGER:
            if self.k0 != self.k1 + self.k2:
                raise ValueError("schrodinger kind needs k0 = k1 + k2")
            if self.tau0 != self.tau1 + self.tau2:
                raise ValueError("schrodinger kind needs tau0 = tau1 + tau2")
        elif self.kind == WAVE:
            if self.k0 != self.k1 - self.k2:
                raise ValueError("wave kind needs k0 = k1 - k2")
            if self.tau0 != self.tau1 - self.tau2:
                raise ValueError("wave kind needs tau0 = tau1 - tau2")
        else:
            raise ValueError(f"unknown triple kind {self.kind!r}")
        if self.k0 == 0:
            raise ValueError("identities require k0 != 0")


def modulation_bound(trip: FrequencyTriple, c: PhysicalConstants):
    """Largest modulation, its algebraic lower bound, and the identity residual.

    Returns (lhs_max, rhs_bound, residual).  The residual evaluates the
    telescoping identity behind the bound and must vanish; its k-part is
    combined in integer arithmetic so only tau rounding survives.  The
    exact inequality lhs_max >= rhs_bound / 3 holds for every admissible
    triple because the three terms sum (with signs) to the right side.
    """
    a, b = c.alpha, c.beta
    k0, k1, k2 = trip.k0, trip.k1, trip.k2
    if trip.kind == SCHRODINGER:
        s1 = float(np.sign(trip.tau2 * k2))
        lhs = max(abs(trip.tau0 - a * k0**2),
                  abs(trip.tau1 - a * k1**2),
                  abs(abs(trip.tau2) - b * abs(k2)))
        rhs = abs(a) * abs(k2) * abs(k0 + k1 - (b / a) * s1)
        int_part = k1 * k1 - k0 * k0 + k2 * (k0 + k1)
        residual = (trip.tau0 - trip.tau1 - trip.tau2) + a * int_part
    else:
        s2 = float(np.sign(trip.tau0 * k0))
        lhs = max(abs(abs(trip.tau0) - b * abs(k0)),
                  abs(trip.tau1 - a * k1**2),
                  abs(trip.tau2 - a * k2**2))
        rhs = abs(a) * abs(k0) * abs(k1 + k2 - (b / a) * s2)
        int_part = (k1 * k1 - k2 * k2) - k0 * (k1 + k2)
        residual = (trip.tau0 - trip.tau1 + trip.tau2) + a * int_part
    return lhs, rhs, residual


def modulation_sweep(kind: str, kmax: int, n_tau: int, c: PhysicalConstants,
                     seed: int = 0, tau_scale: float = 50.0,
                     chunk: int = 256) -> dict:
    """Exhaustive identity sweep over all |k_i| <= kmax, random taus.

    For every integer pair (k1, k2) whose constrained k0 is nonzero and
    inside the window, n_tau random tau assignments are tested.  Reports
    the worst residual and the minimum of 3*lhs_max - rhs_bound (the exact
    max-of-three inequality in product form).
    """
    a, b = c.alpha, c.beta
    pairs = []
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(-kmax, kmax + 1):
            k0 = k1 + k2 if kind == SCHRODINGER else k1 - k2
            if k0 != 0 and abs(k0) <= kmax:
                pairs.append((k0, k1, k2))
    rng = np.random.default_rng(seed)
    max_residual = 0.0
    min_slack = math.inf
    count = 0
    for start in range(0, len(pairs), chunk):
        block = np.array(pairs[start : start + chunk], dtype=float)
        k0 = block[:, 0:1]
        k1 = block[:, 1:2]
        k2 = block[:, 2:3]
        tau1 = rng.uniform(-tau_scale, tau_scale, size=(len(block), n_tau))
        tau2 = rng.uniform(-tau_scale, tau_scale, size=(len(block), n_tau))
        if kind == SCHRODINGER:
            tau0 = tau1 + tau2
            s = np.sign(tau2 * k2)
            lhs = np.maximum(
                np.abs(tau0 - a * k0**2),
                np.maximum(np.abs(tau1 - a * k1**2),
                           np.abs(np.abs(tau2) - b * np.abs(k2))),
            )
            rhs = abs(a) * np.abs(k2) * np.abs(k0 + k1 - (b / a) * s)
            int_part = k1 * k1 - k0 * k0 + k2 * (k0 + k1)
            residual = (tau0 - tau1 - tau2) + a * int_part
        else:
            tau0 = tau1 - tau2
            s = np.sign(tau0 * k0)
            lhs = np.maximum(
                np.abs(np.abs(tau0) - b * np.abs(k0)),
                np.maximum(np.abs(tau1 - a * k1**2),
                           np.abs(tau2 - a * k2**2)),
            )
            rhs = abs(a) * np.abs(k0) * np.abs(k1 + k2 - (b / a) * s)
            int_part = (k1 * k1 - k2 * k2) - k0 * (k1 + k2)
            residual = (tau0 - tau1 + tau2) + a * int_part
        max_residual = max(max_residual, float(np.max(np.abs(residual))))
        min_slack = min(min_slack, float(np.min(3.0 * lhs - rhs)))
        count += residual.size
    return {
        "kind": kind,
        "kmax": kmax,
        "count": count,
        "max_residual": max_residual,
        "min_slack": min_slack,
        "violations": int(max_residual > 1e-10) + int(min_slack < 0),
    }


def classify_triple(k0: int, k1: int, k2: int, c_res: float = 2.0) -> str:
    """Resonant iff the three dyadic magnitudes are pairwise comparable.

    Comparability reads max(|k_i|, 1) / max(|k_j|, 1) <= c_res for every
    pair; c_res = 2 is the default reading of "same dyadic size".
    """
    mags = [max(abs(k0), 1), max(abs(k1), 1), max(abs(k2), 1)]
    return "resonant" if max(mags) <= c_res * min(mags) else "nonresonant"


# ---------------------------------------------------------------------------
# discrete space-time fields and X^{s,b}-type norms
# ---------------------------------------------------------------------------

@dataclass
class SpaceTimeField:
    """Dense space-time coefficients on k in {-K..K} and a uniform tau grid."""

    coeffs: np.ndarray  # shape (2K+1, n_tau)
    grid_size: int
    taus: np.ndarray
    flavor: str
    window: float

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        self.taus = np.asarray(self.taus, dtype=float)
        if self.coeffs.shape != (2 * self.grid_size + 1, len(self.taus)):
            raise ValueError("coefficient array does not match the (k, tau) grid")
        if self.flavor not in (SCHRODINGER, WAVE):
            raise ValueError(f"unknown flavor {self.flavor!r}")

    @property
    def dtau(self) -> float:
        return self.window / len(self.taus)


def modulation_weight(flavor: str, k, tau, c: PhysicalConstants) -> np.ndarray:
    """<tau - alpha k^2> or <|tau| - beta |k|> on broadcastable arrays."""
    k = np.asarray(k, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if flavor == SCHRODINGER:
        return bracket(tau - c.alpha * k**2)
    return bracket(np.abs(tau) - c.beta * np.abs(k))


def xsb_norm(f: SpaceTimeField, s: float, b: float, c: PhysicalConstants) -> float:
    """Discrete ell^2_k L^2_tau norm with weight <k>^s * modulation^b."""
    k = np.arange(-f.grid_size, f.grid_size + 1, dtype=float)[:, None]
    w = modulation_weight(f.flavor, k, f.taus[None, :], c)
    kb = bracket(k) ** (2.0 * s)
    total = float(np.sum(kb * w ** (2.0 * b) * np.abs(f.coeffs) ** 2)) * f.dtau
    return math.sqrt(total)


def l2k_l1tau_norm(f: SpaceTimeField, s: float, c: PhysicalConstants,
                   over_modulation: bool = False) -> float:
    """ell^2_k of the tau-L^1 mass, optionally damped by one modulation power."""
    k = np.arange(-f.grid_size, f.grid_size + 1, dtype=float)[:, None]
    w = modulation_weight(f.flavor, k, f.taus[None, :], c)
    damp = 1.0 / w if over_modulation else np.ones_like(w)
    inner = np.sum(np.abs(f.coeffs) * damp, axis=1) * f.dtau
    total = float(np.sum(bracket(k[:, 0]) ** (2.0 * s) * inner**2))
    return math.sqrt(total)


def y_norm(f: SpaceTimeField, s: float, c: PhysicalConstants) -> float:
    """Solution-space norm: X^{s,1/2} plus the ell^2_k L^1_tau summand."""
    return xsb_norm(f, s, 0.5, c) + l2k_l1tau_norm(f, s, c, over_modulation=False)


def z_norm(f: SpaceTimeField, s: float, c: PhysicalConstants) -> float:
    """Nonlinear-term norm: X^{s,-1/2} plus the modulation-damped L^1 summand."""
    return xsb_norm(f, s, -0.5, c) + l2k_l1tau_norm(f, s, c, over_modulation=True)


# ---------------------------------------------------------------------------
# smooth time window and its transform
# ---------------------------------------------------------------------------

def psi_window(t) -> np.ndarray:
    """C-infinity bump: 1 on [-1,1], 0 outside [-2,2], monotone in between."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    out[t <= 1.0] = 1.0
    mid = (t > 1.0) & (t < 2.0)
    u = 2.0 - t[mid]  # in (0,1)

    def phi(x):
        with np.errstate(divide="ignore", over="ignore"):
            val = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
        return val

    out[mid] = phi(u) / (phi(u) + phi(1.0 - u))
    return out


@lru_cache(maxsize=4)
def _window_transform_table(power: int = 1):
    """Tabulated Fourier transform of psi^power on a dense sigma >= 0 grid."""
    length = 64.0
    m = 1 << 19
    dt = length / m
    t = -0.5 * length + dt * np.arange(m)
    samples = psi_window(t) ** power
    spectrum = np.conj(np.fft.fft(samples))
    sigma = TWO_PI * np.arange(m // 2) / length
    phase = np.where(np.arange(m // 2) % 2 == 0, 1.0, -1.0)
    values = np.real(spectrum[: m // 2]) * phase * dt
    return sigma, values


def window_transform(sigma, power: int = 1) -> np.ndarray:
    grid, values = _window_transform_table(power)
    return np.interp(np.abs(np.asarray(sigma, dtype=float)), grid, values,
                     right=0.0)


@lru_cache(maxsize=4)
def _window_halfwidth(power: int = 1) -> float:
    """Sigma beyond which the window transform is negligible."""
    grid, values = _window_transform_table(power)
    peak = abs(values[0])
    big = np.nonzero(np.abs(values) > 1e-9 * peak)[0]
    return max(40.0, float(grid[big[-1]]) + 5.0)


# ---------------------------------------------------------------------------
# atom-based norm evaluation for the scans
# ---------------------------------------------------------------------------

_SIGMA_STEP = 0.125


def _merged_windows(centers: np.ndarray, halfwidth: float) -> np.ndarray:
    """Union of tau windows around atom centers, on a uniform local grid."""
    intervals = sorted((float(x) - halfwidth, float(x) + halfwidth) for x in centers)
    merged = [list(intervals[0])]
    for lo, hi in intervals[1:]:
        if lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    grids = [np.arange(lo, hi + _SIGMA_STEP, _SIGMA_STEP) for lo, hi in merged]
    return np.concatenate(grids)


def _atom_norm_parts(atoms_by_k: dict, flavor: str, s: float,
                     c: PhysicalConstants, power: int):
    """Norm ingredients of a windowed atom sum, per mode then aggregated.

    atoms_by_k maps k -> list of (tau_center, amplitude).  Returns the
    squares of the four composites: X^{s,1/2}, X^{s,-1/2}, plain L^1 and
    modulation-damped L^1 (each already ell^2-aggregated over k).
    """
    x_plus = x_minus = l1_plain = l1_damped = 0.0
    halfwidth = _window_halfwidth(power)
    for k, atoms in atoms_by_k.items():
        centers = np.array([t for t, _ in atoms])
        amps = np.array([a for _, a in atoms], dtype=np.complex128)
        taus = _merged_windows(centers, halfwidth)
        field = np.zeros(len(taus), dtype=np.complex128)
        for t0, a in zip(centers, amps):
            field += a * window_transform(taus - t0, power)
        w = modulation_weight(flavor, float(k), taus, c)
        kb = bracket(float(k)) ** (2.0 * s)
        absf2 = np.abs(field) ** 2
        absf = np.abs(field)
        x_plus += kb * float(np.sum(w * absf2)) * _SIGMA_STEP
        x_minus += kb * float(np.sum(absf2 / w)) * _SIGMA_STEP
        l1_plain += kb * (float(np.sum(absf)) * _SIGMA_STEP) ** 2
        l1_damped += kb * (float(np.sum(absf / w)) * _SIGMA_STEP) ** 2
    return x_plus, x_minus, l1_plain, l1_damped


def atoms_y_norm(atoms_by_k, flavor, s, c, power=1) -> float:
    xp, _, l1, _ = _atom_norm_parts(atoms_by_k, flavor, s, c, power)
    return math.sqrt(xp) + math.sqrt(l1)


def atoms_z_norm(atoms_by_k, flavor, s, c, power=1) -> float:
    _, xm, _, l1d = _atom_norm_parts(atoms_by_k, flavor, s, c, power)
    return math.sqrt(xm) + math.sqrt(l1d)


# ---------------------------------------------------------------------------
# dyadic bilinear ratio scan
# ---------------------------------------------------------------------------

def _dyadic_blocks(n_max: int):
    out = [1]
    while out[-1] < n_max:
        out.append(2 * out[-1])
    return out


@lru_cache(maxsize=None)
def _feasible_mode_pairs(kind: str, n0: int, n1: int, n2: int):
    """Signed (k1, k2) with |k1| in [n1,2n1), |k2| in [n2,2n2) whose k0 lands
    in the n0 block."""
    combos = []
    for a in range(n1, 2 * n1):
        for b in range(n2, 2 * n2):
            for s1 in (1, -1):
                for s2 in (1, -1):
                    k1, k2 = s1 * a, s2 * b
                    k0 = k1 + k2 if kind == SCHRODINGER else k1 - k2
                    if n0 <= abs(k0) < 2 * n0:
                        combos.append((k1, k2))
    return tuple(combos)


@lru_cache(maxsize=None)
def _admissible_triples(kind: str, n_max: int, c_res: float):
    """Nonresonant, support-feasible dyadic block triples with max = n_max."""
    blocks = _dyadic_blocks(n_max)
    out = []
    for n0 in blocks:
        for n1 in blocks:
            for n2 in blocks:
                if max(n0, n1, n2) != n_max:
                    continue
                if classify_triple(n0, n1, n2, c_res) == "resonant":
                    continue
                if _feasible_mode_pairs(kind, n0, n1, n2):
                    out.append((n0, n1, n2))
    return tuple(out)


def _draw_sample_ratio(kind: str, n_max: int, c: PhysicalConstants,
                       rng: np.random.Generator, c_res: float):
    """One random nonresonant sample; returns (blocks, ratio) or None."""
    triples = _admissible_triples(kind, n_max, c_res)
    if not triples:
        return None
    n0, n1, n2 = triples[rng.integers(len(triples))]
    combos = _feasible_mode_pairs(kind, n0, n1, n2)
    n_pairs = int(rng.integers(1, 4))
    picks = [combos[rng.integers(len(combos))] for _ in range(n_pairs)]

    u_atoms: dict = {}
    for k1, _ in picks:
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        u_atoms.setdefault(k1, []).append((c.alpha * k1**2, amp))

    v_atoms: dict = {}
    if kind == SCHRODINGER:
        # real wave-flavor factor: both branches plus conjugate mirrors
        for _, k2 in picks:
            base = abs(k2)
            if any(t for t in v_atoms.get(base, [])):
                continue
            p = rng.standard_normal() + 1j * rng.standard_normal()
            q = rng.standard_normal() + 1j * rng.standard_normal()
            v_atoms.setdefault(base, []).extend(
                [(c.beta * base, p), (-c.beta * base, q)])
            v_atoms.setdefault(-base, []).extend(
                [(-c.beta * base, np.conj(p)), (c.beta * base, np.conj(q))])
    else:
        for _, k2 in picks:
            amp = rng.standard_normal() + 1j * rng.standard_normal()
            v_atoms.setdefault(k2, []).append((c.alpha * k2**2, amp))

    # numerator atoms: all cross pairs surviving the n0 projection
    prod_atoms: dict = {}
    for ku, au in u_atoms.items():
        for kv, av in v_atoms.items():
            k0 = ku + kv if kind == SCHRODINGER else ku - kv
            if not n0 <= abs(k0) < 2 * n0:
                continue
            for t1, a1 in au:
                for t2, a2 in av:
                    if kind == SCHRODINGER:
                        t0, amp = t1 + t2, a1 * a2
                    else:
                        t0, amp = t1 - t2, 1j * k0 * a1 * np.conj(a2)
                    prod_atoms.setdefault(k0, []).append((t0, amp))
    if not prod_atoms:
        return None

    if kind == SCHRODINGER:
        numerator = atoms_z_norm(prod_atoms, SCHRODINGER, 0.0, c, power=2)
        den_u = atoms_y_norm(u_atoms, SCHRODINGER, 0.0, c)
        den_v = atoms_y_norm(v_atoms, WAVE, -0.5, c)
    else:
        numerator = atoms_z_norm(prod_atoms, WAVE, -0.5, c, power=2)
        den_u = atoms_y_norm(u_atoms, SCHRODINGER, 0.0, c)
        den_v = atoms_y_norm(v_atoms, SCHRODINGER, 0.0, c)
    if den_u == 0.0 or den_v == 0.0:
        return None
    return (n0, n1, n2), numerator / (den_u * den_v)


@dataclass
class ScanResult:
    rows: list
    aggregates: list  # (n_max, max ratio)
    slope: float
    intercept: float
    spearman: float


def bilinear_ratio_scan(ns, samples: int, c: PhysicalConstants, seed: int = 0,
                        kind: str = SCHRODINGER, c_res: float = 2.0) -> ScanResult:
    """Empirical decay probe for the nonresonant bilinear product bounds.

    For each dyadic n_max, draws random sparse nonresonant samples, records
    Z(product)/(Y(u) Y(v)) ratios, keeps the per-n_max maximum, and fits
    log(max ratio) against log(n_max).
    """
    ns = list(ns)
    if not ns or any(n & (n - 1) for n in ns) or ns != sorted(set(ns)):
        raise ValueError("ns must be strictly increasing powers of two")
    if samples < 1:
        raise ValueError("need at least one sample")
    rows = []
    aggregates = []
    for n_max in ns:
        best = 0.0
        for index in range(samples):
            for attempt in range(32):
                rng = np.random.default_rng([seed, n_max, index, attempt])
                drawn = _draw_sample_ratio(kind, n_max, c, rng, c_res)
                if drawn is not None:
                    break
            else:
                continue
            (n0, n1, n2), ratio = drawn
            rows.append({"N0": n0, "N1": n1, "N2": n2, "N_max": n_max,
                         "ratio": ratio, "seed": seed, "sample": index})
            best = max(best, ratio)
        aggregates.append((n_max, best))
    slope, intercept, rho = _fit_aggregates(aggregates)
    return ScanResult(rows, aggregates, slope, intercept, rho)


def _fit_aggregates(aggregates):
    if len(aggregates) < 2:
        return math.nan, math.nan, math.nan
    xs = np.log([n for n, _ in aggregates])
    ys = np.log([r for _, r in aggregates])
    slope, intercept = np.polyfit(xs, ys, 1)
    rho = spearmanr([n for n, _ in aggregates], [r for _, r in aggregates]).statistic
    return float(slope), float(intercept), float(rho)
