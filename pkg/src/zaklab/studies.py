"""Orchestrated studies: truncation rate, stepper order, symplectic sweeps,
the nonsqueezing probe, and the mass-driven gluing demo.

Every study consumes a StudySpec (kind + full SimConfig), is deterministic
given the seed, and renders to a run directory holding manifest.json,
results.csv, and series.jsonl.  Fits always report slope/intercept/residual
alongside the data points so downstream tools never recompute them.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig, save_manifest
from .fields import (
    FourierField,
    ZakharovState,
    phase_space_norm,
    save_state,
)
from .flow import (
    SchemeSpec,
    evolve,
    evolve_truncated,
    gwp_schedule,
    mass,
    wave_data_norm,
)
from .propagators import PhysicalConstants
from .resonance import bilinear_ratio_scan, modulation_sweep
from .symplectic import check_symplectic, mode_distance


@dataclass
class StudySpec:
    kind: str
    config: SimConfig

    KINDS = ("truncation_rate", "dt_convergence", "symplectic_sweep",
             "nonsqueezing_probe", "gwp_demo")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown study kind {self.kind!r}")
        self.config.validate()


@dataclass
class FitResult:
    slope: float
    intercept: float
    residual: float
    points: int


def fit_loglog(xs, ys) -> FitResult:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3:
        raise ValueError("a fit needs at least three points")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + intercept)) ** 2)))
    return FitResult(float(slope), float(intercept), resid, len(xs))


@dataclass
class StudyResult:
    kind: str
    columns: list
    rows: list
    series: list = field(default_factory=list)
    fit: FitResult | None = None
    summary: dict = field(default_factory=dict)
    hard_failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.hard_failures


# ---------------------------------------------------------------------------
# deterministic initial data
# ---------------------------------------------------------------------------

def smooth_random_state(grid_size: int, rng: np.random.Generator,
                        norm: float = 1.0, decay: float = 0.4,
                        band: int = 0) -> ZakharovState:
    """Random state with exponentially decaying spectrum, scaled to a given
    phase-space norm.  band > 0 additionally zeroes all |k| > band."""
    z = ZakharovState.zeros(grid_size)
    limit = band if band > 0 else grid_size
    for k in range(-grid_size, grid_size + 1):
        if abs(k) > limit:
            continue
        z.u.coeffs[k + grid_size] = (
            (rng.standard_normal() + 1j * rng.standard_normal())
            * math.exp(-decay * abs(k))
        )
    for f in (z.n, z.ndot):
        for k in range(1, min(limit, grid_size) + 1):
            a = ((rng.standard_normal() + 1j * rng.standard_normal())
                 * math.exp(-decay * k))
            f.coeffs[k + grid_size] = a
            f.coeffs[-k + grid_size] = np.conj(a)
    current = phase_space_norm(z)
    if current == 0:
        return z
    return z.scale(norm / current)


def state_from_config(config: SimConfig) -> ZakharovState:
    rng = np.random.default_rng(config.seed)
    return smooth_random_state(config.grid_size, rng, config.z0_norm,
                               config.z0_decay, config.z0_band)


# ---------------------------------------------------------------------------
# truncation-approximation rate
# ---------------------------------------------------------------------------

def truncation_rate_study(spec: StudySpec) -> StudyResult:
    """sup_{s <= t} ||full(s) - truncated_N(s)|| against N, log-log fitted.

    The full-flow reference runs at dt/4 on the same window; a second full
    run at the truncated flow's own dt estimates the integrator noise floor
    so plateaus are flagged instead of silently fitted.
    """
    cfg = spec.config
    c = cfg.constants()
    z0 = state_from_config(cfg)
    t = cfg.t_final
    steps = max(1, int(round(t / cfg.dt)))
    stride = max(1, steps // 32)

    ref = evolve(z0, t, cfg.scheme_spec(dt=cfg.dt / 4, sample_stride=4 * stride), c)
    full_same_dt = evolve(z0, t, cfg.scheme_spec(sample_stride=stride), c)
    ref_by_time = {round(tt, 12): st for tt, st in zip(ref.times, ref.states)}

    def sup_diff(record):
        worst = 0.0
        per_time = []
        for tt, st in zip(record.times, record.states):
            key = round(tt, 12)
            if key not in ref_by_time:
                continue
            d = phase_space_norm(ref_by_time[key] - st)
            per_time.append((tt, d))
            worst = max(worst, d)
        return worst, per_time

    noise, _ = sup_diff(full_same_dt)

    rows, series = [], []
    errors = []
    for n_cut in cfg.ns:
        rec = evolve_truncated(z0, t, n_cut,
                               cfg.scheme_spec(sample_stride=stride), c)
        err, per_time = sup_diff(rec)
        errors.append(err)
        for tt, d in per_time:
            series.append({"N": n_cut, "t": tt, "error": d})
    fit = fit_loglog(cfg.ns, errors)
    plateau = [int(err <= 3.0 * noise) for err in errors]
    for n_cut, err, flag in zip(cfg.ns, errors, plateau):
        rows.append({"N": n_cut, "error": err, "slope": fit.slope,
                     "intercept": fit.intercept, "residual": fit.residual,
                     "plateau": flag})
    failures = []
    if fit.slope >= 0:
        failures.append(f"truncation-rate slope {fit.slope:.3f} is not negative")
    summary = {
        "slope": fit.slope,
        "empirical_delta": -fit.slope,
        "noise_floor": noise,
        "plateau_flagged": bool(any(plateau[-2:])),
    }
    return StudyResult("truncation_rate", ["N", "error", "slope", "intercept",
                                           "residual", "plateau"],
                       rows, series, fit, summary, failures)


# ---------------------------------------------------------------------------
# stepper order
# ---------------------------------------------------------------------------

def dt_convergence_study(spec: StudySpec) -> StudyResult:
    """Self-convergence of the stepper against a dt/16 reference."""
    cfg = spec.config
    c = cfg.constants()
    z0 = state_from_config(cfg)
    t = cfg.t_final
    dts = sorted(cfg.dts, reverse=True)
    dt_ref = min(dts) / 16.0
    ref = evolve(z0, t, cfg.scheme_spec(dt=dt_ref, sample_stride=10**9), c).final_state

    rows, errors = [], []
    for dt in dts:
        final = evolve(z0, t, cfg.scheme_spec(dt=dt, sample_stride=10**9), c).final_state
        errors.append(phase_space_norm(final - ref))
    if max(errors) < 1e-12:
        # exact linear regime: nothing to fit
        for dt, err in zip(dts, errors):
            rows.append({"dt": dt, "error": err, "slope": float("nan"),
                         "intercept": float("nan"), "residual": float("nan")})
        return StudyResult("dt_convergence", ["dt", "error", "slope",
                                              "intercept", "residual"],
                           rows, [], None,
                           {"slope": None, "exact_linear": True}, [])
    fit = fit_loglog(dts, errors)
    for dt, err in zip(dts, errors):
        rows.append({"dt": dt, "error": err, "slope": fit.slope,
                     "intercept": fit.intercept, "residual": fit.residual})
    failures = []
    if not 1.8 <= fit.slope <= 2.2:
        failures.append(f"stepper order {fit.slope:.3f} outside 2 +/- 0.2")
    return StudyResult("dt_convergence", ["dt", "error", "slope", "intercept",
                                          "residual"],
                       rows, [{"dt": d, "error": e} for d, e in zip(dts, errors)],
                       fit, {"slope": fit.slope, "exact_linear": False}, failures)


# ---------------------------------------------------------------------------
# symplectic sweep
# ---------------------------------------------------------------------------

def symplectic_sweep(spec: StudySpec) -> StudyResult:
    """Flow-map symplecticity of the hybrid flow plus exact sanity maps."""
    cfg = spec.config
    c = cfg.constants()
    z0 = state_from_config(cfg)
    n_cut = cfg.trunc_n
    scheme = cfg.scheme_spec(sample_stride=10**9)

    def hybrid(z, t):
        return evolve_truncated(z, t, n_cut, scheme, c).final_state

    report = check_symplectic(hybrid, z0, cfg.t_final, n_cut, cfg.pairs,
                              cfg.fd_step, c, np.random.default_rng(cfg.seed))

    origin = ZakharovState.zeros(cfg.grid_size)
    ident = check_symplectic(lambda z, t: z, origin, 0.0, n_cut, 4,
                             cfg.fd_step, c, np.random.default_rng(cfg.seed + 1))
    scaling = check_symplectic(lambda z, t: z.scale(2.0), origin, 0.0, n_cut, 4,
                               cfg.fd_step, c, np.random.default_rng(cfg.seed + 2))

    rows = [{"pair": e["pair"], "omega_before": e["omega_before"],
             "omega_after": e["omega_after"], "defect": e["defect"]}
            for e in report.entries]
    failures = []
    if report.max_defect > cfg.tol_defect:
        failures.append(f"max defect {report.max_defect:.3e} > {cfg.tol_defect}")
    if ident.max_defect != 0.0:
        failures.append(f"identity-flow defect {ident.max_defect} != 0")
    if abs(scaling.max_defect - 3.0) > 1e-12:
        failures.append(f"scaling-map defect {scaling.max_defect} != 3")
    summary = {
        "max_defect": report.max_defect,
        "identity_defect": ident.max_defect,
        "scaling_defect": scaling.max_defect,
        "epsilon": report.epsilon,
    }
    return StudyResult("symplectic_sweep",
                       ["pair", "omega_before", "omega_after", "defect"],
                       rows, rows, None, summary, failures)


# ---------------------------------------------------------------------------
# nonsqueezing probe
# ---------------------------------------------------------------------------

def _enclosing_radius(samples, k, mean_center):
    """Smallest covering radius over candidate centers near the sample mean.

    Candidates vary each of the three complex components over a 5-point
    star (center, +/-h, +/-ih) scaled by the per-component spread.
    """
    comps = np.array([z.mode_triple(k) for z in samples])  # (M, 3)
    offsets = []
    for j in range(3):
        spread = float(np.std(comps[:, j]))
        h = 0.5 * spread
        if h == 0:
            offsets.append([0.0])
        else:
            offsets.append([0.0, h, -h, 1j * h, -1j * h])
    best = math.inf
    for d0, d1, d2 in itertools.product(*offsets):
        center = (mean_center[0] + d0, mean_center[1] + d1, mean_center[2] + d2)
        worst = max(mode_distance(z, k, center) for z in samples)
        best = min(best, worst)
    return best


def _probe_samples(base: ZakharovState, modes_list, radius: float, count: int,
                   rng: np.random.Generator):
    """States on the sphere of fixed-mode radius around the base state.

    A single probe mode gets deterministic equispaced phases; several modes
    share the radius through random directions on the coefficient sphere.
    """
    out = []
    K = base.grid_size
    if len(modes_list) == 1:
        k = modes_list[0]
        for m in range(count):
            z = base.copy()
            z.u.coeffs[k + K] += radius * np.exp(2j * math.pi * m / count)
            out.append(z)
        return out
    for _ in range(count):
        z = base.copy()
        g = rng.standard_normal(len(modes_list)) + 1j * rng.standard_normal(len(modes_list))
        g *= radius / np.linalg.norm(g)
        for k, a in zip(modes_list, g):
            z.u.coeffs[k + K] += a
        out.append(z)
    return out


def nonsqueezing_probe(spec: StudySpec, radius: float = 0.25) -> StudyResult:
    """Track per-mode enclosing radii of an evolved sphere of states.

    Perturbations touch only the u component at the probe modes, so in the
    linear regime every per-mode cloud rotates rigidly and the covering
    radius is exactly preserved.  The nonlinear run is observational: it
    reports min_k r_k(T)/R without asserting a bound.
    """
    cfg = spec.config
    c = cfg.constants()
    probe_modes = [k for k in cfg.probe_modes if k != 0]
    if not probe_modes:
        raise ValueError("nonsqueezing probe needs nonzero probe modes")
    count = max(16, cfg.samples)
    rng = np.random.default_rng(cfg.seed)
    base = (ZakharovState.zeros(cfg.grid_size) if cfg.linear_only
            else state_from_config(cfg))
    starts = _probe_samples(base, probe_modes, radius, count, rng)
    scheme = cfg.scheme_spec(sample_stride=10**9)
    if cfg.jobs > 1:
        tasks = [(z, cfg.t_final, scheme, c) for z in starts]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            finals = list(pool.map(_evolve_final, tasks))
    else:
        finals = [evolve(z, cfg.t_final, scheme, c).final_state for z in starts]

    rows, series = [], []
    ratios = {}
    for k in probe_modes:
        mean0 = tuple(np.mean([z.mode_triple(k)[j] for z in starts]) for j in range(3))
        meanT = tuple(np.mean([z.mode_triple(k)[j] for z in finals]) for j in range(3))
        r0 = _enclosing_radius(starts, k, mean0)
        rT = _enclosing_radius(finals, k, meanT)
        ratios[k] = rT / radius
        rows.append({"mode": k, "r_initial": r0, "r_final": rT,
                     "ratio": rT / radius})
    min_ratio = min(ratios.values())
    for i, z in enumerate(finals):
        entry = {"sample": i}
        for k in probe_modes:
            uu, nn, dd = z.mode_triple(k)
            entry[f"mode_{k}"] = [uu.real, uu.imag, nn.real, nn.imag,
                                  dd.real, dd.imag]
        series.append(entry)
    for row in rows:
        row["min_ratio"] = min_ratio
        row["radius"] = radius
    summary = {"radius": radius, "min_ratio": min_ratio,
               "ratios": {str(k): v for k, v in ratios.items()},
               "linear_only": cfg.linear_only}
    return StudyResult("nonsqueezing_probe",
                       ["mode", "r_initial", "r_final", "ratio", "min_ratio",
                        "radius"],
                       rows, series, None, summary, [])


# ---------------------------------------------------------------------------
# gluing demo
# ---------------------------------------------------------------------------

def gwp_demo_state(cfg: SimConfig) -> ZakharovState:
    """Data with a prescribed wave-to-mass ratio for the gluing demo."""
    rng = np.random.default_rng(cfg.seed)
    z = smooth_random_state(cfg.grid_size, rng, 1.0, cfg.z0_decay, cfg.z0_band)
    m = mass(z)
    z.u.coeffs *= 1.0 / math.sqrt(m)  # mass exactly 1
    w = wave_data_norm(z)
    target = cfg.gwp_wave_mass_ratio * mass(z)
    z.n.coeffs *= target / w
    z.ndot.coeffs *= target / w
    return z


def gwp_demo(spec: StudySpec) -> StudyResult:
    """Run the interval gluing over [0, T], checking mass at every boundary.

    The interval count over the natural horizon c_step/mass must match the
    wave_norm/mass scaling within a factor of four when the wave data
    dominates the mass.
    """
    cfg = spec.config
    c = cfg.constants()
    z0 = gwp_demo_state(cfg)
    m0 = mass(z0)
    w0 = wave_data_norm(z0)
    horizon = cfg.t_final if cfg.t_final > 0 else cfg.c_step / m0
    intervals = gwp_schedule(z0, horizon, c, cfg.c_step)

    failures = []
    rows = []
    z = z0
    scheme = cfg.scheme_spec(sample_stride=10**9)
    for i, (a, b) in enumerate(intervals):
        z = evolve(z, b - a, scheme, c).final_state
        drift = abs(mass(z) - m0) / m0
        rows.append({"interval": i, "t_start": a, "t_end": b,
                     "mass": mass(z), "mass_drift": drift})
        if drift > 1e-8:
            failures.append(f"mass drift {drift:.3e} at t={b} exceeds 1e-8")
            break

    tiling_ok = (intervals[0][0] == 0.0 and intervals[-1][1] == horizon
                 and all(intervals[i][1] == intervals[i + 1][0]
                         for i in range(len(intervals) - 1)))
    if not tiling_ok:
        failures.append("schedule does not tile the horizon")

    natural = gwp_schedule(z0, cfg.c_step / m0, c, cfg.c_step)
    shape = w0 / m0
    count_ok = True
    if shape >= 4.0 * m0:
        count_ok = shape / 4.0 <= len(natural) <= 4.0 * shape
        if not count_ok:
            failures.append(
                f"interval count {len(natural)} outside factor-4 band of {shape:.1f}")
    summary = {
        "mass": m0,
        "wave_norm": w0,
        "intervals": len(intervals),
        "natural_count": len(natural),
        "expected_shape": shape,
        "max_mass_drift": max(r["mass_drift"] for r in rows),
    }
    return StudyResult("gwp_demo",
                       ["interval", "t_start", "t_end", "mass", "mass_drift"],
                       rows, rows, None, summary, failures)


# ---------------------------------------------------------------------------
# run directories
# ---------------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))  # plain shortest round-trip form
    return value


def write_results_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def write_series_jsonl(path, series):
    import json

    with open(path, "w") as fh:
        for entry in series:
            fh.write(json.dumps(entry) + "\n")


def write_study_dir(out_dir, config: SimConfig, result: StudyResult,
                    extra_outputs=None) -> str:
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    series_path = os.path.join(out_dir, "series.jsonl")
    write_results_csv(results_path, result.columns, result.rows)
    write_series_jsonl(series_path, result.series)
    outputs = ["results.csv", "series.jsonl"] + list(extra_outputs or [])
    summary = dict(result.summary)
    summary["kind"] = result.kind
    summary["hard_failures"] = result.hard_failures
    save_manifest(config, out_dir, outputs, summary)
    return out_dir


# ---------------------------------------------------------------------------
# parallel helpers (deterministic: results keyed by sweep coordinates)
# ---------------------------------------------------------------------------

def _evolve_final(args):
    z, t_final, scheme, c = args
    return evolve(z, t_final, scheme, c).final_state


def _scan_one_nmax(args):
    n_max, samples, alpha, beta, seed, kind, c_res = args
    c = PhysicalConstants(alpha, beta)
    return n_max, bilinear_ratio_scan([n_max], samples, c, seed, kind, c_res)


def parallel_bilinear_scan(cfg: SimConfig):
    """Fan the per-N_max scans over a process pool, then refit jointly."""
    from .resonance import ScanResult, _fit_aggregates

    tasks = [(n, cfg.samples, cfg.alpha, cfg.beta, cfg.seed, cfg.scan_kind,
              cfg.c_res) for n in cfg.ns]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            partials = dict(pool.map(_scan_one_nmax, tasks))
    else:
        partials = dict(_scan_one_nmax(t) for t in tasks)
    rows, aggregates = [], []
    for n in cfg.ns:
        part = partials[n]
        rows.extend(part.rows)
        aggregates.extend(part.aggregates)
    slope, intercept, rho = _fit_aggregates(aggregates)
    return ScanResult(rows, aggregates, slope, intercept, rho)
