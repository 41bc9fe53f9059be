"""Command-line runner.

Every command materializes a run directory (manifest.json, results.csv,
series.jsonl, plus command-specific files) and prints a one-line summary
with its key metric.  Exit status is 0 iff no hard assertion failed;
configuration errors exit with status 2 before any computation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .config import ConfigError, SimConfig, load_config, save_manifest, _coerce
from .fields import save_state
from .flow import evolve
from .studies import (
    StudySpec,
    StudyResult,
    dt_convergence_study,
    gwp_demo,
    nonsqueezing_probe,
    parallel_bilinear_scan,
    state_from_config,
    symplectic_sweep,
    truncation_rate_study,
    write_results_csv,
    write_series_jsonl,
    write_study_dir,
)
from .resonance import modulation_sweep

COMMANDS = ("simulate", "truncate", "conserve", "symplectic", "resonance",
            "bilinear-scan", "nonsqueeze", "gwp-demo", "convergence")

_OVERRIDE_FIELDS = [f.name for f in dataclasses.fields(SimConfig)]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zaklab",
        description="Pseudospectral studies of the periodic Zakharov system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value file or manifest.json")
        p.add_argument("--out", default=None, help="run directory (default runs/<command>)")
        p.add_argument("--radius", type=float, default=0.25,
                       help="sphere radius for nonsqueeze")
        for field_name in _OVERRIDE_FIELDS:
            flag = "--" + field_name.replace("_", "-")
            p.add_argument(flag, dest=f"cfg_{field_name}", default=None,
                           metavar="V", help=f"override config key {field_name}")
    return parser


def _assemble_config(args) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    for field_name in _OVERRIDE_FIELDS:
        raw = getattr(args, f"cfg_{field_name}")
        if raw is not None:
            setattr(cfg, field_name, _coerce(field_name, str(raw)))
    return cfg.validate()


def _emit(out_dir, cfg, result: StudyResult, extra_outputs=None):
    write_study_dir(out_dir, cfg, result, extra_outputs)


def _run_simulate(cfg: SimConfig, out_dir: str, check_mass: bool) -> StudyResult:
    c = cfg.constants()
    z0 = state_from_config(cfg)
    record = evolve(z0, cfg.t_final, cfg.scheme_spec(), c, probes=cfg.probe_modes)
    masses = np.array(record.mass_series)
    mass_drift = float(np.max(np.abs(masses - masses[0])) / masses[0])
    hs = np.array([h for h in record.hamiltonian_series if h is not None])
    h_drift = float(np.max(np.abs(hs - hs[0])) / abs(hs[0])) if len(hs) else 0.0
    series = []
    for i, t in enumerate(record.times):
        series.append({"t": t, "mass": record.mass_series[i],
                       "hamiltonian": record.hamiltonian_series[i]})
    failures = []
    if check_mass and mass_drift > cfg.tol_mass:
        failures.append(f"mass drift {mass_drift:.3e} > {cfg.tol_mass}")
    result = StudyResult(
        "conserve" if check_mass else "simulate",
        ["t_final", "steps", "max_mass_drift", "max_hamiltonian_drift"],
        [{"t_final": cfg.t_final, "steps": len(record.times) - 1,
          "max_mass_drift": mass_drift, "max_hamiltonian_drift": h_drift}],
        series, None,
        {"max_mass_drift": mass_drift, "max_hamiltonian_drift": h_drift},
        failures,
    )
    os.makedirs(out_dir, exist_ok=True)
    save_state(z0, os.path.join(out_dir, "initial_state.txt"))
    save_state(record.final_state, os.path.join(out_dir, "final_state.txt"))
    return result


def _run_resonance(cfg: SimConfig, out_dir: str) -> StudyResult:
    c = cfg.constants()
    rows = []
    failures = []
    for kind in ("schrodinger", "wave"):
        summary = modulation_sweep(kind, cfg.kmax, cfg.n_tau, c, cfg.seed,
                                   cfg.tau_scale)
        rows.append(summary)
        if summary["max_residual"] > cfg.tol_residual:
            failures.append(f"{kind} residual {summary['max_residual']:.3e}")
        if summary["min_slack"] < 0:
            failures.append(f"{kind} max-of-three inequality violated")
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump({"sweeps": rows}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    agg = {
        "max_residual": max(r["max_residual"] for r in rows),
        "min_slack": min(r["min_slack"] for r in rows),
        "count": sum(r["count"] for r in rows),
    }
    return StudyResult("resonance",
                       ["kind", "kmax", "count", "max_residual", "min_slack",
                        "violations"],
                       rows, rows, None, agg, failures)


def _run_bilinear(cfg: SimConfig, out_dir: str) -> StudyResult:
    scan = parallel_bilinear_scan(cfg)
    os.makedirs(out_dir, exist_ok=True)
    write_results_csv(os.path.join(out_dir, "scan.csv"),
                      ["N0", "N1", "N2", "N_max", "ratio", "seed", "sample"],
                      scan.rows)
    rows = [{"N_max": n, "max_ratio": r, "slope": scan.slope,
             "intercept": scan.intercept, "spearman": scan.spearman}
            for n, r in scan.aggregates]
    failures = []
    if scan.slope >= 0:
        failures.append(f"bilinear ratio slope {scan.slope:.3f} is not negative")
    if scan.spearman >= 0:
        failures.append(f"bilinear Spearman {scan.spearman:.3f} is not negative")
    summary = {"slope": scan.slope, "empirical_delta": -scan.slope,
               "spearman": scan.spearman, "samples": cfg.samples,
               "kind": cfg.scan_kind}
    return StudyResult("bilinear_scan",
                       ["N_max", "max_ratio", "slope", "intercept", "spearman"],
                       rows, scan.rows, None, summary, failures)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _assemble_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    command = args.command
    out_dir = args.out or os.path.join(cfg.out_dir, command)
    extra = []
    try:
        if command == "simulate":
            result = _run_simulate(cfg, out_dir, check_mass=False)
            extra = ["initial_state.txt", "final_state.txt"]
        elif command == "conserve":
            result = _run_simulate(cfg, out_dir, check_mass=True)
            extra = ["initial_state.txt", "final_state.txt"]
        elif command == "truncate":
            result = truncation_rate_study(StudySpec("truncation_rate", cfg))
        elif command == "convergence":
            result = dt_convergence_study(StudySpec("dt_convergence", cfg))
        elif command == "symplectic":
            result = symplectic_sweep(StudySpec("symplectic_sweep", cfg))
        elif command == "resonance":
            result = _run_resonance(cfg, out_dir)
            extra = ["summary.json"]
        elif command == "bilinear-scan":
            result = _run_bilinear(cfg, out_dir)
            extra = ["scan.csv"]
        elif command == "nonsqueeze":
            result = nonsqueezing_probe(StudySpec("nonsqueezing_probe", cfg),
                                        radius=args.radius)
        elif command == "gwp-demo":
            result = gwp_demo(StudySpec("gwp_demo", cfg))
        else:  # pragma: no cover
            raise AssertionError(command)
    except Exception as exc:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "diagnostics.txt"), "w") as fh:
            fh.write(f"{type(exc).__name__}: {exc}\n")
        print(f"{command}: failed with {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    _emit(out_dir, cfg, result, extra)
    status = "ok" if result.passed else "FAIL"
    metric = _key_metric(result)
    print(f"{command}: {metric} [{status}] -> {out_dir}")
    if not result.passed:
        for failure in result.hard_failures:
            print(f"  hard failure: {failure}", file=sys.stderr)
        return 1
    return 0


def _key_metric(result: StudyResult) -> str:
    s = result.summary
    if result.kind in ("simulate", "conserve"):
        return f"mass_drift={s['max_mass_drift']:.3e} H_drift={s['max_hamiltonian_drift']:.3e}"
    if result.kind == "truncation_rate":
        return f"slope={s['slope']:.3f} (delta={s['empirical_delta']:.3f})"
    if result.kind == "dt_convergence":
        return "exact-linear" if s.get("exact_linear") else f"order={s['slope']:.3f}"
    if result.kind == "symplectic_sweep":
        return f"max_defect={s['max_defect']:.3e}"
    if result.kind == "resonance":
        return f"max_residual={s['max_residual']:.3e} min_slack={s['min_slack']:.3e}"
    if result.kind == "bilinear_scan":
        return f"slope={s['slope']:.3f} spearman={s['spearman']:.3f}"
    if result.kind == "nonsqueezing_probe":
        return f"min_ratio={s['min_ratio']:.6f}"
    if result.kind == "gwp_demo":
        return f"intervals={s['intervals']} max_mass_drift={s['max_mass_drift']:.3e}"
    return ""


if __name__ == "__main__":
    raise SystemExit(main())
