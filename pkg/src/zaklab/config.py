"""Run configuration: strict key-value parsing, defaults, manifests.

Unknown keys are fatal on purpose; silently absorbed typos are the main
source of irreproducible numerics.  Every run directory gets a manifest
echoing the full configuration, the seed, and the code version, which is
itself loadable as a config.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields

from . import __version__
from .flow import SchemeSpec
from .propagators import PhysicalConstants, PicardSettings


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    alpha: float = 1.0
    beta: float = 0.5
    grid_size: int = 64
    trunc_n: int = 16
    dt: float = 1e-3
    t_final: float = 1.0
    scheme: str = "strang_splitting"
    seed: int = 0
    probe_modes: list = field(default_factory=lambda: [1, 2])
    out_dir: str = "runs"
    jobs: int = 1
    sample_stride: int = 1
    linear_only: bool = False

    # constants the underlying papers leave unspecified
    c_step: float = 0.1
    c_res: float = 2.0
    fd_step: float = 1e-5

    # initial-data recipe
    z0_norm: float = 1.0
    z0_decay: float = 0.4
    z0_band: int = 0  # 0 means no sharp band cutoff

    # sweeps and sampling
    ns: list = field(default_factory=lambda: [4, 8, 16, 32])
    dts: list = field(default_factory=lambda: [8e-3, 4e-3, 2e-3, 1e-3])
    samples: int = 16
    pairs: int = 50
    kmax: int = 32
    n_tau: int = 10000
    tau_scale: float = 50.0
    scan_kind: str = "schrodinger"
    gwp_wave_mass_ratio: float = 16.0

    # Picard oracle
    picard_iterations: int = 8
    picard_nodes: int = 32
    picard_window: float = 1e-2

    # hard-check tolerances
    tol_mass: float = 1e-12
    tol_defect: float = 1e-5
    tol_residual: float = 1e-10

    def validate(self) -> "SimConfig":
        if self.alpha <= 0 or self.beta <= 0:
            raise ConfigError("alpha and beta must be positive")
        ratio = self.beta / self.alpha
        if abs(ratio - round(ratio)) <= 1e-9:
            raise ConfigError(f"beta/alpha = {ratio} is an integer; rejected")
        if self.grid_size < 1:
            raise ConfigError("grid_size must be >= 1")
        if not 0 <= self.trunc_n <= self.grid_size:
            raise ConfigError("trunc_n must lie in [0, grid_size]")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_final < 0:
            raise ConfigError("t_final must be nonnegative")
        if self.t_final > 0 and self.dt > self.t_final:
            raise ConfigError("dt must not exceed t_final")
        if self.scheme not in ("strang_splitting", "picard_oracle"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        for name in ("ns", "dts"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"{name} must be nonempty")
            diffs = [b - a for a, b in zip(values, values[1:])]
            if not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
                raise ConfigError(f"{name} must be strictly monotone")
        if self.samples < 1 or self.pairs < 1:
            raise ConfigError("samples and pairs must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.sample_stride < 1:
            raise ConfigError("sample_stride must be >= 1")
        if self.scan_kind not in ("schrodinger", "wave"):
            raise ConfigError(f"unknown scan_kind {self.scan_kind!r}")
        return self

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.alpha, self.beta)

    def scheme_spec(self, dt: float | None = None,
                    sample_stride: int | None = None) -> SchemeSpec:
        return SchemeSpec(
            scheme=self.scheme,
            dt=self.dt if dt is None else dt,
            linear_only=self.linear_only,
            sample_stride=self.sample_stride if sample_stride is None else sample_stride,
            picard=PicardSettings(self.picard_iterations, self.picard_nodes,
                                  min(self.picard_window, 1.0)),
        )


_FIELD_TYPES = {f.name: f for f in fields(SimConfig)}


def _coerce(name: str, raw: str):
    spec = _FIELD_TYPES[name]
    base = type(getattr(SimConfig(), name)) if spec.default is dataclasses.MISSING else None
    kind = spec.type
    raw = raw.strip()
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes", "on"):
            return True
        if raw.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"key {name!r}: cannot parse boolean from {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "list":
        items = [s for s in (p.strip() for p in raw.split(",")) if s]
        if name in ("ns", "probe_modes"):
            return [int(s) for s in items]
        return [float(s) for s in items]
    return raw


def load_config(path) -> SimConfig:
    """Read a config from key=value text or from a manifest/config JSON."""
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        payload = json.loads(text)
        if "config" in payload and isinstance(payload["config"], dict):
            payload = payload["config"]
        unknown = set(payload) - set(_FIELD_TYPES)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return SimConfig(**payload).validate()

    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(key, raw)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: key {key!r}: {exc}") from exc
    return SimConfig(**values).validate()


def save_manifest(config: SimConfig, out_dir, outputs=None, summary=None) -> str:
    import os

    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "version": __version__,
        "config": dataclasses.asdict(config),
        "outputs": sorted(outputs or []),
        "summary": summary or {},
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
