"""Experiment configuration: one flat dotted-key mapping, loaded from YAML or JSON.

Nested mappings in the file are flattened, so ``fk: {n_paths: 10}`` and
``fk.n_paths: 10`` are equivalent. Unknown keys are rejected.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import yaml

from .errors import ConfigError


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "all"
    # mollifier
    mollifier_half_width: float = 1.0
    mollifier_signed_mix: float = 0.0
    mollifier_grid_step: float | None = None
    # randomness and paths
    rng_seed: int = 20240517
    paths_step: float = 0.01
    # Feynman-Kac ladder (mean growth, theorem, uniform integrability)
    fk_n_paths: int = 100_000
    fk_delta: float = 0.01
    fk_eps_list: tuple = (0.5, 0.35, 0.25)
    fk_t: float = 1.0
    fk_xi_list: tuple = (0.0, 1.0)
    fk_pilot_paths: int = 10_000
    # small-time Dyson check at eps = 1
    dyson_t_list: tuple = (0.2, 0.3)
    dyson_n_paths: int = 1_000_000
    dyson_tol: float = 1e-6
    dyson_order: int = 14
    # PDE cross-check
    pde_L: float = 16.0
    pde_n_points: int = 2048
    pde_dt: float = 1.0 / 64
    pde_eps: float = 1.0
    pde_t: float = 0.5
    pde_n_realizations: int = 2000
    pde_xi_probes: tuple = (0.0, 2 * math.pi / 16.0)
    pde_fk_paths: int = 100_000
    # constants
    constants_n_samples_A: int = 100_000
    constants_identity_widths: tuple = (0.5, 1.0, 2.0)
    # CLT
    clt_eps: float = 0.25
    clt_t: float = 8.0
    clt_n_samples: int = 10_000
    # uniform integrability
    ui_lambdas: tuple = (1.0, -1.0, 2.0, -2.0)
    # tolerances
    tol_sigma: float = 3.0
    tol_identity: float = 1e-6
    tol_z1_oracle: float = 1e-9
    tol_ui_ratio: float = 2.0
    # output
    output_dir: str = "results"

    @staticmethod
    def key_of(name: str) -> str:
        """Dotted key for a field name: ``fk_n_paths`` -> ``fk.n_paths``."""
        if name == "experiment":
            return name
        head, _, rest = name.partition("_")
        return f"{head}.{rest}"

    def to_flat(self) -> dict:
        out = {}
        for k, v in asdict(self).items():
            out[self.key_of(k)] = list(v) if isinstance(v, tuple) else v
        return out

    def hash(self) -> str:
        blob = json.dumps(self.to_flat(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **kw) -> "ExperimentConfig":
        data = asdict(self)
        data.update(kw)
        return from_flat({self.key_of(k): v for k, v in data.items()})

    @property
    def xi_list(self):
        return tuple(float(x) for x in self.fk_xi_list)


_FIELD_BY_KEY = {ExperimentConfig.key_of(f.name): f for f in fields(ExperimentConfig)}


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(f, value):
    default = f.default
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{f.name}: expected a list, got {value!r}")
        return tuple(float(v) for v in value)
    if value is None:
        return None
    if isinstance(default, bool):
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{f.name}: expected an integer, got {value!r}")
        return int(value)
    if isinstance(default, float) or default is None:
        return float(value)
    return str(value)


def from_flat(mapping: dict) -> ExperimentConfig:
    flat = _flatten(mapping)
    unknown = sorted(set(flat) - set(_FIELD_BY_KEY))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kw = {_FIELD_BY_KEY[k].name: _coerce(_FIELD_BY_KEY[k], v) for k, v in flat.items()}
    cfg = ExperimentConfig(**kw)
    validate(cfg)
    return cfg


def load_config(path: str | Path | None = None, **overrides) -> ExperimentConfig:
    data = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        data = json.loads(text) if p.suffix == ".json" else (yaml.safe_load(text) or {})
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
    data = _flatten(data)
    data.update({ExperimentConfig.key_of(k): v for k, v in overrides.items() if v is not None})
    return from_flat(data)


def validate(cfg: ExperimentConfig):
    checks = [
        (cfg.mollifier_half_width > 0, "mollifier.half_width must be positive"),
        (cfg.paths_step > 0 and cfg.fk_delta > 0, "step sizes must be positive"),
        (cfg.fk_n_paths >= 2 and cfg.dyson_n_paths >= 2, "need at least two paths"),
        (all(e > 0 for e in cfg.fk_eps_list) and len(cfg.fk_eps_list) >= 2, "fk.eps_list needs >= 2 positive values"),
        (list(cfg.fk_eps_list) == sorted(cfg.fk_eps_list, reverse=True), "fk.eps_list must be decreasing"),
        (cfg.fk_t >= 0 and cfg.clt_t > 0 and cfg.pde_t >= 0, "times must be nonnegative"),
        (cfg.constants_n_samples_A >= 100, "constants.n_samples_A must be >= 100"),
        (cfg.clt_n_samples >= 2 and cfg.pde_n_realizations >= 2, "sample counts must be >= 2"),
        (cfg.tol_sigma > 0, "tol.sigma must be positive"),
        (0 <= cfg.rng_seed < 2 ** 64, "rng.seed must be an unsigned 64-bit integer"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)
