"""Run configuration, JSON loading with ``--key value`` overrides, and seeding."""

from __future__ import annotations

import dataclasses
import json
import os
import zlib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .basis import KINDS
from .windows import COEFF_MODES


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    basis: str = "bernstein"
    n_windows: int = 5
    order: int = 4
    lambda_f: float = 0.3
    alpha: Optional[float] = 0.25
    gamma: float = 2.0
    lr: float = 0.01
    weight_decay: float = 5e-4
    epochs: int = 500
    patience: int = 50
    n_layers: int = 2
    hidden: int = 64
    seed: int = 0
    variant: str = "windowed"
    coeff_mode: str = "overlap"
    precision: str = "float64"
    # fixed homophily fed to the window MLPs; None measures it on train labels
    homophily: Optional[float] = None
    jacobi_a: float = 1.0
    jacobi_b: float = 1.0
    sigma_min: float = 0.05
    sigma_max: float = 1.0
    mlp_hidden: int = 16
    record_wall_clock: bool = False
    edges: Optional[str] = None
    features: Optional[str] = None
    labels: Optional[str] = None
    out: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.basis not in KINDS:
            raise ConfigError(f"basis must be one of {KINDS}, got {self.basis!r}")
        if self.variant not in ("windowed", "plain"):
            raise ConfigError("variant must be 'windowed' or 'plain'")
        if self.coeff_mode not in COEFF_MODES:
            raise ConfigError(f"coeff_mode must be one of {COEFF_MODES}")
        if self.precision not in ("float64", "float32"):
            raise ConfigError("precision must be 'float64' or 'float32'")
        if self.n_windows < 1:
            raise ConfigError("n_windows must be >= 1")
        if self.order < 0:
            raise ConfigError("order must be >= 0")
        if not 0.0 <= self.lambda_f < 1.0:
            raise ConfigError("lambda_f must lie in [0, 1)")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1] or be null")
        if self.gamma < 0:
            raise ConfigError("gamma must be >= 0")
        if self.n_layers < 0 or self.hidden < 1 or self.epochs < 0 or self.patience < 1:
            raise ConfigError("n_layers >= 0, hidden >= 1, epochs >= 0, patience >= 1 required")
        if self.homophily is not None and not 0.0 <= self.homophily <= 1.0:
            raise ConfigError("homophily override must lie in [0, 1]")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ConfigError("require 0 < sigma_min < sigma_max")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _coerce(name: str, raw: str) -> Any:
    field = {f.name: f for f in fields(RunConfig)}.get(name)
    if field is None:
        raise ConfigError(f"unknown config key {name!r}")
    if raw.lower() in ("null", "none"):
        return None
    default = field.default
    kind = type(default) if default is not None else None
    if name in ("alpha", "homophily"):
        kind = float
    try:
        if kind is bool:
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for {name}") from exc
    return raw


def parse_overrides(tokens: list[str]) -> dict:
    """Turn ``["--order", "3", "--basis=jacobi"]`` into typed config values."""
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"missing value for {tok}")
            raw = tokens[i + 1]
            i += 2
        out[key] = _coerce(key, raw)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be a flat object")
    data.update(overrides or {})
    return RunConfig.from_dict(data)


def derive_seed(master: int, *keys) -> int:
    """Independent 63-bit seed for a named component of a run.

    Keys are hashed into the SeedSequence spawn key, so adding a new
    component or sweep point never shifts another component's stream.
    """
    spawn_key = tuple(zlib.crc32(str(k).encode()) for k in keys)
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=spawn_key)
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_rng(master: int, *keys) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(derive_seed(master, *keys)))


def thread_count() -> int:
    raw = os.environ.get("HWGNN_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
