"""Experiment configuration: validated dataclass, TOML/JSON loading."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError

SCHEMA = "warpgeo/report/v1"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; a run is reproducible from (config, seed)."""

    beta: float = 2.0
    a0: float = 1.0
    jmax: int = 20
    n_r: int = 96
    n_theta: int = 96
    n_phi: int = 96
    R_schedule: tuple[float, ...] = (0.4, 0.2, 0.1, 0.05)
    eps_list: tuple[float, ...] = (0.5, 0.1, 0.02)
    N_schedule: tuple[int, ...] = (64, 256, 1024, 4096, 16384, 65536)
    N_partition: int = 1024
    p_grid: tuple[float, ...] = (1.1, 1.5, 2.0, 3.0)
    n_pairs: int = 512
    n_sources: int = 18
    n_base_points: int = 64
    seed: int = 20240801
    tol_uniform: float = 0.05
    tol_volume_rel: float = 1e-3
    tol_volume_abs: float = 1e-6
    quad_tol: float = 1e-9
    refine_iters: int = 30
    out: Optional[str] = None
    format: str = "json"

    def __post_init__(self):
        if self.beta < 2.0:
            raise ConfigError(f"beta must be >= 2, got {self.beta}")
        if self.a0 <= 0.0:
            raise ConfigError(f"a0 must be positive, got {self.a0}")
        if self.jmax < 0:
            raise ConfigError("jmax must be nonnegative")
        if min(self.n_r, self.n_theta, self.n_phi) < 4:
            raise ConfigError("grid needs at least 4 nodes per axis")
        for R in self.R_schedule:
            if not 0.0 < R < math.pi / 2:
                raise ConfigError(f"tube radius {R} outside (0, π/2)")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps_list entries must be positive")
        if any(p <= 1.0 for p in self.p_grid):
            raise ConfigError("p_grid entries must exceed 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown output format {self.format!r}")
        if self.n_pairs < 1 or self.n_sources < 1:
            raise ConfigError("sample sizes must be positive")

    @property
    def a_schedule(self) -> tuple[float, ...]:
        return tuple(self.a0 * 2.0 ** (-j) for j in range(self.jmax + 1))

    def grid_tuple(self) -> tuple[int, int, int]:
        return (self.n_r, self.n_theta, self.n_phi)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("R_schedule", "eps_list", "N_schedule", "p_grid"):
            d[key] = list(d[key])
        return d


_TUPLE_FIELDS = {"R_schedule", "eps_list", "N_schedule", "p_grid"}
_FIELD_NAMES = set(ExperimentConfig.__dataclass_fields__)


def _from_mapping(data: dict) -> ExperimentConfig:
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for k, v in data.items():
        kwargs[k] = tuple(v) if k in _TUPLE_FIELDS else v
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Config from a TOML or JSON file (by extension), with CLI overrides."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        if p.suffix.lower() == ".json":
            data = json.loads(p.read_text())
        elif p.suffix.lower() == ".toml":
            with p.open("rb") as fh:
                data = tomllib.load(fh)
        else:
            raise ConfigError(f"config must be .toml or .json, got {p.suffix!r}")
        if not isinstance(data, dict):
            raise ConfigError("config root must be a table/object")
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return _from_mapping(data)
