"""Suite configuration: one declarative file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

SUITES = (
    "algebra",
    "coefficients",
    "flat-operators",
    "covariance",
    "self-adjointness",
    "variation",
    "rank",
    "primitive",
    "sphere",
    "negative-controls",
)

#: default tolerances and the smallest value an override may take
TOLERANCES = {
    "flat_quadrature": (1e-10, 1e-14),
    "curved_quadrature": (1e-6, 1e-12),
    "energy": (1e-10, 1e-14),
    "linearization": (1e-7, 1e-12),
    "primitive_sigma2": (1e-8, 1e-13),
    "primitive_v3": (1e-6, 1e-12),
}


class ConfigError(ValueError):
    """Invalid configuration (exit code 2)."""


@dataclass
class SuiteConfig:
    suites: list = field(default_factory=lambda: ["all"])
    dims: list | None = None  # None: per-check defaults; [] skips dimension-indexed checks
    grid: int | None = None  # None: per-check defaults
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    samples: int = 200  # random matrices per (n, k) in the algebra suite
    family_size: int | None = None  # None: the full rank family
    assembly_family: int = 12
    out: str | None = None
    format: str = "text"

    def __post_init__(self):
        self.validate()

    def validate(self):
        bad = [s for s in self.suites if s != "all" and s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}; choose from {list(SUITES) + ['all']}")
        if self.dims is not None:
            if any(not isinstance(d, int) or d < 1 for d in self.dims):
                raise ConfigError("dimensions must be positive integers")
        if self.grid is not None and (not isinstance(self.grid, int) or self.grid < 4):
            raise ConfigError("grid must be an integer >= 4")
        for name, val in self.tolerances.items():
            if name not in TOLERANCES:
                raise ConfigError(f"unknown tolerance {name!r}")
            if not isinstance(val, (int, float)) or val < TOLERANCES[name][1]:
                raise ConfigError(f"tolerance {name} must be at least {TOLERANCES[name][1]:g}")
        if self.format not in ("json", "text"):
            raise ConfigError("format must be json or text")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")
        if self.samples < 1 or self.assembly_family < 1:
            raise ConfigError("sample counts must be positive")
        if self.family_size is not None and self.family_size < 1:
            raise ConfigError("family_size must be positive")

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, TOLERANCES[name][0]))

    def dims_for(self, default) -> list:
        return list(default) if self.dims is None else list(self.dims)

    def grid_for(self, default: int) -> int:
        return default if self.grid is None else self.grid

    def expanded_suites(self) -> list:
        out = []
        for s in self.suites:
            for t in SUITES if s == "all" else (s,):
                if t not in out:
                    out.append(t)
        return out


def load_config(path: str | Path | None = None, **overrides) -> SuiteConfig:
    """Read a YAML or JSON file, then apply non-None overrides."""
    data: dict = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        try:
            data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot parse config {p}: {exc}") from exc
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
    known = {f.name for f in fields(SuiteConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    if isinstance(data.get("suites"), str):
        data["suites"] = [data["suites"]]
    try:
        return SuiteConfig(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
