"""Experiment configs for the command-line front end.

Each subcommand has a dataclass of defaults.  Values are layered
defaults < JSON config file < command-line flags, then validated as a whole
before anything runs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    def __init__(self, name: str, message: str):
        super().__init__(f"config field {name!r}: {message}")
        self.field = name


def _default_zetas() -> tuple:
    zs = [round(0.005 * i, 6) for i in range(50)]
    return tuple(zs + [0.2499])


def _require(cond: bool, name: str, message: str):
    if not cond:
        raise ConfigError(name, message)


def _positive_int_list(values, name: str, minimum: int = 1):
    _require(len(values) > 0, name, "must be a non-empty list")
    _require(all(isinstance(v, int) and v >= minimum for v in values), name,
             f"entries must be integers >= {minimum}")
    _require(list(values) == sorted(values), name, "must be ascending")


@dataclass(frozen=True)
class ExponentSweepConfig:
    snr_db: tuple = (10.0, 0.0, -3.0, -5.0)
    zetas: tuple = field(default_factory=_default_zetas)
    grid: int = 256
    output: str = "exponent_sweep.csv"

    def validate(self):
        _require(len(self.snr_db) > 0, "snr_db", "must be a non-empty list")
        _require(all(math.isfinite(s) for s in self.snr_db), "snr_db", "entries must be finite")
        _require(len(self.zetas) > 0, "zetas", "must be a non-empty list")
        _require(all(0.0 <= z <= 0.25 for z in self.zetas), "zetas", "entries must lie in [0, 0.25]")
        _require(isinstance(self.grid, int) and self.grid >= 8 and self.grid % 2 == 0,
                 "grid", "must be an even integer >= 8")


@dataclass(frozen=True)
class ValidateConfig:
    sides: tuple = (16, 32, 64)
    trials: int = 200
    snr_db: float = 0.0
    zeta: float = 0.1
    grid: int = 1024
    pm_sides: tuple = (4, 6, 8)
    pm_trials: int = 4000
    alpha: float = 0.1
    seed: int = 12345
    output: str = "validate.json"

    def validate(self):
        _positive_int_list(self.sides, "sides", 2)
        _positive_int_list(self.pm_sides, "pm_sides", 2)
        _require(isinstance(self.trials, int) and self.trials >= 10, "trials", "must be an integer >= 10")
        _require(isinstance(self.pm_trials, int) and self.pm_trials >= 100, "pm_trials",
                 "must be an integer >= 100")
        _require(0.0 <= self.zeta < 0.25, "zeta", "must lie in [0, 0.25)")
        _require(0.0 < self.alpha < 1.0, "alpha", "must lie in (0, 1)")
        _require(math.isfinite(self.snr_db), "snr_db", "must be finite")
        _require(isinstance(self.grid, int) and self.grid >= 8 and self.grid % 2 == 0,
                 "grid", "must be an even integer >= 8")
        _require(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a nonnegative integer")


@dataclass(frozen=True)
class EfficiencyConfig:
    regime: str = "area"
    n_list: tuple = (8, 16, 32, 64, 128, 256, 512)
    spacing: float = 1.0
    extent: float = 20.0
    delta: float = 2.0
    snr_db: float = 0.0
    corr_map: str = "exponential"
    zeta: float = 0.1
    r0: float = 1.0
    beta: float = 1.0
    table: str = ""
    window: int = 0
    tolerance: float = 0.05
    grid: int = 256
    output: str = "efficiency.csv"
    verdict_output: str = "efficiency.json"

    def validate(self):
        _require(self.regime in ("area", "density"), "regime", "must be 'area' or 'density'")
        _positive_int_list(self.n_list, "n_list", 1)
        _require(self.spacing > 0, "spacing", "must be positive")
        _require(self.extent > 0, "extent", "must be positive")
        _require(self.delta >= 2, "delta", "must be >= 2")
        _require(math.isfinite(self.snr_db), "snr_db", "must be finite")
        _require(self.corr_map in ("constant", "exponential", "expgap", "table"), "corr_map",
                 "must be one of constant, exponential, expgap, table")
        _require(0.0 <= self.zeta <= 0.25, "zeta", "must lie in [0, 0.25]")
        _require(self.r0 > 0, "r0", "must be positive")
        _require(self.beta > 0, "beta", "must be positive")
        _require(self.corr_map != "table" or bool(self.table), "table",
                 "a CSV path with r,zeta columns is required for corr_map=table")
        _require(isinstance(self.window, int) and (self.window == 0 or 2 <= self.window <= len(self.n_list)),
                 "window", "must be 0 (last half) or an integer in [2, len(n_list)]")
        _require(self.tolerance > 0, "tolerance", "must be positive")
        _require(isinstance(self.grid, int) and self.grid >= 8 and self.grid % 2 == 0,
                 "grid", "must be an even integer >= 8")


@dataclass(frozen=True)
class SampleConfig:
    side: int = 64
    kind: str = "H1"
    snr_db: float = 0.0
    zeta: float = 0.1
    sigma2: float = 1.0
    seed: int = 0
    output: str = "field.csv"

    def validate(self):
        _require(isinstance(self.side, int) and self.side >= 2, "side", "must be an integer >= 2")
        _require(self.kind in ("signal", "noise", "H0", "H1"), "kind", "must be signal, noise, H0 or H1")
        _require(0.0 <= self.zeta < 0.25, "zeta", "must lie in [0, 0.25)")
        _require(self.sigma2 > 0, "sigma2", "must be positive")
        _require(math.isfinite(self.snr_db), "snr_db", "must be finite")
        _require(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a nonnegative integer")
        _require(Path(self.output).suffix in (".csv", ".bin"), "output", "must end in .csv or .bin")


@dataclass(frozen=True)
class DetectConfig:
    side: int = 8
    alpha: float = 0.1
    trials: int = 10000
    snr_db: float = 0.0
    zeta: float = 0.1
    sigma2: float = 1.0
    seed: int = 0
    output: str = "detect.json"

    def validate(self):
        _require(isinstance(self.side, int) and self.side >= 2, "side", "must be an integer >= 2")
        _require(0.0 < self.alpha < 1.0, "alpha", "must lie in (0, 1)")
        _require(isinstance(self.trials, int) and self.trials >= 100, "trials", "must be an integer >= 100")
        _require(0.0 <= self.zeta < 0.25, "zeta", "must lie in [0, 0.25)")
        _require(self.sigma2 > 0, "sigma2", "must be positive")
        _require(math.isfinite(self.snr_db), "snr_db", "must be finite")
        _require(isinstance(self.seed, int) and self.seed >= 0, "seed", "must be a nonnegative integer")
        _require(Path(self.output).suffix in (".json", ".csv"), "output", "must end in .json or .csv")


def _coerce(name: str, value: Any, default: Any):
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(name, f"expected a list, got {value!r}")
        kind = type(default[0]) if default else float
        try:
            return tuple(kind(v) if kind is float else v for v in value)
        except (TypeError, ValueError):
            raise ConfigError(name, f"list entries must be numbers, got {value!r}") from None
    if isinstance(default, bool) or isinstance(default, str):
        if not isinstance(value, type(default)):
            raise ConfigError(name, f"expected {type(default).__name__}, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(name, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(name, f"expected a number, got {value!r}")
        return float(value)
    return value


def build(cls, file_values: dict | None = None, overrides: dict | None = None):
    """Layer file values and flag overrides over ``cls`` defaults and validate."""
    base = cls()
    names = {f.name for f in fields(cls)}
    merged = {}
    for source in (file_values or {}, {k: v for k, v in (overrides or {}).items() if v is not None}):
        for key, value in source.items():
            if key not in names:
                raise ConfigError(key, f"unknown field for {cls.__name__}")
            merged[key] = _coerce(key, value, getattr(base, key))
    cfg = replace(base, **merged)
    cfg.validate()
    return cfg


def load_file(path: str | None, section: str) -> dict:
    """Read one subcommand's section from a JSON config file.

    A file may hold a top-level object keyed by subcommand name, or a flat
    object of fields for a single subcommand.
    """
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", f"{path} must contain a JSON object")
    if section in data and isinstance(data[section], dict):
        return data[section]
    return data
