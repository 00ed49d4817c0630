"""Experiment configuration: defaults, validation, and TOML loading."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import tomli


class ConfigError(ValueError):
    """A configuration invariant was violated; message names the invariant."""


@dataclass
class Config:
    """Flat experiment configuration.

    Defaults reproduce the mixed-corruption desk-scale setup:
    (d, m, J, L) = (15, 3, 5, 300), outlier rate 5%, scale c = 5.
    """

    d: int = 15
    m: int = 3
    L: int = 300
    K: int | None = None           # defaults to floor(L/2)
    alpha: float = 0.05
    c: float = 5.0
    sigma: float = 0.0
    method: str = "proposed"       # proposed | cadzow
    assignment_mode: str = "oracle"  # oracle | sorted
    spectrum: str = "random"       # random | monotone
    max_iters: int = 500
    tol: float = 1e-12
    gamma: float = 0.65            # detection threshold decay
    beta: float = 1.0              # detection threshold scale
    eta_rel: float = 1e-6          # outlier flag threshold
    tau_rel: float = 1e-8          # numerical-rank threshold
    seed: int = 0
    reuse_outliers: bool = True

    def __post_init__(self):
        self.validate()

    @property
    def J(self) -> int:
        return self.d // self.m

    @property
    def K_eff(self) -> int:
        return self.L // 2 if self.K is None else self.K

    def validate(self):
        if self.d % 2 == 0 or self.d < 3:
            raise ConfigError("d must be odd")
        if self.d % self.m != 0:
            raise ConfigError("m must divide d")
        if self.m % 2 == 0:
            raise ConfigError("m must be odd")
        if 2 * self.K_eff > self.L:
            raise ConfigError("2K must not exceed L")
        if self.K_eff < 2:
            raise ConfigError("K must be at least 2")
        if not 0.0 <= self.alpha < 1.0:
            raise ConfigError("alpha must be in [0, 1)")
        if self.c <= 0:
            raise ConfigError("c must be positive")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if self.method not in ("proposed", "cadzow"):
            raise ConfigError("method must be 'proposed' or 'cadzow'")
        if self.assignment_mode not in ("oracle", "sorted"):
            raise ConfigError("assignment_mode must be 'oracle' or 'sorted'")
        if self.spectrum not in ("random", "monotone"):
            raise ConfigError("spectrum must be 'random' or 'monotone'")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError("gamma must be in (0, 1)")
        if self.tol <= 0 or self.beta <= 0 or self.eta_rel <= 0:
            raise ConfigError("tol, beta, and eta_rel must be positive")
        if not 0.0 < self.tau_rel < 1.0:
            raise ConfigError("tau_rel must be in (0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit nonnegative integer")

    def replace(self, **kwargs) -> "Config":
        return dataclasses.replace(self, **kwargs)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["J"] = self.J
        out["K"] = self.K_eff
        return out


_FIELD_NAMES = {f.name for f in dataclasses.fields(Config)}


def config_from_dict(data: dict) -> Config:
    unknown = set(data) - _FIELD_NAMES - {"J"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    data = {k: v for k, v in data.items() if k in _FIELD_NAMES}
    return Config(**data)


def load_config(path: str) -> Config:
    """Load a flat TOML config file; every key is optional."""
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    return config_from_dict(data)
