"""Central numeric defaults, overridable from a TOML file or CLI flags."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ArgumentError


@dataclass
class Config:
    n_vertices: int = 32
    dim: int = 14
    resolution: int = 512
    origin_policy: str = "bbox_center"
    # dual assignment
    lam: float = 2.0
    k: int = 3
    eps: float = 1e-6
    alpha: float = 0.25
    gamma: float = 2.0
    nms_threshold: float = 0.5
    # baselines
    cheb_terms: int = 44
    fourier_harmonics: int = 5
    seed: int = 0

    def update(self, **overrides) -> "Config":
        """Return a copy with the non-None overrides applied."""
        known = {f.name for f in dataclasses.fields(self)}
        clean = {}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise ArgumentError(f"unknown config key {key!r}")
            clean[key] = value
        return dataclasses.replace(self, **clean)


def load_config(path: str | Path | None = None) -> Config:
    cfg = Config()
    if path is None:
        return cfg
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    flat = {}
    for key, value in data.items():
        # sections are only for readability; keys are global
        if isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return cfg.update(**flat)
