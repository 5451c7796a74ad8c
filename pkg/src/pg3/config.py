"""Tolerances and run configuration.

Module-level constants are the library defaults. :class:`RunConfig` bundles
them with the stochastic and output settings used by the command line.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields

TOL_ALGEBRAIC = 1e-10
TOL_INCIDENCE = 1e-9
TOL_CONVERGENCE = 1e-3
CONVERGENCE_WINDOW = 5
TOL_MEET_ANGLE = 1e-8
TOL_INVARIANT = 1e-9
TOL_CLASSIFY = 1e-7
DEFAULT_SEED = 20240917
DEFAULT_NMAX = 10**6
DEFAULT_EPS = 1e-3

CONFIG_ENV = "PG3_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    tol_alg: float = TOL_ALGEBRAIC
    tol_inc: float = TOL_INCIDENCE
    tol_conv: float = TOL_CONVERGENCE
    seed: int = DEFAULT_SEED
    nmax: int = DEFAULT_NMAX
    eps: float = DEFAULT_EPS
    format: str = "json"
    parallel: bool = False
    output: str | None = None
    trace: str | None = None

    def __post_init__(self):
        for name in ("tol_alg", "tol_inc", "tol_conv", "eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.nmax < 1:
            raise ValueError("nmax must be positive")
        if self.format not in ("json", "csv"):
            raise ValueError("format must be 'json' or 'csv'")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        """Defaults, then the JSON file named by ``$PG3_CONFIG``, then overrides."""
        data = {}
        path = os.environ.get(CONFIG_ENV)
        if path:
            with open(path) as fh:
                data.update(json.load(fh))
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(data)
