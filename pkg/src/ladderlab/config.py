"""Run configuration: defaults, JSON loading, and constraint validation."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

from .errors import ConfigError

__all__ = ["RunConfig"]

_QUARTER_PI = math.pi / 4.0

# JSON key -> dataclass field.
_KEY_MAP = {
    "U": "u_width",
    "L_grid": "l_grid",
    "n": "n_pows",
    "p": "p_orders",
    "ksq": "ksq",
    "tol_exact": "tol_exact",
    "tol_meta": "tol_meta",
    "samples": "samples",
    "seed": "seed",
    "cache": "cache_dir",
    "out": "out_dir",
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a verification campaign needs, in one immutable record.

    Defaults are sized so the full pipeline finishes on a laptop in well
    under ten minutes.
    """

    u_width: float = 0.3
    l_grid: tuple[int, ...] = (100, 300, 1000)
    n_pows: tuple[int, int, int] = (1, 1, 2)
    p_orders: tuple[int, int, int] = (0, 1, 2)
    ksq: tuple[float, float, float] = (0.5, 0.5, 0.9)
    tol_exact: float = 1e-8
    tol_meta: float = 1e-6
    samples: int = 10
    seed: int = 0
    cache_dir: str = ".ladderlab-cache"
    out_dir: str = "out"

    def __post_init__(self) -> None:
        if not (0.0 < self.u_width < _QUARTER_PI):
            raise ConfigError(
                f"segment width must satisfy U in (0, pi/4): got U = {self.u_width}")
        if not self.l_grid or any(int(v) != v or v < 3 for v in self.l_grid):
            raise ConfigError(
                f"L_grid must be integers >= 3: got {list(self.l_grid)}")
        if any(b <= a for a, b in zip(self.l_grid, self.l_grid[1:])):
            raise ConfigError(
                f"L_grid must be strictly ascending: got {list(self.l_grid)}")
        if len(self.n_pows) != 3 or any(int(v) != v or v < 1 for v in self.n_pows):
            raise ConfigError(
                f"powers must satisfy (n_1, n_2, n_3) in N^3: got {list(self.n_pows)}")
        if len(self.p_orders) != 3 or any(int(v) != v for v in self.p_orders):
            raise ConfigError(
                f"orders must satisfy (p_1, p_2, p_3) in Z^3: got {list(self.p_orders)}")
        if len(self.ksq) != 3 or any(not (0.0 < k < 1.0) for k in self.ksq):
            raise ConfigError(
                f"squared moduli must satisfy k^2 in (0, 1) componentwise: "
                f"got {list(self.ksq)}")
        for name in ("tol_exact", "tol_meta"):
            if not (0.0 < getattr(self, name) < 1.0):
                raise ConfigError(f"{name} must lie in (0, 1): got {getattr(self, name)}")
        if self.samples < 1:
            raise ConfigError(f"samples must be >= 1: got {self.samples}")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "RunConfig":
        unknown = sorted(set(data) - set(_KEY_MAP))
        if unknown:
            raise ConfigError(
                f"unknown configuration keys {unknown}; valid keys are "
                f"{sorted(_KEY_MAP)}")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            field = _KEY_MAP[key]
            if isinstance(value, list):
                value = tuple(value)
            kwargs[field] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "RunConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must contain a JSON object")
        return cls.from_mapping(data)

    def override(self, **changes: Any) -> "RunConfig":
        valid = {f.name for f in fields(self)}
        bad = sorted(set(changes) - valid)
        if bad:
            raise ConfigError(f"unknown configuration fields {bad}")
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {key: list(v) if isinstance(v := getattr(self, field), tuple) else v
                for key, field in _KEY_MAP.items()}
