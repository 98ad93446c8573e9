"""Run configuration: defaults, then a JSON config file, then ``COHJUMP_*`` variables, then flags."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ModelError
from .oracle import SampleSpec

ENV_PREFIX = "COHJUMP_"


class ConfigError(ModelError):
    pass


@dataclass(frozen=True)
class Config:
    rank_tol: float = 1e-10
    hodge_tol: float = 1e-9
    obstruction_tol: float = 1e-8
    oracle_tol: float = 1e-8
    order: int = 6
    samples: int = 8
    modulus_low: float = 1e-3
    modulus_high: float = 1e-1
    seed: int = 0

    def __post_init__(self):
        for name in ("rank_tol", "hodge_tol", "obstruction_tol", "oracle_tol"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.order < 1:
            raise ConfigError(f"order must be at least 1, got {self.order}")
        if self.samples < 1:
            raise ConfigError(f"samples must be at least 1, got {self.samples}")
        if not 0.0 < self.modulus_low <= self.modulus_high:
            raise ConfigError("need 0 < modulus_low <= modulus_high")

    @property
    def sample_spec(self) -> SampleSpec:
        return SampleSpec(self.samples, self.modulus_low, self.modulus_high, self.seed)

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


_TYPES = {f.name: f.type for f in fields(Config)}


def _coerce(name: str, value: Any, where: str) -> Any:
    kind = _TYPES[name]
    try:
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {name} must be {kind}, got {value!r}") from None


def apply(cfg: Config, overrides: Mapping[str, Any], where: str) -> Config:
    unknown = set(overrides) - set(_TYPES)
    if unknown:
        raise ConfigError(f"{where}: unknown settings {', '.join(sorted(unknown))}")
    vals = {k: _coerce(k, v, where) for k, v in overrides.items() if v is not None}
    return replace(cfg, **vals)


def from_env(environ: Mapping[str, str] | None = None) -> dict[str, str]:
    environ = os.environ if environ is None else environ
    out = {}
    for name in _TYPES:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            out[name] = environ[key]
    return out


def load_config(
    path: str | Path | None = None,
    flags: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> Config:
    cfg = Config()
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        cfg = apply(cfg, doc, str(path))
    cfg = apply(cfg, from_env(environ), "environment")
    return apply(cfg, dict(flags or {}), "command line")
