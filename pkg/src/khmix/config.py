"""JSON run and sweep configuration with strict validation.

A run configuration::

    {
      "params":  {"U": 1.0, "L": 4.0, "T": 2.0, "dt": 0.005, ...},
      "initial": {"delta": 0.25, "epsilon": 0.5, "k": 2},
      "sample_interval": 0.02,
      "snapshot_every": 0,
      "output_dir": "run-L4",
      "seed": 0,
      "verdict": {"l": 0.05, "E": 0.01, "D": 0.02, "m": 1e-6, "fraction": 0.5}
    }

Every key is optional.  A sweep wraps a run configuration::

    {"sweep": {"L": [2, 4, 8], "workers": 3, "Ny_per_L": 32}, "base": {...}}

Unknown keys are rejected, and every error names the offending field path
(``initial.epsilon``) or the line and column of a JSON syntax error.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .bounds import Tolerances
from .fields import Params
from .initial_data import InitialDataSpec

OUTPUT_ROOT_ENV = "KHMIX_OUTPUT_ROOT"


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted field path when known."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


_INT_FIELDS = {"Ny", "Nz", "k", "snapshot_every", "seed", "workers", "Ny_per_L"}


def _check_type(name: str, value: Any, path: str) -> Any:
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if name in _INT_FIELDS:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", path)
        return value
    if name == "dt" and isinstance(value, str):
        return value
    if name == "output_dir":
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", path)
        return value
    if name == "sample_interval" and value is None:
        return value
    if not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    return float(value)


def _build(cls, data: Any, prefix: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"expected an object, got {type(data).__name__}", prefix)
    known = {f.name for f in fields(cls) if f.init}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key (expected one of {sorted(known)})", f"{prefix}.{key}")
    kwargs = {k: _check_type(k, v, f"{prefix}.{k}") for k, v in data.items()}
    try:
        return cls(**kwargs)
    except ValueError as exc:
        msg = str(exc)
        bad = next((k for k in kwargs if msg.startswith(k) or f" {k} " in f" {msg} "), None)
        raise ConfigError(msg, f"{prefix}.{bad}" if bad else prefix) from None


@dataclass(frozen=True)
class RunConfig:
    params: Params = field(default_factory=Params)
    initial: InitialDataSpec = field(default_factory=InitialDataSpec)
    sample_interval: float | None = None
    snapshot_every: int = 0
    output_dir: str | None = None
    seed: int = 0
    verdict: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.sample_interval is not None and not 0 < self.sample_interval <= self.params.T:
            raise ConfigError("must lie in (0, T]", "sample_interval")
        if self.snapshot_every < 0:
            raise ConfigError("must be >= 0", "snapshot_every")

    @property
    def interval(self) -> float:
        return self.sample_interval if self.sample_interval is not None else self.params.T / 100

    def output_path(self, root: str | os.PathLike | None = None) -> Path:
        """``output_dir`` resolved against ``root`` (default: ``$KHMIX_OUTPUT_ROOT`` or the cwd)."""
        base = Path(root if root is not None else os.environ.get(OUTPUT_ROOT_ENV, "."))
        return base / (self.output_dir or f"run-L{self.params.L:g}")

    def to_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "initial": asdict(self.initial),
            "sample_interval": self.sample_interval,
            "snapshot_every": self.snapshot_every,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "verdict": asdict(self.verdict),
        }

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Apply flat ``{key: value}`` overrides addressed by field name (CLI flags)."""
        data = self.to_dict()
        for key, value in overrides.items():
            for section, cls in (("params", Params), ("initial", InitialDataSpec)):
                if key in {f.name for f in fields(cls)}:
                    data[section][key] = value
                    break
            else:
                if key not in data or key in ("params", "initial", "verdict"):
                    raise ConfigError("unknown override", key)
                data[key] = value
        return parse_run(data)


@dataclass(frozen=True)
class SweepConfig:
    base: RunConfig
    L: tuple[float, ...]
    workers: int = 1
    Ny_per_L: int | None = None

    def __post_init__(self):
        if not self.L:
            raise ConfigError("needs at least one value", "sweep.L")
        if any(not x > 0 for x in self.L):
            raise ConfigError("values must be positive", "sweep.L")
        if len(set(self.L)) != len(self.L):
            raise ConfigError("values must be distinct", "sweep.L")
        if self.workers < 1:
            raise ConfigError("must be >= 1", "sweep.workers")
        if self.Ny_per_L is not None and self.Ny_per_L < 1:
            raise ConfigError("must be >= 1", "sweep.Ny_per_L")

    def runs(self) -> list[RunConfig]:
        """One run per ``L``; ``Ny`` is set to the even integer nearest ``Ny_per_L * L`` when given."""
        out = []
        base_dir = self.base.output_dir or "sweep"
        for L in self.L:
            changes: dict = {"L": float(L)}
            if self.Ny_per_L is not None:
                changes["Ny"] = max(8, 2 * int(round(0.5 * self.Ny_per_L * L)))
            try:
                params = self.base.params.with_(**changes)
            except ValueError as exc:
                raise ConfigError(str(exc), f"sweep.L[{L:g}]") from None
            out.append(replace(self.base, params=params, output_dir=f"{base_dir}/L{L:g}"))
        return out


def parse_run(data: Any, prefix: str = "") -> RunConfig:
    def p(name):
        return f"{prefix}{name}"

    if not isinstance(data, dict):
        raise ConfigError("expected a JSON object", prefix.rstrip(".") or None)
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key (expected one of {sorted(known)})", p(key))
    params = _build(Params, data.get("params"), p("params"))
    initial = _build(InitialDataSpec, data.get("initial"), p("initial"))
    verdict = _build(Tolerances, data.get("verdict"), p("verdict"))
    scalars = {k: _check_type(k, data[k], p(k))
               for k in ("sample_interval", "snapshot_every", "output_dir", "seed") if k in data}
    try:
        return RunConfig(params=params, initial=initial, verdict=verdict, **scalars)
    except ConfigError as exc:
        raise ConfigError(str(exc).split(": ", 1)[-1], p(exc.path or "")) from None


def parse_config(data: Any) -> RunConfig | SweepConfig:
    if isinstance(data, dict) and "sweep" in data:
        extra = set(data) - {"sweep", "base"}
        if extra:
            raise ConfigError("unknown key next to 'sweep' (expected 'base')", sorted(extra)[0])
        sweep = data["sweep"]
        if not isinstance(sweep, dict):
            raise ConfigError("expected an object", "sweep")
        for key in sweep:
            if key not in ("L", "workers", "Ny_per_L"):
                raise ConfigError("unknown key (expected L, workers, Ny_per_L)", f"sweep.{key}")
        Ls = sweep.get("L")
        if not isinstance(Ls, list):
            raise ConfigError("expected a list of widths", "sweep.L")
        Ls = tuple(_check_type("L", v, f"sweep.L[{i}]") for i, v in enumerate(Ls))
        extras = {k: _check_type(k, sweep[k], f"sweep.{k}") for k in ("workers", "Ny_per_L") if k in sweep}
        return SweepConfig(base=parse_run(data.get("base", {}), "base."), L=Ls, **extras)
    return parse_run(data)


def load_config(path) -> RunConfig | SweepConfig:
    """Parse and validate a JSON configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return parse_config(data)
    except ConfigError as exc:
        err = ConfigError(f"{path}: {exc}")
        err.path = exc.path
        raise err from None


def dump_config(cfg: RunConfig | SweepConfig, path) -> None:
    if isinstance(cfg, SweepConfig):
        data = {"sweep": {"L": list(cfg.L), "workers": cfg.workers}, "base": cfg.base.to_dict()}
        if cfg.Ny_per_L is not None:
            data["sweep"]["Ny_per_L"] = cfg.Ny_per_L
    else:
        data = cfg.to_dict()
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
