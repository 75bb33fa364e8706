"""Scenario configuration: key = value files, validation, defaults."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any

SCENARIOS = ("exact", "quantum_mc", "dhv_mc", "adversarial_mc", "photonic", "noise_sweep", "power_plan")
FORMATS = ("json", "csv")
SEED_ENV = "QMH_SEED"


class ConfigError(ValueError):
    """Invalid configuration; ``where`` names the file line or field."""

    def __init__(self, message: str, where: str | None = None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "exact"
    n_trials: int = 100_000
    seed: int = 0
    stream: int = 0
    epsilon: float = 0.0
    eta: float = 1.0
    confidence: float = 0.95
    target_q: float = 1 / 6
    z: float = 5.0
    experiments: int = 200
    sweep_points: int = 11
    circuit: str | None = None
    ancilla_modes: int = 0
    output_format: str = "json"
    output_path: str | None = None

    def validate(self) -> ScenarioConfig:
        def bad(name: str, msg: str) -> ConfigError:
            return ConfigError(msg, where=f"field {name!r}")

        if self.scenario not in SCENARIOS:
            raise bad("scenario", f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.output_format not in FORMATS:
            raise bad("output_format", f"must be one of {FORMATS}")
        if self.n_trials < 1:
            raise bad("n_trials", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise bad("seed", "must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise bad("stream", "must be >= 0")
        for name in ("epsilon", "eta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise bad(name, "must lie in [0, 1]")
        if not 0.5 < self.confidence < 1.0:
            raise bad("confidence", "must lie in (0.5, 1)")
        if not 0.0 < self.target_q < 1.0:
            raise bad("target_q", "must lie in (0, 1)")
        if not self.z > 0:
            raise bad("z", "must be positive")
        if self.experiments < 1:
            raise bad("experiments", "must be >= 1")
        if self.sweep_points < 2:
            raise bad("sweep_points", "must be >= 2")
        if self.ancilla_modes < 0:
            raise bad("ancilla_modes", "must be >= 0")
        return self

    def merged(self, overrides: dict[str, Any]) -> ScenarioConfig:
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(name: str, raw: str) -> Any:
    kind = _FIELD_TYPES[name]
    if kind == "int":
        return int(raw, 0)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are ignored."""
    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        where = f"{source}:{lineno}"
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", where)
        key, raw = (part.strip() for part in stripped.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r}", where)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", where)
        try:
            values[key] = _coerce(key, raw)
        except ValueError:
            raise ConfigError(f"bad value {raw!r} for {key!r}", where) from None
    return values


def load_config_file(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc.strerror}", str(path)) from None
    return parse_config_text(text, str(path))


def build_config(file_values: dict[str, Any], flag_values: dict[str, Any], env: dict[str, str] | None = None) -> ScenarioConfig:
    """Defaults < config file < command-line flags; QMH_SEED fills a missing seed."""
    env = os.environ if env is None else env
    cfg = ScenarioConfig().merged(file_values).merged(flag_values)
    if file_values.get("seed") is None and flag_values.get("seed") is None and env.get(SEED_ENV):
        try:
            cfg = replace(cfg, seed=int(env[SEED_ENV], 0))
        except ValueError:
            raise ConfigError(f"bad integer {env[SEED_ENV]!r}", f"environment {SEED_ENV}") from None
    return cfg.validate()
