"""Flat ``key = value`` experiment configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

EXPERIMENTS = ("fig4", "scaling", "hitting", "crosscheck", "thouless")


def _default_scaling_grid() -> tuple[float, ...]:
    return tuple(float(x) for x in np.geomspace(0.01, 0.1, 8))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "fig4"
    n: tuple[int, ...] = (1000,)
    gamma: float = 1.0
    hbar: float = 1.0
    family: tuple[str, ...] = ("cauchy",)
    delta: tuple[float, ...] = (0.0, 0.03, 0.06)
    seed: int = 0
    seeds: int = 1
    times: tuple[float, ...] = ()
    grid_dt: float = 0.1
    horizon: float = 4.0  # hitting horizon T = horizon * n / gamma
    steps: int = 1_000_000
    quantile: float = 0.99
    out: str = "results"
    overwrite: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.hbar != 1.0:
            raise ValueError("hbar is fixed at 1")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if any(k < 1 for k in self.n):
            raise ValueError("n must be positive")
        if any(d < 0 for d in self.delta):
            raise ValueError("disorder widths must be >= 0")
        if any(t < 0 for t in self.times):
            raise ValueError("times must be >= 0")
        if not self.grid_dt > 0 or not self.horizon > 0:
            raise ValueError("grid_dt and horizon must be positive")
        if self.seeds < 1:
            raise ValueError("seeds (repetitions) must be >= 1")
        if not 0 < self.quantile < 1:
            raise ValueError("quantile must lie in (0, 1)")

    @classmethod
    def defaults(cls, experiment: str) -> "ExperimentConfig":
        base = cls(experiment=experiment)
        if experiment == "scaling":
            return replace(base, family=("cauchy", "gaussian", "uniform"), delta=_default_scaling_grid(), seeds=16)
        if experiment == "hitting":
            return replace(base, n=(20, 30, 40, 50, 60), delta=(0.2,), seeds=200)
        if experiment == "crosscheck":
            return replace(base, n=(1, 2, 3, 4, 5, 6, 7, 8), delta=(0.0,), times=(1.0, 3.0, 10.0))
        if experiment == "thouless":
            return replace(base, delta=(0.0, 0.03, 0.06, 0.1, 0.3))
        return base

    def fig4_times(self) -> tuple[float, ...]:
        """Configured times, or seven equally spaced ones ending at 0.9 n / (2 sqrt2 gamma)."""
        if self.times:
            return self.times
        t_max = 0.9 * self.n[0] / (2.0 * math.sqrt(2.0) * self.gamma)
        return tuple(float(t) for t in np.linspace(t_max / 7, t_max, 7))

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"malformed config line: {raw!r}")
            values[key.strip()] = val.strip()
        return (base or cls()).with_overrides(values)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def with_overrides(self, values: dict[str, str]) -> "ExperimentConfig":
        kinds = {f.name: f.type for f in fields(self)}
        parsed = {}
        for key, val in values.items():
            if key not in kinds:
                raise ValueError(f"unknown config key {key!r}")
            parsed[key] = _parse(kinds[key], val)
        if "experiment" in parsed and parsed["experiment"] != self.experiment:
            base = type(self).defaults(parsed["experiment"])
        else:
            base = self
        return replace(base, **parsed)


def _parse(kind: str, val: str):
    items = [s.strip() for s in val.split(",") if s.strip()]
    if kind == "tuple[int, ...]":
        return tuple(int(s) for s in items)
    if kind == "tuple[float, ...]":
        return tuple(float(s) for s in items)
    if kind == "tuple[str, ...]":
        return tuple(items)
    if kind == "int":
        return int(val)
    if kind == "float":
        return float(val)
    if kind == "bool":
        if val.lower() in ("1", "true", "yes", "on"):
            return True
        if val.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {val!r}")
    return val
