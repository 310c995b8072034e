"""Run configuration: the JSON file accepted by ``fit`` and the reproduce commands.

Example::

    {
      "global_counts": [500, 2000, 8000],
      "caps": [{"center": [-0.7476, 0.5069, 0.4289], "radius": 0.2617993877991494},
               {"center": [-0.7476, 0.5069, 0.4289], "radius": 0.032724923474893676}],
      "local_counts": [[500, 2000, 8000], [500, 2000, 8000]],
      "delta1": 0.25,
      "ratio": 0.5,
      "grid_resolution_deg": 0.015625
    }
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from zoomrbf.geometry import SphericalCap, UnitVector
from zoomrbf.points import LevelSchedule, build_schedule


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CapSpec:
    center: tuple
    radius: float

    @classmethod
    def of(cls, cap: SphericalCap) -> "CapSpec":
        return cls(tuple(cap.center), cap.radius)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "radius", float(self.radius))

    def cap(self) -> SphericalCap:
        return SphericalCap(UnitVector(*self.center), self.radius)


@dataclass(frozen=True)
class RunConfig:
    global_counts: list
    caps: list
    local_counts: list
    delta1: float
    ratio: float
    grid_resolution_deg: float = 1.0 / 64.0
    error_cap_index: int = -1
    cg_tol: float = 1e-10
    kappa_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "global_counts", [int(n) for n in self.global_counts])
        object.__setattr__(self, "local_counts", [[int(n) for n in cs] for cs in self.local_counts])
        object.__setattr__(self, "caps", [c if isinstance(c, CapSpec) else CapSpec(**c) for c in self.caps])
        self.validate()

    def validate(self) -> None:
        counts = self.global_counts + [n for cs in self.local_counts for n in cs]
        if not counts:
            raise ConfigError("schedule has no levels")
        if any(n < 1 for n in counts):
            raise ConfigError("all point counts must be positive")
        if not 0.0 < self.delta1 <= 1.0:
            raise ConfigError("delta1 must lie in (0, 1]")
        if not 0.0 < self.ratio < 1.0:
            raise ConfigError("ratio must lie in (0, 1)")
        if len(self.caps) != len(self.local_counts):
            raise ConfigError("caps and local_counts must have the same length")
        if not self.caps:
            raise ConfigError("at least one cap is needed to measure errors on")
        if not self.grid_resolution_deg > 0:
            raise ConfigError("grid_resolution_deg must be positive")
        if self.cg_tol <= 0 or self.kappa_tol <= 0:
            raise ConfigError("tolerances must be positive")
        for spec in self.caps:
            if len(spec.center) != 3:
                raise ConfigError("cap centre needs three coordinates")
            if not 0.0 < spec.radius < math.pi:
                raise ConfigError("cap radius must lie in (0, pi)")
        self.schedule()  # nesting and scale checks

    @property
    def error_cap(self) -> SphericalCap:
        return self.caps[self.error_cap_index].cap()

    def schedule(self) -> LevelSchedule:
        try:
            return build_schedule(
                self.global_counts,
                [c.cap() for c in self.caps],
                self.local_counts,
                self.delta1,
                self.ratio,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["caps"] = [{"center": list(c.center), "radius": c.radius} for c in self.caps]
        return d


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    allowed = set(RunConfig.__dataclass_fields__)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown fields {sorted(unknown)}")
    try:
        return RunConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def save_config(config: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")
