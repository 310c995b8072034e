"""Global-to-local multiscale interpolation.

Each level interpolates the current residual on its own point set with its
own kernel scale, and the model is the plain sum of the level interpolants:

    f_0 = 0,  e_0 = f
    s_j = I_{X_j, delta_j} e_{j-1},  f_j = f_{j-1} + s_j,  e_j = e_{j-1} - s_j

Local levels are just levels whose points lie in a cap; their interpolants
are still defined on the whole sphere and vanish a distance delta_j outside it.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from zoomrbf.geometry import PointSet, Region, UnitVector, as_xyz, parse_region, format_region
from zoomrbf.interpolation import (
    Interpolant,
    assemble,
    condition_number,
    evaluate,
    format_interpolant,
    node_residual,
    parse_interpolants,
    solve,
)
from zoomrbf.kernels import ScaledZonalKernel
from zoomrbf.points import LevelSchedule, ScheduleLevel

log = logging.getLogger(__name__)


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class LevelFit:
    """One fitted level plus the diagnostics recorded while fitting it."""

    interpolant: Interpolant
    region: Region
    mesh_norm: float = float("nan")
    kappa: float = float("nan")
    node_residual: float = float("nan")
    cg_iterations: int = 0
    nnz: int = 0

    @property
    def delta(self) -> float:
        return self.interpolant.delta

    @property
    def count(self) -> int:
        return len(self.interpolant)


@dataclass(frozen=True)
class MultiscaleModel:
    levels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        deltas = [lv.delta for lv in self.levels]
        if any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise FitError("level scales must strictly decrease")

    def __len__(self):
        return len(self.levels)

    def __call__(self, x):
        return evaluate_model(self, x)


def _values(target: Callable, X: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        vals = np.asarray(target(X), dtype=float)
    else:
        vals = np.array([float(target(UnitVector(*p))) for p in X])
    if vals.shape != (len(X),):
        raise FitError(f"target returned shape {vals.shape} for {len(X)} points")
    return vals


def level_contributions(model: MultiscaleModel, x, through_level: int | None = None) -> np.ndarray:
    """Array of shape ``(levels, m)`` holding ``s_j(x_i)``."""
    n = len(model) if through_level is None else through_level
    X = np.atleast_2d(as_xyz(x))
    out = np.zeros((n, len(X)))
    for j, lv in enumerate(model.levels[:n]):
        out[j] = evaluate(lv.interpolant, X)
    return out


def evaluate_partial(model: MultiscaleModel, x, through_level: int):
    """``sum_{j <= through_level} s_j(x)``; level 0 is the zero function."""
    if not 0 <= through_level <= len(model):
        raise IndexError(f"through_level {through_level} outside 0..{len(model)}")
    single = isinstance(x, UnitVector) or np.ndim(as_xyz(x)) == 1
    vals = level_contributions(model, x, through_level).sum(axis=0)
    return float(vals[0]) if single else vals


def evaluate_model(model: MultiscaleModel, x):
    return evaluate_partial(model, x, len(model))


def fit(
    target: Callable,
    schedule: LevelSchedule,
    point_sets: Sequence[PointSet] | None = None,
    *,
    tol: float = 1e-10,
    diagnostics: bool = True,
    kappa_tol: float = 1e-6,
    vectorized: bool = True,
) -> MultiscaleModel:
    """Run the multiscale residual-correction loop over ``schedule``.

    Parameters
    ----------
    target : callable
        The function to approximate.  With ``vectorized`` it takes an
        ``(m, 3)`` array and returns ``m`` values; otherwise it takes a
        single :class:`UnitVector`.
    schedule : LevelSchedule
        Regions, counts and scales per level.
    point_sets : sequence of PointSet, optional
        Node sets matching the schedule.  Generated from it when omitted.
    tol : float
        Relative residual target for the CG solves.
    diagnostics : bool
        Also estimate the mesh norm and condition number of every level.
    """
    if point_sets is None:
        point_sets = schedule.point_sets()
    if len(point_sets) != len(schedule):
        raise FitError(f"{len(point_sets)} point sets for a {len(schedule)}-level schedule")
    for j, (entry, ps) in enumerate(zip(schedule, point_sets), 1):
        if len(ps) != entry.count or ps.region != entry.region:
            raise FitError(f"level {j}: point set does not match the schedule entry")

    levels: list[LevelFit] = []
    for j, (entry, ps) in enumerate(zip(schedule, point_sets), 1):
        t0 = time.perf_counter()
        X = ps.points
        residual = _values(target, X, vectorized)
        for lv in levels:
            residual -= evaluate(lv.interpolant, X)

        kernel = ScaledZonalKernel(entry.delta)
        A = assemble(X, kernel)
        b, iters = solve(A, residual, tol=tol, return_iterations=True)
        ip = Interpolant(kernel, X, b)
        res = node_residual(ip, residual)
        h = ps.mesh_norm() if diagnostics else float("nan")
        kappa = condition_number(A, tol=kappa_tol) if diagnostics else float("nan")
        levels.append(LevelFit(ip, entry.region, h, kappa, res, iters, A.nnz))
        log.info(
            "level %d: N=%d delta=%.6g nnz=%d cg_iters=%d node_residual=%.2e h=%.4g kappa=%.3f (%.1fs)",
            j, len(X), entry.delta, A.nnz, iters, res, h, kappa, time.perf_counter() - t0,
        )
    return MultiscaleModel(tuple(levels))


# -- text format -------------------------------------------------------------

def format_model(model: MultiscaleModel) -> str:
    out = [f"multiscale {len(model)}"]
    for lv in model.levels:
        out.append(f"level {lv.count} {lv.delta!r} {format_region(lv.region)}")
    text = "\n".join(out) + "\n"
    return text + "".join(format_interpolant(lv.interpolant) for lv in model.levels)


def parse_model(text: str) -> MultiscaleModel:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if len(head) != 2 or head[0] != "multiscale":
        raise ValueError("expected 'multiscale <levels>' header")
    n = int(head[1])
    regions = []
    for ln in lines[1:1 + n]:
        parts = ln.split(maxsplit=3)
        if parts[0] != "level" or not parts[3].startswith("region:"):
            raise ValueError(f"malformed schedule line: {ln!r}")
        regions.append(parse_region(parts[3][len("region:"):]))
    pos = 1 + n
    levels = []
    for region in regions:
        ip, pos = parse_interpolants(lines, pos)
        levels.append(LevelFit(ip, region))
    return MultiscaleModel(tuple(levels))


def write_model(model: MultiscaleModel, path) -> None:
    Path(path).write_text(format_model(model))


def read_model(path) -> MultiscaleModel:
    return parse_model(Path(path).read_text())


def schedule_of(model: MultiscaleModel) -> LevelSchedule:
    return LevelSchedule(tuple(ScheduleLevel(lv.region, lv.count, lv.delta) for lv in model.levels))
