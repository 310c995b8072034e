"""The zoom-in experiment: a test function with global, regional and very
local structure, approximated over the sphere, a cap around q, and a tiny cap
around q.  Errors are measured on a 1/64-degree lat-long grid in the tiny cap.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from zoomrbf.config import CapSpec, RunConfig
from zoomrbf.geometry import (
    SphericalCap,
    UnitVector,
    as_xyz,
    colatitude,
    geodesic_distance,
    polar_to_xyz,
)
from zoomrbf.multiscale import MultiscaleModel, fit, level_contributions

log = logging.getLogger(__name__)

P_POINT = UnitVector(1.0, 1.0, 1.0)
Q_POINT = UnitVector(-0.7476, 0.5069, 0.4289)
ALPHA = math.pi / 12
RHO = math.pi / 96
OMEGA1 = SphericalCap(Q_POINT, ALPHA)
OMEGA2 = SphericalCap(Q_POINT, RHO)


def zoom_config() -> RunConfig:
    """Three global, three local and three superlocal levels of 500/2000/8000 points."""
    return RunConfig(
        global_counts=[500, 2000, 8000],
        caps=[CapSpec.of(OMEGA1), CapSpec.of(OMEGA2)],
        local_counts=[[500, 2000, 8000], [500, 2000, 8000]],
        delta1=1 / 4,
        ratio=1 / 2,
    )


def superlocal_config() -> RunConfig:
    return RunConfig(
        global_counts=[],
        caps=[CapSpec.of(OMEGA2)],
        local_counts=[[500, 2000, 8000]],
        delta1=1 / 256,
        ratio=1 / 2,
    )


def oneshot_config() -> RunConfig:
    return RunConfig(
        global_counts=[],
        caps=[CapSpec.of(OMEGA2)],
        local_counts=[[8000]],
        delta1=1 / 1024,
        ratio=1 / 2,
    )


BLEND_START = math.pi / 2
BLEND_END = 2 * math.pi / 3


def cubic_blend(theta):
    """1 up to pi/2, 0 from 2pi/3, and the C^1 Hermite cubic in between."""
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0.0) | (theta > math.pi)):
        raise ValueError("colatitude outside [0, pi]")
    u = np.clip((theta - BLEND_START) / (BLEND_END - BLEND_START), 0.0, 1.0)
    out = 1.0 - 3.0 * u**2 + 2.0 * u**3
    return float(out) if out.ndim == 0 else out


def paper_target(x):
    """f(x) = 2 + [sin t cos 100t + (1 - 3s/(2 rho))^2_+ cos 2000 theta] S(theta).

    t and s are the geodesic distances from x to p and q, theta the colatitude.
    """
    X = as_xyz(x)
    t = np.asarray(geodesic_distance(P_POINT, X))
    s = np.asarray(geodesic_distance(Q_POINT, X))
    theta = colatitude(X)
    bump = np.clip(1.0 - 3.0 * s / (2.0 * RHO), 0.0, None) ** 2
    out = 2.0 + (np.sin(t) * np.cos(100.0 * t) + bump * np.cos(2000.0 * theta)) * cubic_blend(theta)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class EvalGrid:
    """Nodes ``(i * res, j * res)`` in (colatitude, longitude) lying inside ``cap``."""

    cap: SphericalCap
    resolution_deg: float
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.points)


def build_grid(cap: SphericalCap, resolution_deg: float = 1.0 / 64.0) -> EvalGrid:
    """Lat-long lattice with zero offset, restricted to the open cap.

    A pole row collapses to the single node at longitude 0.
    """
    if resolution_deg <= 0:
        raise ValueError("grid resolution must be positive")
    res = math.radians(resolution_deg)
    n_phi = int(math.ceil(360.0 / resolution_deg - 1e-9))
    n_theta = int(math.floor(180.0 / resolution_deg + 1e-9))
    c = cap.center.array
    theta_c = math.acos(max(-1.0, min(1.0, c[2])))
    phi_c = math.atan2(c[1], c[0])
    cos_r = math.cos(cap.radius)

    i_lo = max(0, int(math.floor((theta_c - cap.radius) / res)))
    i_hi = min(n_theta, int(math.ceil((theta_c + cap.radius) / res)))
    thetas, phis = [], []
    for i in range(i_lo, i_hi + 1):
        th = i * res
        st = math.sin(th)
        if i == 0 or abs(180.0 - i * resolution_deg) < 1e-9:
            j = np.zeros(1, dtype=np.int64)
        else:
            denom = st * math.sin(theta_c)
            if denom <= 0.0:
                j = np.arange(n_phi)
            else:
                cos_dphi = (cos_r - math.cos(th) * math.cos(theta_c)) / denom
                if cos_dphi > 1.0:
                    continue
                if cos_dphi <= -1.0:
                    j = np.arange(n_phi)
                else:
                    half = math.acos(cos_dphi)
                    lo = int(math.floor((phi_c - half) / res)) - 1
                    hi = int(math.ceil((phi_c + half) / res)) + 1
                    j = np.unique(np.mod(np.arange(lo, hi + 1), n_phi))
        thetas.append(np.full(len(j), th))
        phis.append(j * res)
    if thetas:
        theta = np.concatenate(thetas)
        phi = np.concatenate(phis)
    else:
        theta = phi = np.zeros(0)
    pts = polar_to_xyz(theta, phi).reshape(-1, 3)
    inside = np.asarray(cap.contains(pts), dtype=bool).reshape(-1)
    return EvalGrid(cap, resolution_deg, theta[inside], phi[inside], pts[inside])


def l2_norm(values, grid: EvalGrid) -> float:
    """``sqrt(|cap| / |grid| * sum values^2)``."""
    values = np.asarray(values, dtype=float)
    if len(grid) == 0:
        raise ValueError("empty evaluation grid")
    return math.sqrt(grid.cap.area / len(grid) * float(np.sum(values**2)))


def l2_error(model_eval: Callable, target: Callable, grid: EvalGrid) -> float:
    """Grid approximation to the L2(cap) norm of ``target - model_eval``."""
    if len(grid) == 0:
        raise ValueError("empty evaluation grid")
    return l2_norm(np.asarray(target(grid.points)) - np.asarray(model_eval(grid.points)), grid)


@dataclass
class ErrorRow:
    level: int
    N: int
    delta: float
    h: float
    l2_error: float
    kappa: float


@dataclass
class ErrorReport:
    """Per-level table plus summary numbers for one experiment run."""

    rows: list
    target_norm: float
    target_centered_norm: float
    model: MultiscaleModel | None = field(default=None, repr=False)
    grid: EvalGrid | None = field(default=None, repr=False)
    grid_target: np.ndarray | None = field(default=None, repr=False)
    grid_approx: np.ndarray | None = field(default=None, repr=False)

    @property
    def errors(self) -> list[float]:
        return [r.l2_error for r in self.rows]

    @property
    def final_error(self) -> float:
        return self.rows[-1].l2_error

    def format_table(self) -> str:
        lines = [f"{'level':>5} {'N':>6} {'delta':>11} {'h':>9} {'l2_error':>10} {'kappa':>7}"]
        for r in self.rows:
            lines.append(
                f"{r.level:>5d} {r.N:>6d} {_fmt_delta(r.delta):>11} "
                f"{r.h:>9.4f} {r.l2_error:>10.2e} {r.kappa:>7.2f}"
            )
        lines.append(f"||f||_L2 on grid = {self.target_norm:.3e}, ||f - mean f|| = {self.target_centered_norm:.3e}")
        return "\n".join(lines)


def _fmt_delta(delta: float) -> str:
    inv = 1.0 / delta
    return f"1/{round(inv)}" if abs(inv - round(inv)) < 1e-9 else f"{delta:.4g}"


TABLE_FIELDS = ("level", "N", "delta", "h", "l2_error", "kappa")


def write_table_csv(report: ErrorReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_FIELDS)
        for r in report.rows:
            w.writerow([r.level, r.N, f"{r.delta:.10e}", f"{r.h:.10e}", f"{r.l2_error:.10e}", f"{r.kappa:.10e}"])


def write_grid_csv(report: ErrorReport, path) -> None:
    """One row per grid node: colatitude, longitude (degrees), f, f_n, f - f_n."""
    g = report.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("theta_deg", "phi_deg", "f", "f_n", "error"))
        for th, ph, f, fn in zip(np.degrees(g.theta), np.degrees(g.phi), report.grid_target, report.grid_approx):
            w.writerow((f"{th:.10e}", f"{ph:.10e}", f"{f:.10e}", f"{fn:.10e}", f"{f - fn:.10e}"))


def run_experiment(config: RunConfig, target: Callable = paper_target) -> ErrorReport:
    """Fit the configured schedule and tabulate the grid error after every level."""
    schedule = config.schedule()
    grid = build_grid(config.error_cap, config.grid_resolution_deg)
    log.info("evaluation grid: %d nodes, %g degree spacing", len(grid), config.grid_resolution_deg)
    f_grid = np.asarray(target(grid.points), dtype=float)

    model = fit(target, schedule, tol=config.cg_tol, kappa_tol=config.kappa_tol)
    contrib = level_contributions(model, grid.points)
    approx = np.cumsum(contrib, axis=0)
    rows = []
    for j, (lv, fj) in enumerate(zip(model.levels, approx), 1):
        err = l2_norm(f_grid - fj, grid)
        rows.append(ErrorRow(j, lv.count, lv.delta, lv.mesh_norm, err, lv.kappa))
        log.info("level %d: N=%d nnz=%d cg_iters=%d l2_error=%.3e", j, lv.count, lv.nnz, lv.cg_iterations, err)
    return ErrorReport(
        rows,
        target_norm=l2_norm(f_grid, grid),
        target_centered_norm=l2_norm(f_grid - f_grid.mean(), grid),
        model=model,
        grid=grid,
        grid_target=f_grid,
        grid_approx=approx[-1] if len(approx) else np.zeros(len(grid)),
    )


def run_table1(config: RunConfig | None = None) -> ErrorReport:
    """Nine levels: three global, three on the cap of radius pi/12, three on pi/96."""
    return run_experiment(config or zoom_config())


def run_table2(config: RunConfig | None = None) -> ErrorReport:
    """The last three (superlocal) levels on their own."""
    return run_experiment(config or superlocal_config())


def oneshot_report(config: RunConfig | None = None) -> ErrorReport:
    return run_experiment(config or oneshot_config())


def run_oneshot(config: RunConfig | None = None) -> float:
    """Error of a single interpolation on the finest superlocal level."""
    return oneshot_report(config).final_error
