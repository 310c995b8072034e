"""Multiscale interpolation on the sphere with compactly supported Wendland
kernels, zooming from global point sets into nested spherical caps."""

__version__ = "0.1.0"

from zoomrbf.geometry import (
    NORTH,
    SOUTH,
    SPHERE,
    GeometryError,
    PointSet,
    SphericalCap,
    UnitVector,
    WholeSphere,
    cap_area,
    cap_contains,
    geodesic_distance,
    mesh_norm,
    separation_radius,
)
from zoomrbf.kernels import ScaledZonalKernel, decay_check, kernel_eval, legendre_coefficient, zonal_eval
from zoomrbf.points import LevelSchedule, build_schedule, equal_area_cap, equal_area_sphere
from zoomrbf.interpolation import (
    GramMatrix,
    Interpolant,
    SolverError,
    assemble,
    condition_number,
    evaluate,
    interpolate,
    solve,
)
from zoomrbf.multiscale import MultiscaleModel, evaluate_model, evaluate_partial, fit
