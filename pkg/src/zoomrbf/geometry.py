"""Points, caps and point-set quality measures on the unit sphere S^2.

Points are handled in two forms: the scalar :class:`UnitVector` for single
points, and plain ``(n, 3)`` float arrays for anything vectorised.  Every
function here accepts either.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np
from scipy.spatial import cKDTree

from zoomrbf._parallel import get_workers


_UNIT_SLACK = 4 * np.finfo(float).eps


class GeometryError(ValueError):
    """Invalid geometric input (empty sets, duplicates, points outside a region)."""


@dataclass(frozen=True)
class UnitVector:
    """A point on S^2.  Components are renormalised on construction."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if not norm > 0 or not math.isfinite(norm):
            raise GeometryError(f"cannot normalise ({self.x}, {self.y}, {self.z})")
        if abs(norm - 1.0) <= _UNIT_SLACK:
            norm = 1.0  # keep already-unit input bit-exact
        object.__setattr__(self, "x", float(self.x) / norm)
        object.__setattr__(self, "y", float(self.y) / norm)
        object.__setattr__(self, "z", float(self.z) / norm)

    @classmethod
    def from_polar(cls, theta: float, phi: float) -> "UnitVector":
        """Build from colatitude ``theta`` and longitude ``phi`` (radians)."""
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __iter__(self):
        return iter((self.x, self.y, self.z))


NORTH = UnitVector(0.0, 0.0, 1.0)
SOUTH = UnitVector(0.0, 0.0, -1.0)

PointLike = Union[UnitVector, np.ndarray, Iterable[float]]


def as_xyz(points) -> np.ndarray:
    """Return points as a float array of shape ``(3,)`` or ``(n, 3)``, unnormalised."""
    if isinstance(points, UnitVector):
        return points.array
    if isinstance(points, PointSet):
        return points.points
    arr = np.asarray(points, dtype=float)
    if arr.shape[-1] != 3:
        raise GeometryError(f"expected trailing dimension 3, got shape {arr.shape}")
    return arr


def normalize(points) -> np.ndarray:
    arr = as_xyz(points)
    norms = np.linalg.norm(arr, axis=-1, keepdims=True)
    if np.any(norms == 0):
        raise GeometryError("zero vector cannot be normalised")
    norms = np.where(np.abs(norms - 1.0) <= _UNIT_SLACK, 1.0, norms)
    return arr / norms


def polar_to_xyz(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def colatitude(points) -> np.ndarray:
    return np.arccos(np.clip(as_xyz(points)[..., 2], -1.0, 1.0))


def geodesic_distance(a, b):
    """Great-circle distance between unit vectors, in radians.

    Computed as ``atan2(|a x b|, a . b)``, which keeps full relative accuracy
    for nearly coincident points where ``arccos`` loses half the digits.
    Broadcasts over leading dimensions.
    """
    a, b = np.broadcast_arrays(as_xyz(a), as_xyz(b))
    dot = np.sum(a * b, axis=-1)
    out = np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), dot)
    return float(out) if np.ndim(out) == 0 else out


def chord_to_geodesic(chord):
    """Convert Euclidean chord length to geodesic distance."""
    return 2.0 * np.arcsin(np.clip(np.asarray(chord) / 2.0, 0.0, 1.0))


def geodesic_to_chord(angle):
    return 2.0 * np.sin(np.asarray(angle) / 2.0)


class WholeSphere:
    """Region tag for the full sphere."""

    area = 4.0 * math.pi
    radius = math.pi

    def contains(self, points):
        arr = as_xyz(points)
        out = np.ones(arr.shape[:-1], dtype=bool)
        return bool(out) if out.ndim == 0 else out

    def __repr__(self):
        return "WholeSphere()"

    def __eq__(self, other):
        return isinstance(other, WholeSphere)

    def __hash__(self):
        return hash("WholeSphere")


SPHERE = WholeSphere()


@dataclass(frozen=True)
class SphericalCap:
    """Open cap ``G(center, radius)`` of points with geodesic distance < radius."""

    center: UnitVector
    radius: float

    def __post_init__(self):
        if not isinstance(self.center, UnitVector):
            object.__setattr__(self, "center", UnitVector(*as_xyz(self.center)))
        if not 0.0 < self.radius < math.pi:
            raise GeometryError(f"cap radius must lie in (0, pi), got {self.radius}")

    @property
    def area(self) -> float:
        return cap_area(self)

    def contains(self, points):
        return cap_contains(self, points)

    def within(self, other: "Region") -> bool:
        """True if this cap is contained in ``other`` (as a closed set)."""
        if isinstance(other, WholeSphere):
            return True
        gap = geodesic_distance(self.center, other.center)
        return gap + self.radius <= other.radius + 1e-12


Region = Union[WholeSphere, SphericalCap]


def cap_contains(cap: SphericalCap, p):
    """True where ``geodesic_distance(cap.center, p) < cap.radius``."""
    out = np.asarray(geodesic_distance(cap.center, p)) < cap.radius
    return bool(out) if out.ndim == 0 else out


def cap_area(cap) -> float:
    """Area 2*pi*(1 - cos r) of a cap; accepts a cap or a bare radius."""
    radius = cap.radius if hasattr(cap, "radius") else float(cap)
    # 4 pi sin^2(r/2) avoids cancellation for tiny caps
    return 4.0 * math.pi * math.sin(radius / 2.0) ** 2


def region_area(region: Region) -> float:
    return region.area


def rotation_from_north(center) -> np.ndarray:
    """Rotation matrix taking the north pole to ``center``.

    The rotation is about the axis ``north x center``; for the poles
    themselves it is the identity or a half-turn about the x-axis.
    """
    c = normalize(center)
    axis = np.array([-c[1], c[0], 0.0])
    s = float(np.linalg.norm(axis))
    cth = float(c[2])
    if s < 1e-15:
        return np.eye(3) if cth > 0 else np.diag([1.0, -1.0, -1.0])
    k = axis / s
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * K + (1.0 - cth) * (K @ K)


def fibonacci_cap(max_colat: float, count: int) -> np.ndarray:
    """``count`` near-uniform spiral points on the polar cap of colatitude ``max_colat``."""
    k = np.arange(count) + 0.5
    z = 1.0 - k / count * (1.0 - math.cos(max_colat))
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def probe_points(region: Region, resolution: float) -> np.ndarray:
    """Spiral probe points covering ``region`` with spacing about ``resolution``.

    Two points per ``resolution**2`` of area keeps the covering radius of the
    probe below ``resolution``.
    """
    if resolution <= 0:
        raise GeometryError("probe resolution must be positive")
    count = max(16, int(math.ceil(2.0 * region.area / resolution**2)))
    pts = fibonacci_cap(region.radius, count)
    if isinstance(region, SphericalCap):
        pts = pts @ rotation_from_north(region.center).T
    return pts


class PointSet:
    """An ordered set of distinct points on S^2 tagged with a region.

    Parameters
    ----------
    points : array_like, shape (n, 3)
        Cartesian coordinates; rows are renormalised.
    region : WholeSphere or SphericalCap
        The region the set is meant to cover.  Points must lie inside it.
    validate : bool
        Check distinctness and containment on construction.
    """

    def __init__(self, points, region: Region = SPHERE, validate: bool = True):
        pts = normalize(np.atleast_2d(as_xyz(points)))
        if pts.ndim != 2:
            raise GeometryError("points must have shape (n, 3)")
        self.points = pts
        self.points.setflags(write=False)
        self.region = region
        self._mesh_norm: dict[float, float] = {}
        self._separation: float | None = None
        if validate:
            if len(pts) == 0:
                raise GeometryError("empty point set")
            if isinstance(region, SphericalCap) and not np.all(region.contains(pts)):
                raise GeometryError("point set has points outside its cap")
            if len(pts) >= 2 and self.separation_radius() <= 0.0:
                raise GeometryError("point set contains duplicate points")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return (UnitVector(*p) for p in self.points)

    def __repr__(self):
        return f"PointSet(n={len(self)}, region={self.region!r})"

    def separation_radius(self) -> float:
        if self._separation is None:
            self._separation = separation_radius(self.points)
        return self._separation

    def mesh_norm(self, probe_resolution: float | None = None) -> float:
        if probe_resolution is None:
            probe_resolution = default_probe_resolution(self)
        key = float(probe_resolution)
        if key not in self._mesh_norm:
            self._mesh_norm[key] = mesh_norm(self.points, self.region, key)
        return self._mesh_norm[key]

    def rotated(self, matrix: np.ndarray) -> "PointSet":
        """Apply a rotation to the points (the region is rotated too)."""
        region = self.region
        if isinstance(region, SphericalCap):
            region = SphericalCap(UnitVector(*(matrix @ region.center.array)), region.radius)
        return PointSet(self.points @ np.asarray(matrix).T, region, validate=False)


def default_probe_resolution(points, region: Region | None = None) -> float:
    """One eighth of the typical spacing ``sqrt(area / n)``."""
    if isinstance(points, PointSet):
        region = points.region if region is None else region
    region = SPHERE if region is None else region
    n = len(as_xyz(points).reshape(-1, 3))
    return math.sqrt(region.area / max(n, 1)) / 8.0


def mesh_norm(points, region: Region = SPHERE, probe_resolution: float | None = None) -> float:
    """Estimate ``sup_{x in region} min_j theta(x, x_j)`` on a probe grid.

    The maximum over probe points is a lower bound on the true mesh norm,
    short of it by at most the probe covering radius (the min-distance
    function is 1-Lipschitz).
    """
    if isinstance(points, PointSet):
        region = points.region
    pts = np.atleast_2d(as_xyz(points))
    if pts.size == 0:
        raise GeometryError("mesh norm of an empty point set")
    if probe_resolution is None:
        probe_resolution = default_probe_resolution(pts, region)
    probes = probe_points(region, probe_resolution)
    chord, _ = cKDTree(pts).query(probes, k=1, workers=get_workers())
    return float(chord_to_geodesic(chord.max()))


def separation_radius(points) -> float:
    """Half the minimum pairwise geodesic distance (exact, via a k-d tree)."""
    pts = np.atleast_2d(as_xyz(points))
    if len(pts) < 2:
        raise GeometryError("separation radius needs at least two points")
    chord, _ = cKDTree(pts).query(pts, k=2, workers=get_workers())
    return float(chord_to_geodesic(chord[:, 1].min())) / 2.0


# -- text format -----------------------------------------------------------

def format_region(region: Region) -> str:
    if isinstance(region, WholeSphere):
        return "region: sphere"
    c = region.center
    return f"region: cap {c.x!r} {c.y!r} {c.z!r} {region.radius!r}"


def parse_region(text: str) -> Region:
    """Parse the payload of a ``region:`` header line."""
    parts = text.split()
    if parts == ["sphere"]:
        return SPHERE
    if len(parts) == 5 and parts[0] == "cap":
        cx, cy, cz, r = (float(v) for v in parts[1:])
        return SphericalCap(UnitVector(cx, cy, cz), r)
    raise GeometryError(f"unrecognised region specification: {text!r}")


def format_point_set(ps: PointSet) -> str:
    lines = [format_region(ps.region)]
    lines.extend(f"{x!r} {y!r} {z!r}" for x, y, z in ps.points.tolist())
    return "\n".join(lines) + "\n"


def parse_point_set(text: str, validate: bool = True) -> PointSet:
    region = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("region:"):
            if region is not None:
                raise GeometryError(f"line {lineno}: duplicate region header")
            region = parse_region(line[len("region:"):])
            continue
        vals = line.split()
        if len(vals) != 3:
            raise GeometryError(f"line {lineno}: expected 3 coordinates, got {len(vals)}")
        rows.append([float(v) for v in vals])
    if region is None:
        raise GeometryError("missing 'region:' header")
    return PointSet(np.array(rows, dtype=float).reshape(-1, 3), region, validate=validate)


def write_point_set(ps: PointSet, path) -> None:
    Path(path).write_text(format_point_set(ps))


def read_point_set(path, validate: bool = True) -> PointSet:
    return parse_point_set(Path(path).read_text(), validate=validate)
