"""Equal-area point sets and multilevel schedules.

The partition is the zonal one: a polar cap at each pole of the region (one
for a cap, two for the sphere), and collars in between.  Each collar is cut
into equal-area cells in azimuth.  A cell's centre is taken at its mid
colatitude and mid azimuth; collars are staggered by half a cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from zoomrbf.geometry import (
    SPHERE,
    GeometryError,
    PointSet,
    Region,
    SphericalCap,
    WholeSphere,
    polar_to_xyz,
    rotation_from_north,
)


class ScheduleError(ValueError):
    pass


def _colat_of_area(area):
    """Colatitude of the polar cap with the given area."""
    return 2.0 * np.arcsin(np.sqrt(np.clip(np.asarray(area) / (4.0 * math.pi), 0.0, 1.0)))


def _collar_counts(n_cells: int, cell_area: float, top: float, bottom: float) -> np.ndarray:
    """Number of cells per collar for the band ``[top, bottom]`` of colatitude."""
    ideal_angle = math.sqrt(cell_area)
    n_collars = max(1, int(round((bottom - top) / ideal_angle)))
    edges = top + (bottom - top) * np.arange(n_collars + 1) / n_collars
    band = 2.0 * math.pi * (np.cos(edges[:-1]) - np.cos(edges[1:]))
    # rounding the running total keeps the grand total exact
    cum = np.rint(np.cumsum(band / cell_area)).astype(int)
    cum[-1] = n_cells
    counts = np.diff(np.concatenate([[0], cum]))
    return counts[counts > 0]


class Partition(NamedTuple):
    """Cell centres plus the layout they came from.

    ``edges`` are the lower colatitude bounds of the north polar cap, each
    collar, and (for the sphere) the south polar cap, in that order.
    """

    theta: np.ndarray
    phi: np.ndarray
    collar_counts: np.ndarray
    edges: np.ndarray


def zonal_partition(count: int, max_colat: float, south_cap: bool):
    """Centres of an equal-area partition of the polar cap ``theta < max_colat``.

    With ``south_cap`` (only sensible for ``max_colat == pi``) the last cell
    is a polar cap at the south pole.
    """
    if count < 1:
        raise GeometryError("point count must be at least 1")
    if count == 1:
        return Partition(np.zeros(1), np.zeros(1), np.zeros(0, dtype=int), np.array([max_colat]))
    total = 4.0 * math.pi * math.sin(max_colat / 2.0) ** 2
    cell = total / count
    polar = float(_colat_of_area(cell))
    if south_cap and count == 2:
        return Partition(np.array([0.0, math.pi]), np.zeros(2), np.zeros(0, dtype=int),
                         np.array([math.pi / 2, math.pi]))

    n_inner = count - (2 if south_cap else 1)
    bottom = max_colat - polar if south_cap else max_colat
    counts = _collar_counts(n_inner, cell, polar, bottom)
    # collar edges placed so each collar holds exactly its cells' area
    cum_area = cell * (1 + np.concatenate([[0], np.cumsum(counts)]))
    edges = _colat_of_area(cum_area)
    if not south_cap:
        edges = np.minimum(edges, max_colat)  # rounding can overshoot the rim

    thetas = [np.zeros(1)]
    phis = [np.zeros(1)]
    for i, m in enumerate(counts):
        offset = 0.5 * (i % 2) * 2.0 * math.pi / m
        thetas.append(np.full(m, 0.5 * (edges[i] + edges[i + 1])))
        phis.append(offset + 2.0 * math.pi * (np.arange(m) + 0.5) / m)
    if south_cap:
        thetas.append(np.array([math.pi]))
        phis.append(np.zeros(1))
        edges = np.append(edges, math.pi)
    return Partition(np.concatenate(thetas), np.concatenate(phis), counts, edges)


def equal_area_sphere(count: int) -> PointSet:
    """``count`` centres of equal-area cells on the whole sphere."""
    part = zonal_partition(count, math.pi, south_cap=True)
    return PointSet(polar_to_xyz(part.theta, part.phi), SPHERE)


def equal_area_cap(cap: SphericalCap, count: int) -> PointSet:
    """``count`` centres of equal-area cells partitioning ``cap``.

    The partition is built about the north pole over colatitudes
    ``[0, cap.radius]`` and rotated onto ``cap.center``.
    """
    part = zonal_partition(count, cap.radius, south_cap=False)
    pts = polar_to_xyz(part.theta, part.phi) @ rotation_from_north(cap.center).T
    return PointSet(pts, cap)


def equal_area_points(region: Region, count: int) -> PointSet:
    if isinstance(region, WholeSphere):
        return equal_area_sphere(count)
    return equal_area_cap(region, count)


@dataclass(frozen=True)
class ScheduleLevel:
    region: Region
    count: int
    delta: float


@dataclass(frozen=True)
class LevelSchedule:
    """Ordered (region, count, scale) entries, validated on construction."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        validate_schedule(self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def deltas(self):
        return [e.delta for e in self.entries]

    @property
    def counts(self):
        return [e.count for e in self.entries]

    def point_sets(self) -> list[PointSet]:
        return [equal_area_points(e.region, e.count) for e in self.entries]


def validate_schedule(entries: Sequence[ScheduleLevel]) -> None:
    if not entries:
        raise ScheduleError("empty schedule")
    prev_delta = math.inf
    prev_region = None
    seen_cap = False
    for j, e in enumerate(entries, 1):
        if e.count < 1:
            raise ScheduleError(f"level {j}: count must be positive")
        if not 0.0 < e.delta <= 1.0:
            raise ScheduleError(f"level {j}: scale {e.delta} outside (0, 1]")
        if not e.delta < prev_delta:
            raise ScheduleError(f"level {j}: scales must strictly decrease")
        if isinstance(e.region, WholeSphere):
            if seen_cap:
                raise ScheduleError(f"level {j}: global level after a local one")
        else:
            seen_cap = True
            if prev_region is not None and e.region != prev_region and not e.region.within(prev_region):
                raise ScheduleError(f"level {j}: cap is not nested in the previous region")
        prev_delta = e.delta
        prev_region = e.region


def build_schedule(
    global_counts: Sequence[int],
    caps: Sequence[SphericalCap],
    local_counts: Sequence[Sequence[int]],
    delta1: float,
    ratio: float,
) -> LevelSchedule:
    """Assemble a zoom schedule with scales ``delta1 * ratio**(j-1)``.

    Global levels come first, then the levels of each cap in turn; each cap
    must sit inside the one before it.
    """
    if not 0.0 < delta1 <= 1.0:
        raise ScheduleError("delta1 must lie in (0, 1]")
    if not 0.0 < ratio < 1.0:
        raise ScheduleError("ratio must lie in (0, 1)")
    if len(caps) != len(local_counts):
        raise ScheduleError("need one list of local counts per cap")
    regions: list[Region] = [SPHERE] * len(global_counts)
    counts = list(global_counts)
    for cap, cs in zip(caps, local_counts):
        regions.extend([cap] * len(cs))
        counts.extend(cs)
    entries = [
        ScheduleLevel(region, int(n), delta1 * ratio**j)
        for j, (region, n) in enumerate(zip(regions, counts))
    ]
    return LevelSchedule(tuple(entries))
