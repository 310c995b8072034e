import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_rotation, random_unit
from zoomrbf.geometry import (
    NORTH,
    SOUTH,
    SPHERE,
    GeometryError,
    PointSet,
    SphericalCap,
    UnitVector,
    cap_area,
    cap_contains,
    geodesic_distance,
    mesh_norm,
    parse_point_set,
    format_point_set,
    read_point_set,
    rotation_from_north,
    separation_radius,
    write_point_set,
)

Q = UnitVector(-0.7476, 0.5069, 0.4289)
EQUATOR = UnitVector(1.0, 0.0, 0.0)

unit_vectors = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: 0.1 < math.sqrt(sum(c * c for c in v))
).map(lambda v: UnitVector(*v))


def test_unit_vector_is_normalised():
    u = UnitVector(3.0, 4.0, 12.0)
    assert math.isclose(u.x**2 + u.y**2 + u.z**2, 1.0, abs_tol=1e-12)
    assert abs(Q.x**2 + Q.y**2 + Q.z**2 - 1.0) < 1e-12


def test_zero_vector_rejected():
    with pytest.raises(GeometryError):
        UnitVector(0.0, 0.0, 0.0)


@pytest.mark.parametrize(
    "a, b, expected",
    [(NORTH, NORTH, 0.0), (NORTH, SOUTH, math.pi), (NORTH, EQUATOR, math.pi / 2)],
)
def test_geodesic_distance_examples(a, b, expected):
    assert geodesic_distance(a, b) == pytest.approx(expected, abs=1e-15)


def test_geodesic_distance_clamps_rounding():
    a = np.array([1.0, 1e-17, 0.0])
    assert geodesic_distance(a, a * (1 + 1e-16)) == 0.0


@settings(max_examples=200, deadline=None)
@given(unit_vectors, unit_vectors, unit_vectors)
def test_triangle_inequality(a, b, c):
    assert geodesic_distance(a, c) <= geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-12
    assert geodesic_distance(a, b) == geodesic_distance(b, a)


def test_cap_contains_examples():
    cap = SphericalCap(NORTH, math.pi / 4)
    assert cap_contains(cap, NORTH)
    assert not cap_contains(cap, SOUTH)
    assert cap_contains(SphericalCap(Q, math.pi / 96), Q)


def test_cap_boundary_is_open():
    cap = SphericalCap(NORTH, math.pi / 2)
    assert not cap_contains(cap, EQUATOR)


@pytest.mark.parametrize("radius", [0.0, math.pi, -1.0, 4.0])
def test_cap_radius_validated(radius):
    with pytest.raises(GeometryError):
        SphericalCap(NORTH, radius)


def test_cap_contains_rotation_invariant(rng):
    for _ in range(50):
        R = random_rotation(rng)
        c = random_unit(rng, 1)[0]
        pts = random_unit(rng, 200)
        r = rng.uniform(0.05, 3.0)
        before = SphericalCap(UnitVector(*c), r).contains(pts)
        after = SphericalCap(UnitVector(*(R @ c)), r).contains(pts @ R.T)
        # only points well away from the rim can be compared exactly
        margin = np.abs(geodesic_distance(c, pts) - r) > 1e-10
        assert np.array_equal(before[margin], after[margin])


def test_cap_area_examples():
    assert cap_area(math.pi) == pytest.approx(4 * math.pi, rel=1e-15)
    assert cap_area(math.pi / 2) == pytest.approx(2 * math.pi, rel=1e-15)
    # 2 pi (1 - cos(pi/96)) from a 30-digit evaluation
    assert cap_area(SphericalCap(Q, math.pi / 96)) == pytest.approx(0.0033640961017793260077, rel=1e-13)


@given(st.floats(1e-6, math.pi - 1e-6), st.floats(1e-6, math.pi - 1e-6))
def test_cap_area_monotone(r1, r2):
    if r1 < r2:
        assert cap_area(r1) <= cap_area(r2)


def test_rotation_from_north(rng):
    for c in list(random_unit(rng, 20)) + [NORTH.array, SOUTH.array]:
        R = rotation_from_north(c)
        assert np.allclose(R @ NORTH.array, c, atol=1e-14)
        assert np.allclose(R @ R.T, np.eye(3), atol=1e-14)
        assert np.linalg.det(R) == pytest.approx(1.0)


def test_mesh_norm_two_poles():
    h = mesh_norm(np.array([[0, 0, 1.0], [0, 0, -1.0]]), SPHERE, probe_resolution=0.01)
    assert h == pytest.approx(math.pi / 2, abs=0.01)
    assert h <= math.pi / 2 + 1e-12


def test_mesh_norm_single_point():
    h = mesh_norm(np.array([[0, 0, 1.0]]), SPHERE, probe_resolution=0.01)
    assert h == pytest.approx(math.pi, abs=0.01)


def test_mesh_norm_of_cap():
    cap = SphericalCap(NORTH, 0.3)
    # centre only: farthest cap point is on the rim
    assert mesh_norm(np.array([[0, 0, 1.0]]), cap, probe_resolution=1e-3) == pytest.approx(0.3, abs=1e-3)


def test_mesh_norm_empty():
    with pytest.raises(GeometryError):
        mesh_norm(np.zeros((0, 3)), SPHERE, 0.1)


@pytest.mark.parametrize(
    "pts, expected",
    [
        ([[0, 0, 1], [0, 0, -1]], math.pi / 2),
        ([[0, 0, 1], [1, 0, 0]], math.pi / 4),
        ([[1, 0, 0], [0, 1, 0], [0, 0, 1]], math.pi / 4),
    ],
)
def test_separation_radius_examples(pts, expected):
    assert separation_radius(np.array(pts, dtype=float)) == pytest.approx(expected, abs=1e-15)


def test_separation_radius_matches_brute_force(rng):
    pts = random_unit(rng, 300)
    d = geodesic_distance(pts[:, None, :], pts[None, :, :])
    d[np.diag_indices(len(pts))] = np.inf
    assert separation_radius(pts) == pytest.approx(d.min() / 2, rel=1e-12)


def test_separation_needs_two_points():
    with pytest.raises(GeometryError):
        separation_radius(np.array([[0, 0, 1.0]]))


def test_separation_below_mesh_norm(rng):
    for n in (2, 10, 100):
        ps = PointSet(random_unit(rng, n))
        assert ps.separation_radius() <= ps.mesh_norm()


def test_point_set_rejects_duplicates_and_outsiders():
    with pytest.raises(GeometryError):
        PointSet([[0, 0, 1.0], [0, 0, 2.0]])
    with pytest.raises(GeometryError):
        PointSet([[0, 0, -1.0]], SphericalCap(NORTH, 1.0))
    with pytest.raises(GeometryError):
        PointSet(np.zeros((0, 3)))


def test_point_set_caches_metrics(rng):
    ps = PointSet(random_unit(rng, 50))
    assert ps.mesh_norm(0.05) is ps.mesh_norm(0.05)
    assert ps.separation_radius() == separation_radius(ps.points)


def test_point_set_text_round_trip(tmp_path, rng):
    cap = SphericalCap(Q, 0.5)
    pts = random_unit(rng, 2000)
    ps = PointSet(pts[cap.contains(pts)], cap)
    path = tmp_path / "pts.txt"
    write_point_set(ps, path)
    back = read_point_set(path)
    assert back.region == cap
    assert np.array_equal(back.points, ps.points)

    sphere = parse_point_set("# comment\nregion: sphere\n0 0 1\n# more\n1 0 0\n")
    assert sphere.region == SPHERE and len(sphere) == 2
    assert format_point_set(sphere).startswith("region: sphere\n")


@pytest.mark.parametrize(
    "text",
    ["0 0 1\n", "region: sphere\n0 0\n", "region: cone 1 2\n0 0 1\n", "region: sphere\nregion: sphere\n0 0 1\n"],
)
def test_point_set_text_errors(text):
    with pytest.raises(GeometryError):
        parse_point_set(text)
