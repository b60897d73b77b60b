import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steinerknot.geometry import (
    ArcChain,
    Circle3,
    DegenerateGeometryError,
    Point3,
    SphereArc,
    SphericalCoord,
    angle_at,
    cartesian_to_spherical,
    closest_point_on_circle,
    fermat_point,
    hausdorff_distance,
    random_rigid_motion,
    spherical_to_cartesian,
    sph,
)

SQ3 = math.sqrt(3.0)

A1 = Point3(-0.5, 0.0, SQ3 / 2)
B1 = Point3(-1.0, 0.0, 0.0)
C1 = Point3(-0.5, 0.0, -SQ3 / 2)
C2 = Point3(0.5, 0.0, SQ3 / 2)
B4 = Point3(0.0, 1.0, 0.0)


def test_spherical_to_cartesian_axis_case():
    p = spherical_to_cartesian(SphericalCoord(1.0, 0.0, math.pi / 2))
    assert p.close_to(Point3(1.0, 0.0, 0.0), 1e-15)


def test_spherical_to_cartesian_tilted():
    # Direct evaluation of the coordinate formulas at (1, pi, pi/2 - 0.05).
    delta = 0.05
    p = spherical_to_cartesian(SphericalCoord(1.0, math.pi, math.pi / 2 - delta))
    assert abs(p.x - (-math.cos(delta))) < 1e-12
    assert abs(p.x - (-0.99875)) < 1e-5
    assert abs(p.y) < 1e-12
    assert abs(p.z - 0.04998) < 1e-5


def test_spherical_to_cartesian_zero_radius():
    for theta, phi in [(0.3, 1.1), (2.0, 0.2)]:
        p = spherical_to_cartesian(SphericalCoord(0.0, theta, phi))
        assert p.close_to(Point3(0, 0, 0), 1e-15)


@given(
    st.floats(0.1, 5.0),
    st.floats(0.0, 2 * math.pi - 1e-6),
    st.floats(1e-3, math.pi - 1e-3),
)
def test_spherical_round_trip(r, theta, phi):
    c = SphericalCoord(r, theta, phi)
    back = cartesian_to_spherical(spherical_to_cartesian(c))
    assert abs(back.r - r) < 1e-12
    assert abs(back.phi - phi) < 1e-12
    dtheta = (back.theta - theta) % (2 * math.pi)
    assert min(dtheta, 2 * math.pi - dtheta) < 1e-11


def test_angle_at_hexagon_vertices():
    # Arms (1/2, 0, +-sqrt(3)/2) meet at 2*pi/3.
    assert abs(angle_at(A1, B1, C1) - 2 * math.pi / 3) < 1e-12


def test_angle_at_degenerate_and_collinear():
    p, q = Point3(0, 0, 0), Point3(1, 0, 0)
    assert angle_at(p, q, p) < 1e-12
    assert abs(angle_at(Point3(-1, 0, 0), Point3(0, 0, 0), Point3(2, 0, 0)) - math.pi) < 1e-12
    with pytest.raises(DegenerateGeometryError):
        angle_at(p, p, q)


def test_hausdorff_basics():
    a = [Point3(0, 0, 0)]
    b = [Point3(1, 0, 0)]
    assert hausdorff_distance(a, a) == 0.0
    assert abs(hausdorff_distance(a, b) - 1.0) < 1e-15
    with pytest.raises(ValueError):
        hausdorff_distance([], a)


def test_hausdorff_coaxial_circles():
    # Q vs a circle of radius sqrt(1-h^2) at height h: every point of one
    # is at distance hypot(1 - r_h, h) from the other (closed form).
    h = 0.03
    r = math.sqrt(1 - h * h)
    q = Circle3(Point3(0, 0, 0), 1.0, Point3(0, 0, 1))
    qd = Circle3(Point3(0, 0, h), r, Point3(0, 0, 1))
    got = hausdorff_distance(q.sample(4000), qd.sample(4000))
    exact = math.hypot(1 - r, h)
    assert got < 0.05
    assert abs(got - exact) < 1e-5


@settings(max_examples=25)
@given(st.integers(0, 2**32 - 1))
def test_hausdorff_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.uniform(-1, 1, size=(5, 3)) for _ in range(3))
    dab = hausdorff_distance(a, b)
    dbc = hausdorff_distance(b, c)
    dac = hausdorff_distance(a, c)
    assert dac <= dab + dbc + 1e-12


def test_closest_point_on_circle_simple():
    c = Circle3(Point3(0, 0, 0), 1.0, Point3(0, 0, 1))
    q = closest_point_on_circle(Point3(2, 0, 0), c)
    assert q.close_to(Point3(1, 0, 0), 1e-12)


def test_closest_point_on_circle_axis_errors():
    c = Circle3(Point3(0, 0, 0), 1.0, Point3(0, 0, 1))
    with pytest.raises(DegenerateGeometryError):
        closest_point_on_circle(Point3(0, 0, 5), c)


def test_closest_point_on_circle_radial_projection():
    c = Circle3(Point3(0, 0, 0), 1.0, Point3(0, 0, 1))
    q = closest_point_on_circle(Point3(1, 1, 1), c)
    expected = Point3(1 / math.sqrt(2), 1 / math.sqrt(2), 0.0)
    assert q.close_to(expected, 1e-12)
    # Cross-check against dense sampling of the circle.
    samples = c.sample(1_000_000)
    dists = np.linalg.norm(samples - np.array([1.0, 1.0, 1.0]), axis=1)
    assert Point3(1, 1, 1).distance_to(q) <= dists.min() + 1e-9


def test_closest_point_beats_sampling_generic():
    rng = np.random.default_rng(7)
    c = Circle3(Point3(0.1, -0.2, 0.3), 0.8, Point3.of(np.array([1.0, 2.0, 2.0]) / 3.0))
    for _ in range(5):
        p = Point3.of(rng.uniform(-2, 2, size=3))
        q = c.closest_point(p)
        samples = c.sample(10_000)
        dists = np.linalg.norm(samples - p.array, axis=1)
        assert p.distance_to(q) <= dists.min() + 1e-7


def test_restricted_circle_clamps():
    c = Circle3(Point3(0, 0, 0), 1.0, Point3(0, 0, 1), t_range=(0.0, math.pi / 2))
    q = c.closest_point(Point3(0, -1, 0))  # true closest angle -pi/2, outside range
    assert q.close_to(c.point_at(0.0), 1e-12)


def test_sphere_arc_lengths_and_membership():
    lat = SphereArc.latitude(math.pi / 2 - 0.05, math.pi, 5 * math.pi / 4)
    assert abs(lat.length - (math.pi / 4) * math.cos(0.05)) < 1e-12
    g = SphereArc.great(sph(0.0, math.pi / 2), sph(math.pi / 2, math.pi / 2))
    assert abs(g.length - math.pi / 2) < 1e-12
    for arc in (lat, g):
        for s in np.linspace(0, 1, 17):
            assert abs(arc.point(s).norm() - 1.0) < 1e-12


def test_sphere_arc_closest_point_clamps_to_endpoint():
    g = SphereArc.great(sph(0.0, math.pi / 2), sph(math.pi / 2, math.pi / 2))
    p = sph(-0.3, math.pi / 2)
    assert g.closest_point(p).close_to(g.point(0.0), 1e-12)


def test_arc_chain_parametrization():
    a = SphereArc.latitude(math.pi / 2, 0.0, math.pi / 2)
    b = SphereArc.great(sph(math.pi / 2, math.pi / 2), sph(math.pi / 2, 0.1))
    chain = ArcChain((a, b))
    assert abs(chain.length - (a.length + b.length)) < 1e-12
    assert chain.point(0.0).close_to(a.point(0.0), 1e-12)
    assert chain.point(1.0).close_to(b.point(1.0), 1e-12)
    # Closest point of the chain agrees with per-arc brute force.
    p = Point3(0.3, 0.9, 0.2)
    brute = min(
        (np.linalg.norm(arc.sample(20000) - p.array, axis=1).min() for arc in (a, b))
    )
    assert abs(p.distance_to(chain.closest_point(p)) - brute) < 1e-6


def _grid_search_fermat(a, b, c):
    # Independent oracle: dense grid in the triangle plane, refined twice.
    pa, pb, pc = a.array, b.array, c.array
    n = np.cross(pb - pa, pc - pa)
    n = n / np.linalg.norm(n)
    u = np.cross([0, 0, 1.0] if abs(n[2]) < 0.9 else [1.0, 0, 0], n)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    center = (pa + pb + pc) / 3
    span = max(np.linalg.norm(p - center) for p in (pa, pb, pc))
    best = None
    lo = -span
    hi = span
    cx = cy = 0.0
    for _ in range(4):
        xs = np.linspace(cx + lo, cx + hi, 60)
        ys = np.linspace(cy + lo, cy + hi, 60)
        X, Y = np.meshgrid(xs, ys)
        pts = center + X[..., None] * u + Y[..., None] * v
        tot = sum(np.linalg.norm(pts - p, axis=-1) for p in (pa, pb, pc))
        idx = np.unravel_index(np.argmin(tot), tot.shape)
        best = tot[idx]
        cx, cy = xs[idx[1]], ys[idx[0]]
        lo, hi = lo / 12, hi / 12
    return best


def test_fermat_equilateral():
    a, b, c = Point3(0, 0, 0), Point3(1, 0, 0), Point3(0.5, SQ3 / 2, 0)
    s, length = fermat_point(a, b, c)
    assert abs(length - SQ3) < 1e-12
    centroid = Point3(0.5, SQ3 / 6, 0)
    assert s.close_to(centroid, 1e-9)
    assert abs(_grid_search_fermat(a, b, c) - length) < 1e-3


def test_fermat_obtuse_gives_two_edges():
    a, b, c = Point3(0, 0, 0), Point3(1, 0, 0), Point3(-1, 0, 0)
    s, length = fermat_point(a, b, c)
    assert s is None
    assert abs(length - 2.0) < 1e-15


def test_fermat_hexagon_side_constant():
    # The triod spanning two upper hexagon vertices and (0, 1, 0).
    s, length = fermat_point(A1, C2, B4)
    assert s is not None
    assert abs(length - (math.sqrt(7) + math.sqrt(3)) / 2) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fermat_against_two_edge_paths(seed):
    rng = np.random.default_rng(seed)
    pts = [Point3.of(p) for p in rng.uniform(-1, 1, size=(3, 3))]
    try:
        s, length = fermat_point(*pts)
    except DegenerateGeometryError:
        return
    two_edge = min(
        pts[i].distance_to(pts[(i + 1) % 3]) + pts[i].distance_to(pts[(i + 2) % 3])
        for i in range(3)
    )
    assert length <= two_edge + 1e-9
    angles = [
        angle_at(pts[(i + 1) % 3], pts[i], pts[(i + 2) % 3]) for i in range(3)
    ]
    if s is None:
        assert max(angles) >= 2 * math.pi / 3 - 1e-9
        assert abs(length - two_edge) < 1e-12
    else:
        assert max(angles) < 2 * math.pi / 3 + 1e-9
        # Steiner point sees all three pairs at 2*pi/3.
        for i in range(3):
            ang = angle_at(pts[i], s, pts[(i + 1) % 3])
            assert abs(ang - 2 * math.pi / 3) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fermat_rigid_motion_invariance(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(3, 3))
    try:
        _, length = fermat_point(*(Point3.of(p) for p in pts))
    except DegenerateGeometryError:
        return
    R, t = random_rigid_motion(rng)
    moved = pts @ R.T + t
    _, length2 = fermat_point(*(Point3.of(p) for p in moved))
    assert abs(length - length2) < 1e-9
