"""Geometric primitives on and around the unit ball.

Points, spherical coordinates, circles and sphere arcs, distances and
angles.  Everything is an immutable value; tolerances are explicit
parameters so that no comparison ever relies on exact float equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Default tolerances: ASSERT_TOL for geometric assertions/equality,
# RESIDUAL_TOL for convergence residuals.  All quantities in this package
# are O(1), so absolute tolerances are appropriate.
ASSERT_TOL = 1e-9
RESIDUAL_TOL = 1e-12


class DegenerateGeometryError(ValueError):
    """Raised when an operation has no unique answer (coincident points,
    a point on a circle's axis, arms of an angle too short, ...)."""


@dataclass(frozen=True)
class Point3:
    """A point in R^3 (unit-ball scale, dimensionless)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("coordinates must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def of(v) -> "Point3":
        v = np.asarray(v, dtype=float)
        return Point3(float(v[0]), float(v[1]), float(v[2]))

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Point3") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2 + (self.y - other.y) ** 2 + (self.z - other.z) ** 2
        )

    def close_to(self, other: "Point3", tol: float = ASSERT_TOL) -> bool:
        return self.distance_to(other) <= tol


@dataclass(frozen=True)
class SphericalCoord:
    """Spherical coordinates (r, theta, phi): theta is the azimuth and phi
    the polar angle, so x = r sin(phi) cos(theta), y = r sin(phi) sin(theta),
    z = r cos(phi)."""

    r: float
    theta: float
    phi: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be >= 0")


def spherical_to_cartesian(c: SphericalCoord) -> Point3:
    """Convert (r, theta, phi) to Cartesian coordinates."""
    s = math.sin(c.phi)
    return Point3(
        c.r * s * math.cos(c.theta),
        c.r * s * math.sin(c.theta),
        c.r * math.cos(c.phi),
    )


def cartesian_to_spherical(p: Point3) -> SphericalCoord:
    """Inverse of :func:`spherical_to_cartesian`, with theta in [0, 2*pi)
    and phi in [0, pi]."""
    r = p.norm()
    if r == 0.0:
        return SphericalCoord(0.0, 0.0, 0.0)
    phi = math.acos(max(-1.0, min(1.0, p.z / r)))
    theta = math.atan2(p.y, p.x) % (2.0 * math.pi)
    return SphericalCoord(r, theta, phi)


def sph(theta: float, phi: float, r: float = 1.0) -> Point3:
    """Shorthand: Cartesian point of the spherical coordinates (r, theta, phi)."""
    return spherical_to_cartesian(SphericalCoord(r, theta, phi))


@dataclass(frozen=True)
class Segment:
    """Straight segment [a, b]."""

    a: Point3
    b: Point3

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)


def angle_at(p: Point3, q: Point3, r: Point3, tol: float = RESIDUAL_TOL) -> float:
    """Angle at the vertex q of the wedge p-q-r, in [0, pi].

    Raises :class:`DegenerateGeometryError` if either arm is shorter
    than ``tol``.
    """
    u = p.array - q.array
    v = r.array - q.array
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu < tol or nv < tol:
        raise DegenerateGeometryError("angle arms shorter than tolerance")
    # atan2 form is stable near 0 and pi.
    cross = np.linalg.norm(np.cross(u, v))
    dot = float(np.dot(u, v))
    return math.atan2(cross, dot)


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite point samples.

    Accepts sequences of :class:`Point3` or (n, 3) arrays.  Continuum
    terminals are sampled by the caller at whatever resolution the claim
    under test requires.
    """
    pa = as_array(a)
    pb = as_array(b)
    if pa.size == 0 or pb.size == 0:
        raise ValueError("hausdorff_distance of an empty sample set")
    d = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def as_array(points) -> np.ndarray:
    """Coerce Point3 sequences / arrays to an (n, 3) float array."""
    if isinstance(points, np.ndarray):
        return points.reshape(-1, 3).astype(float)
    rows = []
    for p in points:
        rows.append(p.array if isinstance(p, Point3) else np.asarray(p, dtype=float))
    if not rows:
        return np.zeros((0, 3))
    return np.stack(rows)


# ---------------------------------------------------------------------------
# Continuum terminals: circles, sphere arcs, chains.  Each exposes the same
# small parametric surface: point(t) for t in [0, 1], arc length, dense
# sampling, and exact closest-point projection.
# ---------------------------------------------------------------------------


def _unit(v: np.ndarray, tol: float = RESIDUAL_TOL) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < tol:
        raise DegenerateGeometryError("cannot normalize near-zero vector")
    return v / n


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (u, v) spanning the plane orthogonal to ``normal``."""
    n = _unit(np.asarray(normal, dtype=float))
    helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = _unit(np.cross(helper, n))
    v = np.cross(n, u)
    return u, v


@dataclass(frozen=True)
class Circle3:
    """A circle in R^3: center, radius > 0, unit normal.

    ``t_range`` restricts the usable parameter interval (radians in the
    circle's own (u, v) frame); a full circle is (0, 2*pi).
    """

    center: Point3
    radius: float
    normal: Point3
    t_range: tuple[float, float] = (0.0, 2.0 * math.pi)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if abs(self.normal.norm() - 1.0) > 1e-12:
            raise ValueError("normal must be a unit vector")

    @property
    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        cached = getattr(self, "_frame", None)
        if cached is None:
            cached = _plane_basis(self.normal.array)
            object.__setattr__(self, "_frame", cached)
        return cached

    @property
    def is_full(self) -> bool:
        lo, hi = self.t_range
        return hi - lo >= 2.0 * math.pi - 1e-12

    def point_at(self, t: float) -> Point3:
        u, v = self.frame
        c = self.center.array
        return Point3.of(c + self.radius * (math.cos(t) * u + math.sin(t) * v))

    def point(self, s: float) -> Point3:
        lo, hi = self.t_range
        return self.point_at(lo + s * (hi - lo))

    def tangent_at(self, t: float) -> np.ndarray:
        u, v = self.frame
        return -math.sin(t) * u + math.cos(t) * v

    @property
    def length(self) -> float:
        lo, hi = self.t_range
        return self.radius * (hi - lo)

    def sample(self, k: int) -> np.ndarray:
        lo, hi = self.t_range
        ts = np.linspace(lo, hi, k, endpoint=not self.is_full)
        u, v = self.frame
        c = self.center.array
        return c + self.radius * (np.cos(ts)[:, None] * u + np.sin(ts)[:, None] * v)

    def param_of(self, p: Point3) -> float:
        """Angle parameter of the projection of ``p`` onto the circle plane."""
        u, v = self.frame
        w = p.array - self.center.array
        return math.atan2(float(np.dot(w, v)), float(np.dot(w, u)))

    def closest_param(self, p: Point3, tol: float = RESIDUAL_TOL) -> float:
        u, v = self.frame
        w = p.array - self.center.array
        wu = float(np.dot(w, u))
        wv = float(np.dot(w, v))
        if math.hypot(wu, wv) < tol:
            raise DegenerateGeometryError(
                "point on the circle axis: closest point not unique"
            )
        t = math.atan2(wv, wu)
        if self.is_full:
            return t
        lo, hi = self.t_range
        # Wrap into [lo, lo + 2*pi), then clamp to the nearer endpoint.
        t = lo + (t - lo) % (2.0 * math.pi)
        if t <= hi:
            return t
        return lo if (t - hi) > (lo + 2.0 * math.pi - t) else hi

    def closest_point(self, p: Point3, tol: float = RESIDUAL_TOL) -> Point3:
        return self.point_at(self.closest_param(p, tol))

    @property
    def param_bounds(self) -> tuple[float, float, bool]:
        lo, hi = self.t_range
        return lo, hi, self.is_full

    def eval_derivs(self, t: np.ndarray):
        """Batched position, velocity, acceleration at angle parameters t."""
        t = np.asarray(t, dtype=float)
        u, v = self.frame
        c = self.center.array
        ct = np.cos(t)[:, None]
        st = np.sin(t)[:, None]
        q = c + self.radius * (ct * u + st * v)
        dq = self.radius * (-st * u + ct * v)
        return q, dq, c - q  # d2q = -(q - c)


def closest_point_on_circle(p: Point3, circle: Circle3) -> Point3:
    """The point of ``circle`` nearest to ``p``.

    The segment from ``p`` to the result extends to a line meeting the
    circle's axis.  Raises :class:`DegenerateGeometryError` when ``p`` lies
    on the axis (every circle point is equally near).
    """
    return circle.closest_point(p)


@dataclass(frozen=True)
class SphereArc:
    """An arc on the unit sphere.

    kind == "latitude": constant polar angle phi, azimuth running from
    theta0 to theta1 (monotonically; theta values need not be reduced).
    kind == "great": the shortest great-circle arc between two points.
    """

    kind: str
    start: Point3
    end: Point3
    phi: float = 0.0
    theta0: float = 0.0
    theta1: float = 0.0

    @staticmethod
    def latitude(phi: float, theta0: float, theta1: float) -> "SphereArc":
        return SphereArc(
            "latitude",
            sph(theta0, phi),
            sph(theta1, phi),
            phi=phi,
            theta0=theta0,
            theta1=theta1,
        )

    @staticmethod
    def great(start: Point3, end: Point3) -> "SphereArc":
        for p in (start, end):
            if abs(p.norm() - 1.0) > 1e-9:
                raise ValueError("great arc endpoints must lie on the unit sphere")
        if start.array @ end.array < -1.0 + 1e-12:
            raise DegenerateGeometryError("antipodal endpoints: shortest arc not unique")
        return SphereArc("great", start, end)

    @property
    def length(self) -> float:
        if self.kind == "latitude":
            return abs(self.theta1 - self.theta0) * math.sin(self.phi)
        dot = max(-1.0, min(1.0, float(self.start.array @ self.end.array)))
        return math.acos(dot)

    def point(self, s: float) -> Point3:
        """Point at arclength fraction s in [0, 1]."""
        if self.kind == "latitude":
            theta = self.theta0 + s * (self.theta1 - self.theta0)
            return sph(theta, self.phi)
        a = self.start.array
        b = self.end.array
        ang = self.length
        if ang < 1e-15:
            return self.start
        w = _unit(b - a * math.cos(ang))
        return Point3.of(a * math.cos(s * ang) + w * math.sin(s * ang))

    def tangent(self, s: float) -> np.ndarray:
        if self.kind == "latitude":
            theta = self.theta0 + s * (self.theta1 - self.theta0)
            sign = 1.0 if self.theta1 >= self.theta0 else -1.0
            return sign * np.array([-math.sin(theta), math.cos(theta), 0.0])
        a = self.start.array
        ang = self.length
        w = _unit(self.end.array - a * math.cos(ang))
        return -a * math.sin(s * ang) + w * math.cos(s * ang)

    def sample(self, k: int) -> np.ndarray:
        return np.stack([self.point(s).array for s in np.linspace(0.0, 1.0, k)])

    def closest_param(self, p: Point3) -> float:
        if self.kind == "latitude":
            # Project into the latitude circle, then clamp azimuth.
            t = math.atan2(p.y, p.x)
            lo, hi = sorted((self.theta0, self.theta1))
            t = lo + (t - lo) % (2.0 * math.pi)
            if t > hi:
                t = lo if (t - hi) > (lo + 2.0 * math.pi - t) else hi
            return (t - self.theta0) / (self.theta1 - self.theta0)
        a = self.start.array
        ang = self.length
        w = _unit(self.end.array - a * math.cos(ang))
        # Angle of p's projection in the arc's own great-circle frame.
        t = math.atan2(float(p.array @ w), float(p.array @ a))
        if t < 0.0 or t > ang:
            # Off the arc: the nearer endpoint wins.
            return 0.0 if p.distance_to(self.start) <= p.distance_to(self.end) else 1.0
        return t / ang

    def closest_point(self, p: Point3, tol: float = RESIDUAL_TOL) -> Point3:
        return self.point(self.closest_param(p))

    @property
    def param_bounds(self) -> tuple[float, float, bool]:
        return 0.0, 1.0, False

    def eval_derivs(self, s: np.ndarray):
        """Batched position, velocity, acceleration over arclength fraction."""
        s = np.asarray(s, dtype=float)
        if self.kind == "latitude":
            dtheta = self.theta1 - self.theta0
            theta = self.theta0 + s * dtheta
            sp = math.sin(self.phi)
            ct, st = np.cos(theta), np.sin(theta)
            q = np.stack([sp * ct, sp * st, np.full_like(ct, math.cos(self.phi))], axis=1)
            dq = dtheta * np.stack([-sp * st, sp * ct, np.zeros_like(ct)], axis=1)
            d2q = -(dtheta ** 2) * np.stack([sp * ct, sp * st, np.zeros_like(ct)], axis=1)
            return q, dq, d2q
        a = self.start.array
        ang = self.length
        w = _unit(self.end.array - a * math.cos(ang))
        cs, sn = np.cos(s * ang)[:, None], np.sin(s * ang)[:, None]
        q = a * cs + w * sn
        dq = ang * (-a * sn + w * cs)
        return q, dq, -(ang ** 2) * q


@dataclass(frozen=True)
class ArcChain:
    """A concatenation of sphere arcs forming one continuous path.

    Parametrized by arclength fraction across the whole chain, so closest
    points and samples stay exact per piece (no polyline discretization).
    """

    arcs: tuple

    def __post_init__(self):
        for a, b in zip(self.arcs, self.arcs[1:]):
            if not a.end.close_to(b.start, 1e-9):
                raise ValueError("chain arcs must share endpoints in order")

    @property
    def length(self) -> float:
        return sum(a.length for a in self.arcs)

    def _locate(self, s: float) -> tuple[SphereArc, float]:
        total = self.length
        target = min(max(s, 0.0), 1.0) * total
        acc = 0.0
        for arc in self.arcs:
            if target <= acc + arc.length or arc is self.arcs[-1]:
                frac = (target - acc) / arc.length
                return arc, min(max(frac, 0.0), 1.0)
            acc += arc.length
        return self.arcs[-1], 1.0

    def point(self, s: float) -> Point3:
        arc, frac = self._locate(s)
        return arc.point(frac)

    def tangent(self, s: float) -> np.ndarray:
        arc, frac = self._locate(s)
        return arc.tangent(frac)

    def sample(self, k: int) -> np.ndarray:
        return np.stack([self.point(s).array for s in np.linspace(0.0, 1.0, k)])

    def closest_param(self, p: Point3) -> float:
        best = None
        acc = 0.0
        total = self.length
        for arc in self.arcs:
            frac = arc.closest_param(p)
            q = arc.point(frac)
            d = p.distance_to(q)
            s = (acc + frac * arc.length) / total
            if best is None or d < best[0]:
                best = (d, s)
            acc += arc.length
        return best[1]

    def closest_point(self, p: Point3, tol: float = RESIDUAL_TOL) -> Point3:
        return self.point(self.closest_param(p))

    @property
    def param_bounds(self) -> tuple[float, float, bool]:
        return 0.0, 1.0, False

    def eval_derivs(self, s: np.ndarray):
        """Batched piecewise evaluation; derivative jumps at arc junctions
        are inherent to the chain parametrization."""
        s = np.asarray(s, dtype=float)
        lens = np.array([a.length for a in self.arcs])
        cum = np.concatenate([[0.0], np.cumsum(lens)])
        total = cum[-1]
        target = np.clip(s, 0.0, 1.0) * total
        piece = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, len(lens) - 1)
        q = np.zeros((s.size, 3))
        dq = np.zeros((s.size, 3))
        d2q = np.zeros((s.size, 3))
        for i, arc in enumerate(self.arcs):
            m = piece == i
            if not m.any():
                continue
            frac = (target[m] - cum[i]) / lens[i]
            rate = total / lens[i]  # d(frac)/d(s)
            qa, dqa, d2qa = arc.eval_derivs(frac)
            q[m] = qa
            dq[m] = dqa * rate
            d2q[m] = d2qa * rate * rate
        return q, dq, d2q


# ---------------------------------------------------------------------------
# The three-point minimal tree (Fermat construction).
# ---------------------------------------------------------------------------

TWO_THIRDS_PI = 2.0 * math.pi / 3.0


def _cross2(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def fermat_point(a: Point3, b: Point3, c: Point3, tol: float = RESIDUAL_TOL):
    """Minimizer of d(x,a) + d(x,b) + d(x,c) and the minimal value.

    Returns ``(point_or_None, length)``.  ``None`` means some triangle angle
    is >= 2*pi/3 and the minimum is the two-edge path through that vertex
    (ties at the boundary resolve to the two-edge answer, where both
    solutions coincide in length).
    """
    pts = [a, b, c]
    for i in range(3):
        for j in range(i + 1, 3):
            if pts[i].distance_to(pts[j]) < tol:
                raise DegenerateGeometryError("coincident points in three-point tree")
    angles = [
        angle_at(pts[(i + 1) % 3], pts[i], pts[(i + 2) % 3], tol) for i in range(3)
    ]
    widest = int(np.argmax(angles))
    if angles[widest] >= TWO_THIRDS_PI - 1e-12:
        v = pts[widest]
        length = v.distance_to(pts[(widest + 1) % 3]) + v.distance_to(pts[(widest + 2) % 3])
        return None, length

    # Work in the triangle's plane.
    pa, pb, pc = a.array, b.array, c.array
    n = _unit(np.cross(pb - pa, pc - pa))
    u, v = _plane_basis(n)
    origin = pa

    def to2(p):
        w = p - origin
        return np.array([w @ u, w @ v])

    A2, B2, C2 = to2(pa), to2(pb), to2(pc)

    def rot(w, sign):
        ca, sa = 0.5, sign * (math.sqrt(3.0) / 2.0)
        return np.array([ca * w[0] - sa * w[1], sa * w[0] + ca * w[1]])

    def apex(p, q, opp):
        # Equilateral apex on segment [p, q], on the side away from opp.
        for sign in (1.0, -1.0):
            d = rot(q - p, sign)
            cand = p + d
            if _cross2(q - p, cand - p) * _cross2(q - p, opp - p) < 0:
                return cand
        raise DegenerateGeometryError("degenerate triangle in Fermat construction")

    apex_a = apex(B2, C2, A2)
    apex_b = apex(C2, A2, B2)
    # Simpson's theorem: |A apex_a| equals the minimal total length.
    length = float(np.linalg.norm(apex_a - A2))

    p1, d1 = A2, apex_a - A2
    p2, d2 = B2, apex_b - B2
    denom = _cross2(d1, d2)
    if abs(denom) < 1e-14:
        raise DegenerateGeometryError("parallel Simpson lines")
    t = _cross2(p2 - p1, d2) / denom
    s2 = p1 + t * d1
    steiner = Point3.of(origin + s2[0] * u + s2[1] * v)

    # Near the 2*pi/3 boundary the line intersection loses digits; polish
    # with a few damped Weiszfeld steps if the angle conditions are off.
    if _fermat_angle_residual(steiner, pts) > 1e-10:
        steiner = _weiszfeld(steiner, pts)
    return steiner, length


def _fermat_angle_residual(s: Point3, pts) -> float:
    dirs = []
    for p in pts:
        w = p.array - s.array
        nw = np.linalg.norm(w)
        if nw < 1e-14:
            return math.inf
        dirs.append(w / nw)
    return float(np.linalg.norm(sum(dirs)))


def _weiszfeld(s: Point3, pts, iters: int = 200) -> Point3:
    x = s.array.copy()
    arrs = [p.array for p in pts]
    for _ in range(iters):
        wsum = np.zeros(3)
        denom = 0.0
        for p in arrs:
            d = np.linalg.norm(x - p)
            if d < 1e-15:
                d = 1e-15
            wsum += p / d
            denom += 1.0 / d
        nxt = wsum / denom
        if np.linalg.norm(nxt - x) < 1e-16:
            x = nxt
            break
        x = nxt
    return Point3.of(x)


def rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about ``axis`` by ``angle``."""
    k = _unit(np.asarray(axis, dtype=float))
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)


def random_rigid_motion(rng) -> tuple[np.ndarray, np.ndarray]:
    """A uniformly random rotation plus a bounded random translation."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    R = np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    t = rng.uniform(-1.0, 1.0, size=3)
    return R, t
