"""The knotted-terminal construction on the unit sphere.

A regular hexagon sits in the xz great circle; its two "c" vertices are
split off-plane into pairs (e_i, f_i) closer to the equator; an arc M winds
one and a half times around the equatorial band from d1 (near b1, latitude
+delta) to d2 (near b2, latitude -delta); finally M is replaced by a chain
of points of mesh below eps.  The resulting terminal set X consists of
a1, e1, f1, a2, e2, f2 and the chain t1..tn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArcChain, Circle3, Point3, SphereArc, sph
from .optimize import ClusterSpec, TerminalSet, terminal_set

SQ3 = math.sqrt(3.0)

HEXAGON = {
    "a1": Point3(-0.5, 0.0, SQ3 / 2),
    "b1": Point3(-1.0, 0.0, 0.0),
    "c1": Point3(-0.5, 0.0, -SQ3 / 2),
    "a2": Point3(0.5, 0.0, -SQ3 / 2),
    "b2": Point3(1.0, 0.0, 0.0),
    "c2": Point3(0.5, 0.0, SQ3 / 2),
}

# Cyclic order of the hexagon vertices around the xz great circle.
HEXAGON_ORDER = ("a1", "b1", "c1", "a2", "b2", "c2")

B4 = Point3(0.0, 1.0, 0.0)
B5 = Point3(0.0, -1.0, 0.0)


def equator() -> Circle3:
    """Q: the unit circle in the z = 0 plane."""
    return Circle3(Point3(0, 0, 0), 1.0, Point3(0, 0, 1))


def equator_parallel(height: float) -> Circle3:
    """The on-sphere circle at the given plane height (a Q_delta instance)."""
    if not -1.0 < height < 1.0:
        raise ValueError("height must lie strictly inside (-1, 1)")
    return Circle3(Point3(0, 0, height), math.sqrt(1.0 - height * height), Point3(0, 0, 1))


def hexagon_edges():
    """The six hexagon sides as vertex-name pairs, in cyclic order."""
    names = HEXAGON_ORDER
    return [(names[i], names[(i + 1) % 6]) for i in range(6)]


def hexagon_vertices() -> dict:
    return dict(HEXAGON)


@dataclass(frozen=True)
class ConstructionParams:
    """Split width gamma, latitude offset delta, chain mesh eps.

    The existence proof only asserts sufficiently small values work; these
    defaults are validated a posteriori by the structure checks, and a
    strict mode halves them."""

    gamma: float = 0.1
    delta: float = 0.05
    eps: float = 0.05

    def __post_init__(self):
        if not (0 < self.gamma < 1):
            raise ValueError("gamma must lie in (0, 1)")
        if not (0 < self.delta < math.pi / 2):
            raise ValueError("delta must lie in (0, pi/2)")
        if not (0 < self.eps < 0.5):
            raise ValueError("eps must lie in (0, 0.5)")

    def halved(self) -> "ConstructionParams":
        return ConstructionParams(self.gamma / 2, self.delta / 2, self.eps / 2)


def split_points(gamma: float) -> dict:
    """The shifted c vertices and the sphere points where the line through
    each of them perpendicular to the xz-plane pierces the sphere.

    The labels are fixed so that the half-turn (x, y, z) -> (-x, y, -z)
    carries e1 -> f2 and f1 -> e2."""
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0, 1)")
    z1 = -(SQ3 / 2) * (1 - gamma)
    z2 = (SQ3 / 2) * (1 - gamma)
    y = math.sqrt(3.0 * gamma * (2.0 - gamma)) / 2.0
    return {
        "c1_gamma": Point3(-0.5, 0.0, z1),
        "c2_gamma": Point3(0.5, 0.0, z2),
        "e1": Point3(-0.5, -y, z1),
        "f1": Point3(-0.5, y, z1),
        "e2": Point3(0.5, y, z2),
        "f2": Point3(0.5, -y, z2),
    }


def d_points(delta: float) -> dict:
    """Arc endpoints: d1 just above the equator near b1, d2 just below
    near b2."""
    return {
        "d1": sph(math.pi, math.pi / 2 - delta),
        "d2": sph(0.0, math.pi / 2 + delta),
    }


def arc_M(delta: float):
    """The five pieces of the winding arc M(delta), chained from d1 to d2.

    M1 and M5 run at constant latitude (so the chain samples that the
    construction places at explicit spherical coordinates lie exactly on
    them); M2 and M4 are the shortest sphere arcs between their stated
    endpoints; M3 is the long way around the equator.
    """
    if not (0 < delta < math.pi / 2):
        raise ValueError("delta must lie in (0, pi/2)")
    up = math.pi / 2 - delta
    down = math.pi / 2 + delta
    m1 = SphereArc.latitude(up, math.pi, 5 * math.pi / 4)
    m2 = SphereArc.great(sph(5 * math.pi / 4, up), sph(7 * math.pi / 4, math.pi / 2))
    m3 = SphereArc.latitude(math.pi / 2, 7 * math.pi / 4, 7 * math.pi / 4 + 3 * math.pi / 2)
    m4 = SphereArc.great(sph(5 * math.pi / 4, math.pi / 2), sph(7 * math.pi / 4, down))
    m5 = SphereArc.latitude(down, 7 * math.pi / 4, 2 * math.pi)
    return [m1, m2, m3, m4, m5]


def arc_M_chain(delta: float) -> ArcChain:
    return ArcChain(tuple(arc_M(delta)))


def arc_M_length(delta: float) -> float:
    """Closed form: the two tilted quarter arcs are exactly pi/2 long
    (their endpoints subtend a right angle for every delta), M3 is 3*pi/2,
    and the latitude pieces contribute (pi/4) cos(delta) each."""
    return 5 * math.pi / 2 + (math.pi / 2) * math.cos(delta)


CHAIN_SPACING_FACTOR = 0.9  # arclength step as a fraction of eps


def sample_chain(delta: float, eps: float):
    """The chain t1..tn: t1 and tn straddle d1 and d2 just off M, t2 and
    t_{n-1} sit on M at azimuth offset eps from the ends, and the interior
    points subdivide M between them at uniform arclength below 0.9 eps
    (so every chord gap stays strictly below eps)."""
    chain = arc_M_chain(delta)
    up = math.pi / 2 - delta
    down = math.pi / 2 + delta
    t1 = sph(math.pi - eps, up)
    t2 = sph(math.pi + eps, up)
    t_last = sph(2 * math.pi - eps, down)
    t_n = sph(2 * math.pi + eps, down)

    # Arclength positions of t2 and t_{n-1} along the chain.
    lead = eps * math.cos(delta)  # latitude arc from theta=pi to pi+eps
    total = chain.length
    s2 = lead / total
    s_last = 1.0 - lead / total
    inner_length = total - 2 * lead
    pieces = int(math.ceil(inner_length / (CHAIN_SPACING_FACTOR * eps)))
    interior = [
        chain.point(s2 + (s_last - s2) * j / pieces) for j in range(1, pieces)
    ]
    points = [t1, t2] + interior + [t_last, t_n]
    # Straddle requirement: the gap between t1 and t2 (about 2 eps) must
    # exceed every interior gap.
    gaps = [points[i].distance_to(points[i + 1]) for i in range(1, len(points) - 2)]
    straddle = points[0].distance_to(points[1])
    if not all(g < min(straddle, eps) for g in gaps):
        raise ValueError("eps too large to satisfy the chain straddle inequality")
    return points


def chain_labels(n: int):
    return [f"t{i}" for i in range(1, n + 1)]


@dataclass(frozen=True)
class NamedPointSet:
    """Every named point of the construction, plus the chain ordering."""

    points: dict
    chain: tuple
    params: ConstructionParams

    def __getitem__(self, label: str) -> Point3:
        return self.points[label]

    @property
    def n_chain(self) -> int:
        return len(self.chain)


def named_points(params: ConstructionParams = ConstructionParams()) -> NamedPointSet:
    """Hexagon, splits, arc endpoints, poles of the hexagon plane, the
    attachment targets v1/v2 on the default on-sphere Q_delta, and the
    chain."""
    pts = dict(HEXAGON)
    pts.update(split_points(params.gamma))
    pts.update(d_points(params.delta))
    pts["b4"] = B4
    pts["b5"] = B5
    h = params.delta / 2  # default Q_delta plane height
    r = math.sqrt(1 - h * h)
    pts["v1"] = Point3(-r, 0.0, h)
    pts["v2"] = Point3(r, 0.0, h)
    chain_pts = sample_chain(params.delta, params.eps)
    labels = chain_labels(len(chain_pts))
    pts.update(zip(labels, chain_pts))
    return NamedPointSet(pts, tuple(labels), params)


def build_X(params: ConstructionParams = ConstructionParams()) -> TerminalSet:
    """The full terminal set X = {a1, e1, f1, a2, e2, f2, t1..tn}."""
    named = named_points(params)
    labels = ["a1", "e1", "f1", "a2", "e2", "f2"] + list(named.chain)
    return terminal_set(points=[(l, named[l]) for l in labels])


def default_cluster_spec(x: TerminalSet) -> ClusterSpec:
    """The decomposition the structure theorem asserts: the five terminals
    nearest each arc end solved exactly, the rest of the chain verbatim."""
    chain = [l for l, _ in x.points if l.startswith("t")]
    chain.sort(key=lambda l: int(l[1:]))
    n = len(chain)
    return ClusterSpec(
        cluster_a=("a1", chain[0], chain[1], "e1", "f1"),
        chain=tuple(chain[1:-1]),
        cluster_b=("a2", chain[n - 2], chain[n - 1], "e2", "f2"),
    )
