import math

import numpy as np
import pytest

from steinerknot.construction import (
    B4,
    ConstructionParams,
    arc_M,
    arc_M_chain,
    arc_M_length,
    build_X,
    d_points,
    default_cluster_spec,
    equator,
    equator_parallel,
    hexagon_edges,
    hexagon_vertices,
    named_points,
    sample_chain,
    split_points,
)
from steinerknot.geometry import Point3, hausdorff_distance, sph

SQ3 = math.sqrt(3)


def test_hexagon_vertices_exact():
    h = hexagon_vertices()
    assert h["a1"].close_to(Point3(-0.5, 0, SQ3 / 2), 0)
    assert h["b2"].close_to(Point3(1, 0, 0), 0)
    for p in h.values():
        assert p.y == 0.0  # all on the xz great circle
        assert abs(p.norm() - 1.0) < 1e-15


def test_hexagon_edges_unit_length():
    h = hexagon_vertices()
    for u, v in hexagon_edges():
        assert abs(h[u].distance_to(h[v]) - 1.0) < 1e-15


def test_split_points_gamma_01():
    s = split_points(0.1)
    y = math.sqrt(3 * 0.1 * 1.9) / 2
    assert abs(s["e2"].x - 0.5) < 1e-15
    assert abs(s["e2"].y - 0.377492) < 1e-6
    assert abs(s["e2"].z - 0.779423) < 1e-6
    for k in ("e1", "f1", "e2", "f2"):
        assert abs(s[k].norm() - 1.0) < 1e-12
    # e and f are mirror images across the xz-plane
    assert s["e1"].close_to(Point3(s["f1"].x, -s["f1"].y, s["f1"].z), 1e-15)
    assert abs(abs(s["e1"].y) - y) < 1e-15


def test_split_points_small_gamma_limit():
    s = split_points(1e-8)
    assert s["e1"].distance_to(s["f1"]) < 1e-3
    assert s["e1"].close_to(Point3(-0.5, 0, -SQ3 / 2), 1e-3)


def test_split_points_half_turn_symmetry():
    s = split_points(0.1)
    half_turn = lambda p: Point3(-p.x, p.y, -p.z)
    assert half_turn(s["e1"]).close_to(s["f2"], 1e-15)
    assert half_turn(s["f1"]).close_to(s["e2"], 1e-15)


def test_arc_endpoints_chain_d1_to_d2():
    delta = 0.05
    arcs = arc_M(delta)
    d = d_points(delta)
    assert arcs[0].point(0).close_to(d["d1"], 1e-12)
    assert arcs[-1].point(1).close_to(d["d2"], 1e-12)
    for a, b in zip(arcs, arcs[1:]):
        assert a.end.close_to(b.start, 1e-12)
    assert d["d1"].close_to(Point3(-math.cos(delta), 0, math.sin(delta)), 1e-12)


def test_arc_length_closed_form_vs_integration():
    for delta in (0.02, 0.05):
        chain = arc_M_chain(delta)
        samples = chain.sample(200_000)
        numeric = float(np.linalg.norm(np.diff(samples, axis=0), axis=1).sum())
        assert abs(chain.length - arc_M_length(delta)) < 1e-12
        assert abs(numeric - arc_M_length(delta)) < 1e-6
        # within 10% of one and a half equators
        assert 0.9 * 3 * math.pi < chain.length < 1.1 * 3 * math.pi


def test_arc_m3_lies_on_equator():
    m3 = arc_M(0.05)[2]
    for s in np.linspace(0, 1, 50):
        p = m3.point(s)
        assert abs(p.z) < 1e-15
        assert abs(p.norm() - 1) < 1e-12


def test_chain_straddle_and_mesh():
    delta = eps = 0.05
    pts = sample_chain(delta, eps)
    up = math.pi / 2 - delta
    assert pts[0].close_to(sph(math.pi - eps, up), 1e-12)
    assert pts[1].close_to(sph(math.pi + eps, up), 1e-12)
    gaps = [pts[i].distance_to(pts[i + 1]) for i in range(1, len(pts) - 2)]
    assert max(gaps) < eps
    assert pts[0].distance_to(pts[1]) > max(gaps)
    assert pts[-2].distance_to(pts[-1]) > max(gaps)
    # interior chain points lie on M
    chain = arc_M_chain(delta)
    for p in pts[1:-1:17]:
        assert p.distance_to(chain.closest_point(p)) < 1e-9


def test_chain_count_golden():
    # Frozen after the first verified run with the 0.9*eps arclength step.
    pts = sample_chain(0.05, 0.05)
    assert len(pts) == 211


def test_build_X_counts_and_sphere():
    x = build_X(ConstructionParams())
    labels = [l for l, _ in x.points]
    n_chain = sum(1 for l in labels if l.startswith("t"))
    assert len(labels) == n_chain + 6
    assert not any(l.startswith("b") for l in labels)
    for _, p in x.points:
        assert abs(p.norm() - 1.0) < 1e-12


def test_build_X_near_idealization():
    # Every chain point is within delta + eps of the equator, and the six
    # split/apex terminals coincide with their ideal positions.
    params = ConstructionParams()
    x = build_X(params)
    q = equator()
    for l, p in x.points:
        if l.startswith("t"):
            d = p.distance_to(q.closest_point(p))
            assert d < params.delta + params.eps


def test_named_points_v_targets():
    named = named_points(ConstructionParams())
    assert named["v1"].y == 0.0
    assert named["v1"].x < 0 < named["v2"].x
    assert named["v1"].distance_to(named["b1"]) < named.params.delta
    assert abs(named["b4"].distance_to(B4)) < 1e-15


def test_equator_parallel_hausdorff():
    q = equator()
    qd = equator_parallel(0.03)
    d = hausdorff_distance(q.sample(3000), qd.sample(3000))
    assert d < 0.05


def test_default_cluster_spec_structure():
    x = build_X(ConstructionParams())
    spec = default_cluster_spec(x)
    assert spec.cluster_a[0] == "a1" and spec.cluster_b[0] == "a2"
    assert spec.cluster_a[1] == "t1" and spec.cluster_a[2] == "t2"
    assert spec.chain[0] == "t2"
    n = len([l for l, _ in x.points if l.startswith("t")])
    assert spec.chain[-1] == f"t{n-1}"
    assert spec.cluster_b[1] == f"t{n-1}" and spec.cluster_b[2] == f"t{n}"


def test_params_validation():
    with pytest.raises(ValueError):
        ConstructionParams(gamma=0)
    with pytest.raises(ValueError):
        ConstructionParams(delta=2.0)
    halved = ConstructionParams().halved()
    assert halved.gamma == 0.05
