"""Embedded trees: the geometric realization of a topology plus plumbing
(validation, JSON schema, paths, closed-form small solvers)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .geometry import (
    ASSERT_TOL,
    DegenerateGeometryError,
    Point3,
    as_array,
    fermat_point,
)

ROLE_TERMINAL = "terminal"
ROLE_STEINER = "steiner"
ROLE_ATTACHMENT = "attachment"


@dataclass(frozen=True)
class Vertex:
    id: int
    point: Point3
    role: str
    label: str = ""


@dataclass(frozen=True)
class Attachment:
    """An attachment vertex's binding: which continuum and where on it."""

    vertex_id: int
    continuum: str
    param: float


@dataclass(frozen=True)
class EmbeddedGraph:
    """A geometric tree (or forest): vertices, edges, total length.

    Vertices carry roles (terminal / steiner / attachment); attachment
    vertices slide on a continuum and record their parameter.  ``ties``
    holds canonical encodings of alternative optima within tolerance,
    ``topology`` the encoding that produced this embedding.
    """

    vertices: tuple
    edges: tuple
    length: float
    attachments: tuple = ()
    topology: str = ""
    ties: tuple = ()

    def __post_init__(self):
        total = sum(self.edge_length(e) for e in self.edges)
        if abs(total - self.length) > 1e-9 * (1.0 + abs(total)):
            raise ValueError("length field inconsistent with edge lengths")

    # -- basic structure ----------------------------------------------------

    def vertex(self, vid: int) -> Vertex:
        return self._by_id()[vid]

    def _by_id(self):
        return {v.id: v for v in self.vertices}

    def edge_length(self, e) -> float:
        by_id = self._by_id()
        return by_id[e[0]].point.distance_to(by_id[e[1]].point)

    def degree(self, vid: int) -> int:
        return sum(1 for e in self.edges if vid in e)

    def adjacency(self) -> dict:
        adj: dict = {v.id: [] for v in self.vertices}
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def leaves(self) -> list:
        return [v for v in self.vertices if self.degree(v.id) == 1]

    def positions(self) -> np.ndarray:
        return as_array([v.point for v in self.vertices])

    def steiner_vertices(self) -> list:
        return [v for v in self.vertices if v.role == ROLE_STEINER]

    def find_label(self, label: str) -> Vertex:
        for v in self.vertices:
            if v.label == label:
                return v
        raise KeyError(label)

    def is_tree(self) -> bool:
        n = len(self.vertices)
        if len(self.edges) != n - 1:
            return False
        seen = set()
        stack = [self.vertices[0].id] if self.vertices else []
        adj = self.adjacency()
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(adj[v])
        return len(seen) == n

    def validate(self, tol: float = ASSERT_TOL):
        """Structural invariants: acyclic per block, degree-3 steiner
        vertices, length consistency."""
        n = len(self.vertices)
        if len(self.edges) > max(n - 1, 0):
            raise ValueError("too many edges for a forest")
        for v in self.vertices:
            if v.role == ROLE_STEINER and self.degree(v.id) != 3:
                raise ValueError(f"steiner vertex {v.id} has degree {self.degree(v.id)}")
        return self

    def sample_edges(self, per_edge: int = 5) -> np.ndarray:
        """Points sampled along every edge (for Hausdorff comparisons)."""
        by_id = self._by_id()
        rows = []
        for i, j in self.edges:
            a = by_id[i].point.array
            b = by_id[j].point.array
            for t in np.linspace(0.0, 1.0, per_edge):
                rows.append((1 - t) * a + t * b)
        if not rows:
            return np.zeros((0, 3))
        return np.stack(rows)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vertices": [
                {"id": v.id, "xyz": [v.point.x, v.point.y, v.point.z], "role": v.role}
                for v in self.vertices
            ],
            "edges": [[int(i), int(j)] for i, j in self.edges],
            "length": self.length,
            "attachments": [
                {"continuum": a.continuum, "param": a.param} for a in self.attachments
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @staticmethod
    def from_dict(d: dict) -> "EmbeddedGraph":
        vertices = tuple(
            Vertex(int(v["id"]), Point3.of(v["xyz"]), v["role"]) for v in d["vertices"]
        )
        edges = tuple((int(i), int(j)) for i, j in d["edges"])
        attachments = tuple(
            Attachment(-1, a["continuum"], float(a["param"]))
            for a in d.get("attachments", [])
        )
        return EmbeddedGraph(vertices, edges, float(d["length"]), attachments)

    @staticmethod
    def from_json(s: str) -> "EmbeddedGraph":
        return EmbeddedGraph.from_dict(json.loads(s))


def graph_from_points(points, edges, roles=None, labels=None, **kwargs) -> EmbeddedGraph:
    pts = [p if isinstance(p, Point3) else Point3.of(p) for p in points]
    roles = roles or [ROLE_TERMINAL] * len(pts)
    labels = labels or [""] * len(pts)
    vertices = tuple(
        Vertex(i, p, r, l) for i, (p, r, l) in enumerate(zip(pts, roles, labels))
    )
    edges = tuple((int(i), int(j)) for i, j in edges)
    by_id = {v.id: v for v in vertices}
    length = sum(by_id[i].point.distance_to(by_id[j].point) for i, j in edges)
    return EmbeddedGraph(vertices, edges, length, **kwargs)


def three_point_minimal_tree(a: Point3, b: Point3, c: Point3) -> EmbeddedGraph:
    """Minimal tree for three points: a simple triod with 2*pi/3 angles at
    its added vertex when every triangle angle is below 2*pi/3, otherwise
    the two-edge path through the wide-angle vertex."""
    steiner, length = fermat_point(a, b, c)
    pts = [a, b, c]
    if steiner is None:
        angles = []
        for i in range(3):
            u = pts[(i + 1) % 3].array - pts[i].array
            v = pts[(i + 2) % 3].array - pts[i].array
            angles.append(
                math.atan2(np.linalg.norm(np.cross(u, v)), float(u @ v))
            )
        w = int(np.argmax(angles))
        edges = [(w, (w + 1) % 3), (w, (w + 2) % 3)]
        return graph_from_points(pts, edges)
    return graph_from_points(
        pts + [steiner],
        [(0, 3), (1, 3), (2, 3)],
        roles=[ROLE_TERMINAL] * 3 + [ROLE_STEINER],
    )


def minimum_spanning_tree(points) -> EmbeddedGraph:
    """Euclidean MST over the complete graph on ``points`` (Prim)."""
    pts = [p if isinstance(p, Point3) else Point3.of(p) for p in points]
    if not pts:
        raise ValueError("minimum_spanning_tree needs at least one point")
    n = len(pts)
    arr = as_array(pts)
    if n == 1:
        return graph_from_points(pts, [])
    dist = np.linalg.norm(arr[:, None, :] - arr[None, :, :], axis=2)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    parent = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        masked = np.where(in_tree, np.inf, best)
        j = int(np.argmin(masked))
        edges.append((int(parent[j]), j))
        in_tree[j] = True
        closer = dist[j] < best
        best = np.where(closer, dist[j], best)
        parent = np.where(closer, j, parent)
    return graph_from_points(pts, edges)


def tree_path(graph: EmbeddedGraph, start_id: int, end_id: int) -> list:
    """Vertex ids along the unique path between two vertices of a tree."""
    adj = graph.adjacency()
    prev = {start_id: None}
    stack = [start_id]
    while stack:
        v = stack.pop()
        if v == end_id:
            break
        for w in adj[v]:
            if w not in prev:
                prev[w] = v
                stack.append(w)
    if end_id not in prev:
        raise ValueError("vertices not connected")
    path = [end_id]
    while path[-1] != start_id:
        path.append(prev[path[-1]])
    return path[::-1]
