"""Indexed triangle meshes: manifold analysis, hole filling and enclosed volume.

Vertex indices are denoted with vi, face indices with fi. All functions treat
meshes as immutable values and return new meshes.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidMesh,
    InwardWinding,
    NonManifoldInput,
    NotWatertight,
    SelfIntersectingLoop,
)


class Space(str, enum.Enum):
    """Which coordinate system a mesh's vertices live in."""

    RECON = "RECON"
    CANVAS = "CANVAS"
    NORMALIZED = "NORMALIZED"
    PIXEL = "PIXEL"


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Vertex positions (N, 3) float64 and faces (M, 3) int64.

    The arrays are copied on construction and made read-only.
    """

    vertices: np.ndarray
    faces: np.ndarray
    space: Space = Space.RECON

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        f = np.asarray(self.faces)
        if v.size == 0:
            v = v.reshape(0, 3)
        if f.size == 0:
            f = f.reshape(0, 3)
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidMesh(f"vertices must have shape (N, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise InvalidMesh(f"faces must have shape (M, 3), got {f.shape}")
        if f.size and not np.issubdtype(f.dtype, np.integer):
            if not np.all(np.equal(np.mod(f, 1), 0)):
                raise InvalidMesh("face indices must be integers")
        f = f.astype(np.int64)
        if not np.all(np.isfinite(v)):
            raise InvalidMesh("vertex coordinates must be finite")
        if f.size:
            if f.min() < 0 or f.max() >= len(v):
                raise InvalidMesh(
                    f"face index out of range for {len(v)} vertices")
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2])
                      | (f[:, 0] == f[:, 2])):
                raise InvalidMesh("degenerate face (repeated vertex index)")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "faces", _frozen(f))
        object.__setattr__(self, "space", Space(self.space))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def with_vertices(self, vertices, space=None) -> "TriangleMesh":
        """Same faces, new vertex positions (and optionally a new space tag)."""
        return TriangleMesh(vertices, self.faces,
                            self.space if space is None else space)

    def transformed(self, matrix) -> "TriangleMesh":
        """Apply a 4x4 affine transform to every vertex."""
        m = np.asarray(matrix, dtype=np.float64)
        return self.with_vertices(self.vertices @ m[:3, :3].T + m[:3, 3])

    def centroid(self) -> np.ndarray:
        """Unweighted mean of the vertex positions."""
        return self.vertices.mean(axis=0)

    def extent(self) -> np.ndarray:
        if not self.n_vertices:
            return np.zeros(3)
        return self.vertices.max(axis=0) - self.vertices.min(axis=0)


@dataclass(frozen=True)
class EdgeManifoldReport:
    boundary_edge_count: int
    non_manifold_edge_count: int
    interior_edge_count: int
    boundary_loops: tuple = field(default=())

    @property
    def edge_count(self) -> int:
        return (self.boundary_edge_count + self.interior_edge_count
                + self.non_manifold_edge_count)

    @property
    def is_watertight(self) -> bool:
        return self.boundary_edge_count == 0 and self.non_manifold_edge_count == 0


def _undirected_edges(faces):
    """Return (half-edges (3M, 2), unique sorted edges, counts, half-edge -> edge)."""
    half = faces[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
    key = np.sort(half, axis=1)
    edges, inverse, counts = np.unique(
        key, axis=0, return_inverse=True, return_counts=True)
    return half, edges, counts, inverse.reshape(-1)


def _trace_loops(boundary_edges):
    """Partition undirected boundary edges into closed vertex cycles.

    Where a vertex touches more than two boundary edges the walk takes the
    smallest unused neighbour, so the partition is deterministic.
    """
    adjacency: dict[int, list[int]] = {}
    for a, b in boundary_edges:
        adjacency.setdefault(int(a), []).append(int(b))
        adjacency.setdefault(int(b), []).append(int(a))
    for nbrs in adjacency.values():
        nbrs.sort()
    used = set()
    loops = []
    for a, b in sorted((int(a), int(b)) for a, b in boundary_edges):
        if (a, b) in used:
            continue
        used.add((a, b))
        loop = [a]
        cur = b
        while cur != a:
            loop.append(cur)
            nxt = None
            for cand in adjacency[cur]:
                e = (min(cur, cand), max(cur, cand))
                if e not in used:
                    nxt = cand
                    used.add(e)
                    break
            if nxt is None:
                # Open chain; only reachable for inconsistent input.
                break
            cur = nxt
        loops.append(tuple(loop))
    return tuple(loops)


def analyze_manifold(mesh: TriangleMesh) -> EdgeManifoldReport:
    """Classify every undirected edge by how many faces share it.

    1 face is a boundary edge, 2 is interior, 3 or more is non-manifold.
    Boundary edges are grouped into closed loops of vertex indices.
    """
    if mesh.n_faces == 0:
        return EdgeManifoldReport(0, 0, 0, ())
    _, edges, counts, _ = _undirected_edges(mesh.faces)
    boundary = edges[counts == 1]
    return EdgeManifoldReport(
        boundary_edge_count=int(np.sum(counts == 1)),
        non_manifold_edge_count=int(np.sum(counts >= 3)),
        interior_edge_count=int(np.sum(counts == 2)),
        boundary_loops=_trace_loops(boundary),
    )


def _segments_cross(p):
    """True if any two non-adjacent closed-polygon segments properly cross."""
    n = len(p)
    # Pairwise test is O(n^2) in memory; very long loops are not checked.
    if n < 4 or n > 2048:
        return False
    a = p
    b = np.roll(p, -1, axis=0)

    def orient(u, v, w):
        return ((v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1])
                - (v[..., 1] - u[..., 1]) * (w[..., 0] - u[..., 0]))

    ai, bi = a[:, None], b[:, None]
    aj, bj = a[None, :], b[None, :]
    d1 = orient(ai, bi, aj)
    d2 = orient(ai, bi, bj)
    d3 = orient(aj, bj, ai)
    d4 = orient(aj, bj, bi)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    adjacent = (gap <= 1) | (gap == n - 1)
    return bool(np.any(crossing & ~adjacent))


def _loop_self_intersects(points):
    centered = points - points.mean(axis=0)
    # Plane of best fit; the two dominant directions span it.
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    planar = centered @ vt[:2].T
    return _segments_cross(planar)


def _fill_holes(mesh: TriangleMesh):
    """Centroid-fan hole filling. Returns (mesh, faces_added, messages)."""
    if mesh.n_faces == 0:
        return mesh, 0, []
    half, edges, counts, inverse = _undirected_edges(mesh.faces)
    if np.any(counts >= 3):
        raise NonManifoldInput(
            f"{int(np.sum(counts >= 3))} edges are shared by 3 or more faces; "
            "hole boundaries are ambiguous")
    boundary_mask = counts == 1
    if not boundary_mask.any():
        return mesh, 0, []

    # Directed half-edge (as wound in its face) for every boundary edge.
    directed = {}
    for he_index in np.flatnonzero(boundary_mask[inverse]):
        a, b = half[he_index]
        directed[(min(a, b), max(a, b))] = (int(a), int(b))

    loops = _trace_loops(edges[boundary_mask])
    verts = [mesh.vertices]
    new_faces = [mesh.faces]
    messages = []
    next_vi = mesh.n_vertices
    for loop in loops:
        loop_arr = np.asarray(loop)
        points = mesh.vertices[loop_arr]
        if len(set(loop)) != len(loop) or _loop_self_intersects(points):
            messages.append(
                f"boundary loop of length {len(loop)} starting at vertex "
                f"{loop[0]} self-intersects; filled anyway")
        verts.append(points.mean(axis=0, keepdims=True))
        fan = []
        for i in range(len(loop)):
            u, v = loop[i], loop[(i + 1) % len(loop)]
            a, b = directed[(min(u, v), max(u, v))]
            # Reverse the boundary half-edge so the new face agrees with
            # the winding of the face it borders.
            fan.append((b, a, next_vi))
        new_faces.append(np.asarray(fan, dtype=np.int64))
        next_vi += 1
    out = TriangleMesh(np.vstack(verts), np.vstack(new_faces), mesh.space)
    return out, out.n_faces - mesh.n_faces, messages


def fill_holes(mesh: TriangleMesh) -> TriangleMesh:
    """Close every boundary loop with a fan around the loop centroid.

    Each loop of n vertices gains one vertex and n faces. Original vertices
    and faces are kept unchanged at the front of the arrays. Loops that
    self-intersect are still filled, with a :class:`SelfIntersectingLoop`
    warning.

    Raises
    ------
    NonManifoldInput
        If any edge is shared by three or more faces.
    """
    out, _, messages = _fill_holes(mesh)
    for msg in messages:
        warnings.warn(msg, SelfIntersectingLoop, stacklevel=2)
    return out


def raw_volume(vertices, faces) -> float:
    """Divergence-theorem sum of det(v0, v1, v2) / 6, without any checks.

    Positive for outward (counter-clockwise seen from outside) winding.
    """
    v = np.asarray(vertices, dtype=np.float64)
    f = np.asarray(faces)
    if len(f) == 0:
        return 0.0
    # Shift to the vertex mean before summing: the result is unchanged for a
    # closed mesh but far less sensitive to cancellation for distant meshes.
    v = v - v.mean(axis=0)
    v0, v1, v2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    return float(np.einsum("ij,ij->i", v0, np.cross(v1, v2)).sum() / 6.0)


def signed_volume(mesh: TriangleMesh) -> float:
    """Enclosed volume of a watertight mesh, in cubic units of its space.

    The absolute value is returned; if the raw sum is negative (faces wound
    inward) an :class:`InwardWinding` warning is issued.

    Raises
    ------
    NotWatertight
        If the mesh has boundary or non-manifold edges.
    """
    report = analyze_manifold(mesh)
    if not report.is_watertight:
        raise NotWatertight(report.boundary_edge_count,
                            report.non_manifold_edge_count)
    vol = raw_volume(mesh.vertices, mesh.faces)
    if vol < 0:
        warnings.warn("negative raw volume: faces are wound inward",
                      InwardWinding, stacklevel=2)
    return abs(vol)
