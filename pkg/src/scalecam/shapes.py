"""Procedural meshes with outward winding: cube, icosphere, superellipsoid,
torus and open cylinder, plus helpers that punch holes into them."""

import numpy as np

from .errors import InvalidMesh
from .mesh import TriangleMesh, raw_volume

_CUBE_FACES = np.array([
    [0, 2, 3], [0, 3, 1],  # -z
    [4, 5, 7], [4, 7, 6],  # +z
    [0, 1, 5], [0, 5, 4],  # -y
    [2, 6, 7], [2, 7, 3],  # +y
    [0, 4, 6], [0, 6, 2],  # -x
    [1, 3, 7], [1, 7, 5],  # +x
])


def cube(side=1.0, center=(0.0, 0.0, 0.0), corner=None) -> TriangleMesh:
    """Axis-aligned cube, 8 vertices and 12 faces.

    By default centered on `center`; pass `corner` to place the minimum
    corner instead (``cube(corner=(0, 0, 0))`` is the unit cube [0, 1]^3).
    """
    bits = np.array([[i & 1, (i >> 1) & 1, (i >> 2) & 1] for i in range(8)],
                    dtype=np.float64)
    if corner is not None:
        verts = np.asarray(corner, dtype=np.float64) + side * bits
    else:
        verts = np.asarray(center, dtype=np.float64) + side * (bits - 0.5)
    return TriangleMesh(verts, _CUBE_FACES)


def _subdivide(verts, faces):
    edges = np.sort(faces[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
    uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
    mids = 0.5 * (verts[uniq[:, 0]] + verts[uniq[:, 1]])
    m = inverse.reshape(-1, 3) + len(verts)
    a, b, c = faces.T
    ab, bc, ca = m.T
    new_faces = np.concatenate([
        np.stack([a, ab, ca], axis=1),
        np.stack([b, bc, ab], axis=1),
        np.stack([c, ca, bc], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ])
    return np.vstack([verts, mids]), new_faces


def icosphere(radius=1.0, subdivisions=4, center=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Geodesic sphere with vertices on the sphere (so the mesh is inscribed).

    Has 10 * 4**s + 2 vertices and 20 * 4**s faces after s subdivisions.
    """
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=np.float64)
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    for _ in range(subdivisions):
        verts, faces = _subdivide(verts, faces)
        verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return TriangleMesh(radius * verts + np.asarray(center, dtype=np.float64),
                        faces)


def _signed_pow(x, e):
    return np.sign(x) * np.abs(x) ** e


def _outward(verts, faces):
    if raw_volume(verts, faces) < 0:
        faces = faces[:, ::-1]
    return TriangleMesh(verts, faces)


def _latlong_faces(n_rings, n_seg):
    """Faces for a closed lat/long grid: south pole, rings, north pole."""
    south, north = 0, 1 + n_rings * n_seg
    j = np.arange(n_seg)
    ring = lambda i, j: 1 + i * n_seg + (j % n_seg)  # noqa: E731
    cap_s = np.stack([np.full(n_seg, south), ring(0, j + 1), ring(0, j)], axis=1)
    i, jj = np.meshgrid(np.arange(n_rings - 1), j, indexing="ij")
    a, b = ring(i, jj), ring(i, jj + 1)
    c, d = ring(i + 1, jj + 1), ring(i + 1, jj)
    band = np.stack([np.stack([a, b, c], -1), np.stack([a, c, d], -1)], axis=2)
    cap_n = np.stack([np.full(n_seg, north), ring(n_rings - 1, j),
                      ring(n_rings - 1, j + 1)], axis=1)
    return np.concatenate([cap_s, band.reshape(-1, 3), cap_n]).astype(np.int64)


def superellipsoid(a, b, c, r=2.0, t=2.0, resolution=32) -> TriangleMesh:
    """Surface (|x/a|^r + |y/b|^r)^(t/r) + |z/c|^t = 1 as a lat/long mesh.

    ``r = t = 2`` is the ellipsoid with semi-axes a, b, c. `resolution` is the
    number of latitude intervals; longitude uses twice as many segments.
    """
    n_lat = int(resolution)
    n_seg = 2 * n_lat
    eta = -np.pi / 2 + np.pi * np.arange(1, n_lat) / n_lat
    omega = -np.pi + 2 * np.pi * np.arange(n_seg) / n_seg
    E, W = np.meshgrid(eta, omega, indexing="ij")
    ce = _signed_pow(np.cos(E), 2.0 / t)
    x = a * ce * _signed_pow(np.cos(W), 2.0 / r)
    y = b * ce * _signed_pow(np.sin(W), 2.0 / r)
    z = c * _signed_pow(np.sin(E), 2.0 / t)
    rings = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    verts = np.vstack([[0.0, 0.0, -c], rings, [0.0, 0.0, c]])
    return _outward(verts, _latlong_faces(n_lat - 1, n_seg))


def torus_grid(major=2.0, minor=0.5, nu=64, nv=32):
    """Torus built from an nu x nv grid of quads, each split in two.

    Returns ``(mesh, quad_faces)`` where ``quad_faces[i, j]`` holds the two
    face indices of quad (i, j), so callers can cut out rectangular patches.
    Quad (i, j) has corners v00, v10, v11, v01 and is split along v00-v11
    into faces (v00, v10, v11) and (v00, v11, v01).
    """
    u = 2 * np.pi * np.arange(nu) / nu
    v = 2 * np.pi * np.arange(nv) / nv
    U, V = np.meshgrid(u, v, indexing="ij")
    x = (major + minor * np.cos(V)) * np.cos(U)
    y = (major + minor * np.cos(V)) * np.sin(U)
    z = minor * np.sin(V)
    verts = np.stack([x, y, z], axis=-1).reshape(-1, 3)
    vid = lambda i, j: (i % nu) * nv + (j % nv)  # noqa: E731
    faces = []
    quads = np.zeros((nu, nv, 2), dtype=np.int64)
    for i in range(nu):
        for j in range(nv):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v11, v01 = vid(i + 1, j + 1), vid(i, j + 1)
            quads[i, j] = (len(faces), len(faces) + 1)
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    faces = np.asarray(faces, dtype=np.int64)
    if raw_volume(verts, faces) < 0:
        faces = faces[:, ::-1]
    return TriangleMesh(verts, faces), quads


def open_cylinder(radius=1.0, height=2.0, segments=16) -> TriangleMesh:
    """Side wall of a cylinder with no caps: two boundary loops of `segments`."""
    ang = 2 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang),
                     np.zeros(segments)], axis=1)
    top = ring + [0.0, 0.0, height / 2]
    bottom = ring - [0.0, 0.0, height / 2]
    verts = np.vstack([bottom, top])
    faces = []
    for j in range(segments):
        k = (j + 1) % segments
        faces.append((j, k, segments + k))
        faces.append((j, segments + k, segments + j))
    return TriangleMesh(verts, np.asarray(faces))


def remove_faces(mesh: TriangleMesh, face_indices) -> TriangleMesh:
    """Drop the given faces, keeping every vertex (indices stay valid)."""
    keep = np.ones(mesh.n_faces, dtype=bool)
    keep[np.asarray(face_indices, dtype=np.int64)] = False
    return TriangleMesh(mesh.vertices, mesh.faces[keep], mesh.space)


def puncture_stars(mesh: TriangleMesh, count, rng) -> TriangleMesh:
    """Remove the faces around `count` randomly chosen, mutually distant
    vertices, opening one hole per chosen vertex."""
    faces = mesh.faces
    blocked = np.zeros(mesh.n_vertices, dtype=bool)
    removed = []
    for vi in rng.permutation(mesh.n_vertices):
        if len(removed) == count:
            break
        star = np.flatnonzero(np.any(faces == vi, axis=1))
        ring = np.unique(faces[star])
        if star.size == 0 or blocked[ring].any():
            continue
        # Block the two-ring so stars never share boundary vertices.
        two_ring = np.unique(faces[np.any(np.isin(faces, ring), axis=1)])
        blocked[two_ring] = True
        removed.append(star)
    if len(removed) < count:
        raise InvalidMesh(f"mesh too small to open {count} separate holes")
    return remove_faces(mesh, np.concatenate(removed) if removed else [])
