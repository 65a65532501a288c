"""Pinhole camera geometry: object pose inversion, clip-space projection from
intrinsics, and the canvas -> normalized -> pixel chain applied to a mesh.

Conventions
-----------
View space looks down -z, so a point at distance d in front of the camera has
z = -d and clip w = d. With the projection below followed by the pixel map of
:func:`to_pixel_space`, a view-space point (X, Y, -d) lands on pixel column
``f_x X / d + c_x`` and pixel row ``f_y Y / d + H - c_y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateExtent,
    InvalidCamera,
    NonPositiveInput,
    NonRigidPose,
    SpaceMismatch,
    VertexBehindCamera,
)
from .mesh import Space, TriangleMesh

RIGID_TOL = 1e-6
DEFAULT_NEAR = 0.001
DEFAULT_FAR = 100.0


def rigidity_error(matrix) -> float:
    """Largest deviation of a 4x4 matrix from a proper rigid transform."""
    m = np.asarray(matrix, dtype=np.float64)
    r = m[:3, :3]
    ortho = np.abs(r.T @ r - np.eye(3)).max()
    det = abs(np.linalg.det(r) - 1.0)
    bottom = np.abs(m[3] - [0.0, 0.0, 0.0, 1.0]).max()
    return float(max(ortho, det, bottom))


@dataclass(frozen=True, eq=False)
class ObjectPose:
    """Rigid 4x4 transform; translation in reconstruction units.

    The bottom row must be exactly [0, 0, 0, 1] and the rotation block
    orthonormal with determinant +1 to within ``RIGID_TOL``.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.shape != (4, 4):
            raise NonRigidPose(f"pose must be 4x4, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise NonRigidPose("pose has non-finite entries")
        if not np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise NonRigidPose(f"pose bottom row must be [0 0 0 1], got {m[3]}")
        err = rigidity_error(m)
        if err > RIGID_TOL:
            raise NonRigidPose(f"rotation block not orthonormal (error {err:.3g})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls):
        return cls(np.eye(4))

    @classmethod
    def from_rt(cls, rotation, translation):
        m = np.eye(4)
        m[:3, :3] = rotation
        m[:3, 3] = translation
        return cls(m)

    @property
    def rotation(self):
        return self.matrix[:3, :3]

    @property
    def translation(self):
        return self.matrix[:3, 3]


@dataclass(frozen=True, eq=False)
class CameraModel:
    """Pinhole intrinsics as a 4x4 matrix K plus image size and clip planes.

    K[0, 0] = f_x, K[1, 1] = f_y, K[0, 1] = skew, K[0, 2] = c_x, K[1, 2] = c_y.
    """

    K: np.ndarray
    width: int
    height: int
    near: float = DEFAULT_NEAR
    far: float = DEFAULT_FAR

    def __post_init__(self):
        K = np.array(self.K, dtype=np.float64, copy=True)
        if K.shape == (3, 3):
            K4 = np.eye(4)
            K4[:3, :3] = K
            K = K4
        if K.shape != (4, 4):
            raise InvalidCamera(f"K must be 4x4 (or 3x3), got {K.shape}")
        if not np.all(np.isfinite(K)):
            raise InvalidCamera("K has non-finite entries")
        if not (K[0, 0] > 0 and K[1, 1] > 0):
            raise InvalidCamera("focal lengths K[0,0] and K[1,1] must be positive")
        if not (self.width > 0 and self.height > 0):
            raise InvalidCamera("image width and height must be positive")
        if not (np.isfinite(self.near) and np.isfinite(self.far)
                and 0 < self.near < self.far):
            raise InvalidCamera(f"need 0 < near < far, got {self.near}, {self.far}")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))
        object.__setattr__(self, "near", float(self.near))
        object.__setattr__(self, "far", float(self.far))

    @classmethod
    def pinhole(cls, fx, fy=None, cx=None, cy=None, width=512, height=None,
                near=DEFAULT_NEAR, far=DEFAULT_FAR, skew=0.0):
        height = width if height is None else height
        K = np.eye(4)
        K[0, 0] = fx
        K[1, 1] = fx if fy is None else fy
        K[0, 1] = skew
        K[0, 2] = width / 2 if cx is None else cx
        K[1, 2] = height / 2 if cy is None else cy
        return cls(K, width, height, near, far)

    @property
    def fx(self) -> float:
        return float(self.K[0, 0])

    @property
    def is_square(self) -> bool:
        return self.width == self.height


@dataclass(frozen=True)
class WidthRatio:
    """Object width over image width, both in pixels."""

    w_op: float
    w_ip: float

    def __post_init__(self):
        if not (0 < self.w_op <= self.w_ip):
            raise NonPositiveInput(
                f"need 0 < object width <= image width, got {self.w_op}, {self.w_ip}")

    @property
    def ratio(self) -> float:
        return self.w_op / self.w_ip


def view_matrix(pose: ObjectPose) -> np.ndarray:
    """Inverse of a rigid pose in closed form, [R^T | -R^T t]."""
    m = pose.matrix if isinstance(pose, ObjectPose) else np.asarray(pose, float)
    err = rigidity_error(m)
    if err > RIGID_TOL:
        raise NonRigidPose(f"pose is not rigid (error {err:.3g})")
    r = m[:3, :3]
    t = m[:3, 3]
    out = np.eye(4)
    out[:3, :3] = r.T
    out[:3, 3] = -r.T @ t
    return out


def projection_matrix(cam: CameraModel) -> np.ndarray:
    """Clip-space projection built from the intrinsics, image size and clip
    planes. Row 3 is [0, 0, -1, 0], so clip w is the distance in front of
    the camera; depths near and far map to NDC z = -1 and +1."""
    K, W, H = cam.K, float(cam.width), float(cam.height)
    n, f = cam.near, cam.far
    P = np.zeros((4, 4))
    P[0, 0] = 2 * K[0, 0] / W
    P[0, 1] = -2 * K[0, 1] / W
    P[0, 2] = (W - 2 * K[0, 2]) / W
    P[1, 1] = -2 * K[1, 1] / H
    P[1, 2] = (H - 2 * K[1, 2]) / H
    P[2, 2] = (-f - n) / (f - n)
    P[2, 3] = -2 * f * n / (f - n)
    P[3, 2] = -1.0
    return P


def _homogeneous(points):
    return np.hstack([points, np.ones((len(points), 1))])


def project_mesh(mesh: TriangleMesh, view, projection, mode="perspective") -> TriangleMesh:
    """Carry reconstruction-space vertices onto the canvas.

    Parameters
    ----------
    mesh : TriangleMesh
        Mesh tagged ``Space.RECON``.
    view, projection : (4, 4) array
        View matrix (inverse pose) and clip-space projection.
    mode : {"perspective", "weak"}
        ``"perspective"`` divides every vertex by its own clip w, giving
        exact normalized device coordinates.
        ``"weak"`` projects the vertex centroid exactly and lays the rest of
        the mesh around it as a similarity copy of view space: the image-plane
        rows of the projection are divided by the centroid's clip w, and depth
        offsets use the same scale as x. Orientation and relative depth are
        preserved and the canvas x-extent tracks the silhouette width.

    Raises
    ------
    VertexBehindCamera
        If any vertex (or, in weak mode, the centroid) has clip w <= 0.
    """
    if mesh.space is not Space.RECON:
        raise SpaceMismatch(f"project_mesh expects a RECON mesh, got {mesh.space.value}")
    if mode not in ("perspective", "weak"):
        raise ValueError(f"unknown projection mode {mode!r}")
    V = np.asarray(view, dtype=np.float64)
    P = np.asarray(projection, dtype=np.float64)
    eye = _homogeneous(mesh.vertices) @ V.T
    clip = eye @ P.T
    bad = np.flatnonzero(~(clip[:, 3] > 0))
    if bad.size:
        raise VertexBehindCamera(int(bad[0]))
    if mode == "perspective":
        canvas = clip[:, :3] / clip[:, 3:4]
        return mesh.with_vertices(canvas, Space.CANVAS)

    center_eye = eye[:, :3].mean(axis=0)
    center_clip = P @ np.append(center_eye, 1.0)
    w_c = center_clip[3]
    if not w_c > 0:
        raise VertexBehindCamera(-1)
    anchor = center_clip[:3] / w_c
    offset = eye[:, :3] - center_eye
    canvas = np.empty_like(offset)
    canvas[:, 0] = anchor[0] + (P[0, 0] * offset[:, 0] + P[0, 1] * offset[:, 1]) / w_c
    canvas[:, 1] = anchor[1] + (P[1, 1] * offset[:, 1]) / w_c
    # Depth grows away from the camera (view z is negative in front).
    canvas[:, 2] = anchor[2] - abs(P[0, 0]) * offset[:, 2] / w_c
    return mesh.with_vertices(canvas, Space.CANVAS)


def normalization_scale(extent_x, ratio) -> float:
    """Factor that stretches a canvas x-extent to 2 * ratio, i.e. to the
    object's share of the image width inside the side-2 NDC cube."""
    if not extent_x >= 1e-12:
        raise DegenerateExtent(f"canvas x-extent {extent_x!r} is below 1e-12")
    return 2.0 * ratio / extent_x


def normalize_mesh(mesh: TriangleMesh, wr: WidthRatio) -> TriangleMesh:
    """Rescale a canvas mesh about its vertex centroid so its x-extent is
    ``2 * w_op / w_ip``, and pull the centroid toward the origin by the
    width ratio."""
    if mesh.space is not Space.CANVAS:
        raise SpaceMismatch(f"normalize_mesh expects a CANVAS mesh, got {mesh.space.value}")
    ext = float(mesh.extent()[0])
    s1 = normalization_scale(ext, wr.ratio)
    c = mesh.centroid()
    out = (mesh.vertices - c) * s1 + c * wr.ratio
    return mesh.with_vertices(out, Space.NORMALIZED)


def to_pixel_space(mesh: TriangleMesh, side) -> TriangleMesh:
    """Map the normalization cube onto an image of `side` pixels.

    x -> (x + 1) / 2 * L; y and z -> (1 - (w + 1) / 2) * L.
    """
    if not side > 0:
        raise NonPositiveInput(f"image side must be positive, got {side}")
    if mesh.space is not Space.NORMALIZED:
        raise SpaceMismatch(f"to_pixel_space expects a NORMALIZED mesh, got {mesh.space.value}")
    v = mesh.vertices
    out = np.empty_like(v)
    out[:, 0] = (v[:, 0] + 1.0) / 2.0 * side
    out[:, 1:] = (1.0 - (v[:, 1:] + 1.0) / 2.0) * side
    return mesh.with_vertices(out, Space.PIXEL)


def ndc_to_pixel(ndc_xy, width, height):
    """Pixel (column, row) for NDC x, y, using the same map as the mesh."""
    ndc_xy = np.asarray(ndc_xy, dtype=np.float64)
    u = (ndc_xy[..., 0] + 1.0) / 2.0 * width
    v = (1.0 - (ndc_xy[..., 1] + 1.0) / 2.0) * height
    return np.stack([u, v], axis=-1)
