"""Synthetic scenes with known volume, for checking the pipeline end to end.

A scene is an analytic shape spun in front of a pinhole camera. Each frame
gets a hard silhouette mask, a metric z-depth map and the pose a tracker would
report. The mesh handed to the pipeline is the ground-truth mesh in the first
frame's camera coordinates, multiplied by `recon_scale` so that nothing about
its size is metric.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, shapes
from .camera import CameraModel, ObjectPose, ndc_to_pixel, projection_matrix
from .errors import ObjectOutsideFrustum
from .mesh import TriangleMesh, raw_volume
from .obj import write_mesh
from .raster import rasterize_depth
from .scale import ML_PER_M3, FrameBundle

DEFAULT_RECON_SCALE = 2.37


@dataclass(frozen=True)
class Cube:
    side: float

    def mesh(self):
        return shapes.cube(self.side)


@dataclass(frozen=True)
class Sphere:
    radius: float
    subdivisions: int = 4

    def mesh(self):
        return shapes.icosphere(self.radius, self.subdivisions)


@dataclass(frozen=True)
class Superellipsoid:
    a: float
    b: float
    c: float
    r: float = 2.0
    t: float = 2.0
    resolution: int = 48

    def mesh(self, resolution=None):
        return shapes.superellipsoid(self.a, self.b, self.c, self.r, self.t,
                                     resolution or self.resolution)


def spin_trajectory(depth, frame_count, turns=1.0, axis=(0.0, 0.0, 1.0)):
    """Object-to-camera poses (meters): the object sits `depth` in front of
    the camera and turns about `axis` (camera frame, through its center)."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]],
                  [axis[2], 0, -axis[0]],
                  [-axis[1], axis[0], 0]])
    poses = []
    for i in range(frame_count):
        theta = 2 * np.pi * turns * i / frame_count
        rot = np.eye(3) + math.sin(theta) * k + (1 - math.cos(theta)) * k @ k
        poses.append(ObjectPose.from_rt(rot, [0.0, 0.0, -depth]))
    return poses


@dataclass
class SceneSpec:
    shape: object
    camera: CameraModel
    trajectory: list
    recon_scale: float = DEFAULT_RECON_SCALE
    holes: int = 0
    seed: int = 0

    @property
    def frame_count(self):
        return len(self.trajectory)

    @property
    def image_side(self):
        return self.camera.width

    @classmethod
    def simple(cls, shape, depth=0.5, frames=10, focal=500.0, image_side=512,
               recon_scale=DEFAULT_RECON_SCALE, holes=0, seed=0):
        cam = CameraModel.pinhole(focal, width=image_side)
        return cls(shape, cam, spin_trajectory(depth, frames), recon_scale,
                   holes, seed)


@dataclass
class SyntheticScene:
    spec: SceneSpec
    mesh: TriangleMesh
    frames: list
    ground_truth_ml: float
    mesh_volume_ml: float
    manifest_path: Path | None = None
    extras: dict = field(default_factory=dict)


def ground_truth_volume(shape, tol=1e-4, max_resolution=1024) -> float:
    """Volume in milliliters; closed form for cubes and spheres, otherwise the
    mesh volume at doubling resolutions until the relative change is < tol."""
    if isinstance(shape, Cube):
        return shape.side ** 3 * ML_PER_M3
    if isinstance(shape, Sphere):
        return 4.0 / 3.0 * math.pi * shape.radius ** 3 * ML_PER_M3
    if isinstance(shape, Superellipsoid):
        res = 16
        prev = raw_volume(*_vf(shape.mesh(res)))
        while res < max_resolution:
            res *= 2
            cur = raw_volume(*_vf(shape.mesh(res)))
            if abs(cur - prev) < tol * abs(cur):
                return cur * ML_PER_M3
            prev = cur
        return prev * ML_PER_M3
    raise TypeError(f"unknown shape {shape!r}")


def _vf(mesh):
    return mesh.vertices, mesh.faces


def _render(mesh_m, pose, cam, P):
    """Mask and z-depth of a metric mesh under an object-to-camera pose."""
    eye = mesh_m.vertices @ pose.rotation.T + pose.translation
    d = -eye[:, 2]
    if np.any(d <= cam.near) or np.any(d >= cam.far):
        raise ObjectOutsideFrustum(
            f"vertex depths span [{d.min():.4g}, {d.max():.4g}], outside "
            f"({cam.near}, {cam.far})")
    clip = np.hstack([eye, np.ones((len(eye), 1))]) @ P.T
    xy = ndc_to_pixel(clip[:, :2] / clip[:, 3:4], cam.width, cam.height)
    if (xy.min() < 0 or xy[:, 0].max() > cam.width
            or xy[:, 1].max() > cam.height):
        raise ObjectOutsideFrustum("object leaves the image")
    depth = rasterize_depth(xy, d, mesh_m.faces, (cam.height, cam.width))
    return depth > 0, depth.astype(np.float32)


def render_scene(spec: SceneSpec) -> SyntheticScene:
    """Build every frame in memory."""
    truth_mesh = spec.shape.mesh()
    cam = spec.camera
    P = projection_matrix(cam)
    s = spec.recon_scale

    first = spec.trajectory[0]
    frames = []
    for fid, pose in enumerate(spec.trajectory):
        mask, depth = _render(truth_mesh, pose, cam, P)
        # Tracker pose relative to frame 0, in reconstruction units: its
        # inverse carries the handed-over mesh into this frame's camera.
        rel = pose.matrix @ np.linalg.inv(first.matrix)
        view = rel.copy()
        view[:3, 3] *= s
        tracked = np.eye(4)
        tracked[:3, :3] = view[:3, :3].T
        tracked[:3, 3] = -view[:3, :3].T @ view[:3, 3]
        frames.append(FrameBundle(fid, mask, depth, ObjectPose(tracked)))

    recon = truth_mesh.transformed(first.matrix)
    recon = recon.with_vertices(recon.vertices * s)
    if spec.holes:
        recon = shapes.puncture_stars(recon, spec.holes,
                                      np.random.default_rng(spec.seed))
    gt = ground_truth_volume(spec.shape)
    mesh_ml = raw_volume(*_vf(truth_mesh)) * ML_PER_M3
    return SyntheticScene(spec, recon, frames, gt, mesh_ml)


def _shape_record(shape):
    d = {"kind": type(shape).__name__.lower()}
    d.update(shape.__dict__)
    return d


def generate_scene(spec: SceneSpec, out_dir) -> SyntheticScene:
    """Render a scene and write it as a bundle readable by
    :func:`scalecam.io.load_manifest`.

    Layout::

        manifest.json  intrinsics.txt  mesh.obj  ground_truth.json
        frames/NNNNNN_mask.pgm  frames/NNNNNN_depth.pfm  frames/NNNNNN_pose.txt
    """
    scene = render_scene(spec)
    out = Path(out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    cam = spec.camera
    # Clip planes stay at their defaults: the pipeline works in
    # reconstruction units, not the metric units used for rendering.
    io.write_intrinsics(cam, out / "intrinsics.txt", with_clip=False)
    write_mesh(scene.mesh, out / "mesh.obj")
    entries = []
    for fr in scene.frames:
        stem = out / "frames" / f"{fr.frame_id:06d}"
        paths = [Path(f"{stem}_mask.pgm"), Path(f"{stem}_depth.pfm"),
                 Path(f"{stem}_pose.txt")]
        io.write_mask(fr.mask, paths[0])
        io.write_depth(fr.depth, paths[1])
        io.write_pose(fr.pose, paths[2])
        entries.append(io.FrameEntry(fr.frame_id, *paths))
    manifest = io.SceneManifest(
        version=io.MANIFEST_VERSION,
        intrinsics_path=out / "intrinsics.txt",
        mesh_path=out / "mesh.obj",
        frames=entries,
        scale_frame=entries[-1].frame_id,
        estimated_focal_px=cam.fx,
        root=out,
    )
    io.write_manifest(manifest, out / "manifest.json")
    record = {
        "shape": _shape_record(spec.shape),
        "volume_ml": scene.ground_truth_ml,
        "mesh_volume_ml": scene.mesh_volume_ml,
        "recon_scale": spec.recon_scale,
        "frame_count": spec.frame_count,
        "image_side": spec.image_side,
        "focal_px": cam.fx,
        "holes": spec.holes,
        "seed": spec.seed,
    }
    (out / "ground_truth.json").write_text(
        json.dumps(record, sort_keys=True, indent=2) + "\n")
    scene.manifest_path = out / "manifest.json"
    return scene
