"""Metric scale recovery: mask statistics, depth sampling, the size ratio
R = D / f_x, metric volume and the end-to-end estimate."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import camera as cg
from .camera import CameraModel, ObjectPose, WidthRatio
from .errors import (
    EmptyMask,
    NonPositiveInput,
    NonSquareImage,
    NoValidDepth,
    NotWatertight,
    ScalecamError,
    ZeroTruth,
)
from .mesh import TriangleMesh, _fill_holes, analyze_manifold, raw_volume

ML_PER_M3 = 1e6
DEPTH_WINDOW = 7


@dataclass(frozen=True)
class MaskStats:
    width_px: int
    centroid_px: tuple
    area_px: int


@dataclass(frozen=True)
class ScaleEstimate:
    depth_m: float
    focal_px: float
    ratio: float


@dataclass(frozen=True, eq=False)
class FrameBundle:
    """One frame's inputs: binary mask (H, W), metric depth (H, W) and pose."""

    frame_id: int
    mask: np.ndarray
    depth: np.ndarray
    pose: ObjectPose


@dataclass
class VolumeReport:
    """Result of :func:`estimate_volume` with every intermediate scalar."""

    pixel_volume: float
    ratio: float
    metric_volume_ml: float
    frame_used: int
    warnings: list = field(default_factory=list)
    depth_m: float = float("nan")
    depth_sample: str = ""
    focal_px: float = float("nan")
    focal_source: str = ""
    width_ratio: float = float("nan")
    object_width_px: float = float("nan")
    image_width_px: float = float("nan")
    canvas_extent_x: float = float("nan")
    normalization_scale: float = float("nan")
    mask_centroid_px: tuple = ()
    mask_area_px: int = 0
    faces_added: int = 0
    raw_volume_sign: int = 1
    projection: str = ""

    def to_dict(self):
        d = asdict(self)
        d["mask_centroid_px"] = list(self.mask_centroid_px)
        d["warnings"] = list(self.warnings)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["mask_centroid_px"] = tuple(d.get("mask_centroid_px", ()))
        d["warnings"] = list(d.get("warnings", []))
        return cls(**d)


def mask_stats(mask) -> MaskStats:
    """Bounding-box width, pixel-center centroid (u, v) and area of a mask.

    Pixel (row r, column c) has its center at (c + 0.5, r + 0.5).
    """
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise EmptyMask("mask has no foreground pixels")
    width = int(cols.max() - cols.min() + 1)
    centroid = (float(cols.mean() + 0.5), float(rows.mean() + 0.5))
    return MaskStats(width, centroid, int(rows.size))


def _valid(values):
    return values[np.isfinite(values) & (values > 0)]


def _sample_depth(depth_map, at, mask):
    depth_map = np.asarray(depth_map)
    mask = np.asarray(mask, dtype=bool)
    if depth_map.shape != mask.shape:
        raise ValueError(f"depth {depth_map.shape} and mask {mask.shape} differ")
    h, w = mask.shape
    col = min(max(int(np.floor(at[0])), 0), w - 1)
    row = min(max(int(np.floor(at[1])), 0), h - 1)
    d = float(depth_map[row, col])
    if mask[row, col] and np.isfinite(d) and d > 0:
        return d, "nearest"
    half = DEPTH_WINDOW // 2
    r0, r1 = max(row - half, 0), min(row + half + 1, h)
    c0, c1 = max(col - half, 0), min(col + half + 1, w)
    window = _valid(depth_map[r0:r1, c0:c1][mask[r0:r1, c0:c1]])
    if window.size:
        return float(np.median(window)), "window"
    everything = _valid(depth_map[mask])
    if everything.size:
        return float(np.median(everything)), "global"
    raise NoValidDepth("no positive finite depth under the mask")


def sample_depth(depth_map, at, mask) -> float:
    """Depth at subpixel location `at` = (u, v), falling back to the median
    over foreground pixels of the 7x7 window, then of the whole mask, when the
    pixel under `at` is background or has no usable depth."""
    return _sample_depth(depth_map, at, mask)[0]


def size_ratio(depth_m, focal_px) -> ScaleEstimate:
    """Meters per pixel at the object's depth."""
    if not (depth_m > 0 and focal_px > 0):
        raise NonPositiveInput(f"need D > 0 and f_x > 0, got {depth_m}, {focal_px}")
    return ScaleEstimate(float(depth_m), float(focal_px), depth_m / focal_px)


def metric_volume(pixel_volume, scale) -> float:
    """Cubic-pixel volume to milliliters: V * R**3 * 1e6."""
    r = scale.ratio if isinstance(scale, ScaleEstimate) else float(scale)
    if pixel_volume < 0:
        raise NonPositiveInput(f"pixel volume must be >= 0, got {pixel_volume}")
    return pixel_volume * r ** 3 * ML_PER_M3


def absolute_percentage_error(estimate, truth) -> float:
    if truth == 0:
        raise ZeroTruth("truth must be non-zero")
    return abs(estimate - truth) / abs(truth) * 100.0


def resolve_frame(frames, scale_frame="last"):
    if not frames:
        raise ScalecamError("no frames given", stage="select-frame")
    if scale_frame == "last" or scale_frame is None:
        return frames[-1]
    for fr in frames:
        if fr.frame_id == int(scale_frame):
            return fr
    raise ScalecamError(f"scale frame {scale_frame} not among the frames",
                        stage="select-frame")


def estimate_volume(mesh: TriangleMesh, frames, cam: CameraModel,
                    scale_frame="last", focal_px=None,
                    projection="weak") -> VolumeReport:
    """Recover the metric volume of an up-to-scale reconstruction.

    The mesh is projected with the pose of the scale frame, normalized to the
    mask's width, mapped to pixel units, closed and measured; the pixel volume
    is then scaled by (D / f_x)**3 with D read from the depth map at the mask
    centroid.

    Parameters
    ----------
    mesh : TriangleMesh
        Reconstruction in arbitrary units (``Space.RECON``).
    frames : sequence of FrameBundle
    cam : CameraModel
        Intrinsics; the image must be square.
    scale_frame : int or "last"
    focal_px : float, optional
        Focal length estimated alongside the depth. Defaults to K[0, 0].
    projection : {"weak", "perspective"}
        Canvas projection passed to :func:`project_mesh`.

    Errors from every stage are re-raised with ``stage`` and ``frame_id``
    set.
    """
    frame = resolve_frame(frames, scale_frame)
    fid = frame.frame_id

    def stage(name, fn, *args):
        try:
            return fn(*args)
        except ScalecamError as exc:
            raise exc.with_context(stage=name, frame_id=fid)

    if not cam.is_square:
        raise NonSquareImage(f"images must be square, got {cam.width}x{cam.height}",
                             stage="ingest", frame_id=fid)
    if mesh.n_vertices == 0 or mesh.n_faces == 0:
        raise ScalecamError("mesh is empty", stage="ingest", frame_id=fid)
    if frame.mask.shape != (cam.height, cam.width):
        raise ScalecamError(
            f"mask shape {frame.mask.shape} does not match the {cam.width}x"
            f"{cam.height} camera", stage="ingest", frame_id=fid)

    side = cam.width
    stats = stage("mask", mask_stats, frame.mask)
    V = stage("view", cg.view_matrix, frame.pose)
    P = stage("projection", cg.projection_matrix, cam)
    canvas = stage("project", cg.project_mesh, mesh, V, P, projection)
    wr = stage("width-ratio", WidthRatio, stats.width_px, side)
    extent_x = float(canvas.extent()[0])
    s1 = stage("normalize", cg.normalization_scale, extent_x, wr.ratio)
    normalized = stage("normalize", cg.normalize_mesh, canvas, wr)
    pixel = stage("pixel", cg.to_pixel_space, normalized, side)
    closed, added, notes = stage("fill-holes", _fill_holes, pixel)

    def measure(m):
        report = analyze_manifold(m)
        if not report.is_watertight:
            raise NotWatertight(report.boundary_edge_count,
                                report.non_manifold_edge_count)
        return raw_volume(m.vertices, m.faces)

    raw = stage("volume", measure, closed)
    warnings = list(notes)
    if raw < 0:
        warnings.append("negative raw volume: faces are wound inward")
    pixel_volume = abs(raw)

    depth, how = stage("depth", _sample_depth, frame.depth, stats.centroid_px,
                       frame.mask)
    if focal_px is None:
        focal, source = cam.fx, "intrinsics"
    else:
        focal, source = float(focal_px), "manifest"
    scale = stage("size-ratio", size_ratio, depth, focal)
    ml = stage("metric", metric_volume, pixel_volume, scale)
    return VolumeReport(
        pixel_volume=pixel_volume,
        ratio=scale.ratio,
        metric_volume_ml=ml,
        frame_used=fid,
        warnings=warnings,
        depth_m=depth,
        depth_sample=how,
        focal_px=focal,
        focal_source=source,
        width_ratio=wr.ratio,
        object_width_px=float(stats.width_px),
        image_width_px=float(side),
        canvas_extent_x=extent_x,
        normalization_scale=s1,
        mask_centroid_px=stats.centroid_px,
        mask_area_px=stats.area_px,
        faces_added=added,
        raw_volume_sign=1 if raw >= 0 else -1,
        projection=projection,
    )
