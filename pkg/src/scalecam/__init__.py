"""Metric volume of a hand-held object from an up-to-scale reconstruction.

The reconstruction is projected into the scale frame's image, normalized to
the object's pixel width, and converted to metric units with the ratio of the
object's depth to the focal length.
"""

from .camera import (
    CameraModel,
    ObjectPose,
    WidthRatio,
    normalize_mesh,
    project_mesh,
    projection_matrix,
    to_pixel_space,
    view_matrix,
)
from .errors import ScalecamError
from .io import (
    load_manifest,
    read_depth,
    read_intrinsics,
    read_mask,
    read_pose,
    read_report,
    write_report,
)
from .mesh import EdgeManifoldReport, Space, TriangleMesh, analyze_manifold, fill_holes, signed_volume
from .obj import read_mesh, write_mesh
from .scale import (
    FrameBundle,
    MaskStats,
    ScaleEstimate,
    VolumeReport,
    absolute_percentage_error,
    estimate_volume,
    mask_stats,
    metric_volume,
    sample_depth,
    size_ratio,
)
from .synth import SceneSpec, generate_scene, ground_truth_volume

__version__ = "0.1.0"

__all__ = [
    "CameraModel",
    "EdgeManifoldReport",
    "FrameBundle",
    "MaskStats",
    "ObjectPose",
    "ScaleEstimate",
    "ScalecamError",
    "SceneSpec",
    "Space",
    "TriangleMesh",
    "VolumeReport",
    "WidthRatio",
    "absolute_percentage_error",
    "analyze_manifold",
    "estimate_volume",
    "fill_holes",
    "generate_scene",
    "ground_truth_volume",
    "load_manifest",
    "mask_stats",
    "metric_volume",
    "normalize_mesh",
    "project_mesh",
    "projection_matrix",
    "read_depth",
    "read_intrinsics",
    "read_mask",
    "read_mesh",
    "read_pose",
    "read_report",
    "sample_depth",
    "signed_volume",
    "size_ratio",
    "to_pixel_space",
    "view_matrix",
    "write_mesh",
    "write_report",
]
