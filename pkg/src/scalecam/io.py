"""Readers and writers for the on-disk scene bundle.

==============  ===========================================================
file            format
==============  ===========================================================
manifest        JSON, explicit integer ``version``; paths relative to it
intrinsics      text: 16 numbers (row-major 4x4 K), then W H, optional n f
pose            text: 16 numbers, row-major 4x4 rigid transform
mask            binary PGM (P5), 8-bit, nonzero is foreground
depth           PFM (``Pf``), single channel float32, meters
report          JSON, sorted keys, shortest round-trip float repr
==============  ===========================================================

Each ``read_*`` has a ``parse_*`` counterpart working on bytes, and each
``write_*`` a ``format_*`` counterpart returning bytes.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._text import parse_float, parse_uint
from .camera import DEFAULT_FAR, DEFAULT_NEAR, CameraModel, ObjectPose
from .errors import (
    DanglingPath,
    DimensionMismatch,
    IoFailure,
    MalformedHeader,
    ManifestError,
    MissingField,
    NonPositiveDimension,
    NonRigidPose,
    RigidityViolation,
    ScalecamError,
    VersionUnsupported,
    WrongCount,
)
from .scale import FrameBundle, VolumeReport

MANIFEST_VERSION = 1


def _read_bytes(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None


def _write_bytes(path, data):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None


def _ascii(data, err, what):
    try:
        return data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise err(f"{what}: non-ASCII byte at offset {exc.start}") from None


def _numbers(text, err, what):
    values = []
    for token in text.split():
        x = parse_float(token)
        if x is None or not math.isfinite(x):
            raise err(f"{what}: bad number {token!r}")
        values.append(x)
    return values


def _fmt_row(row):
    return " ".join("%.17g" % x for x in row)


# --- pose -----------------------------------------------------------------

def parse_pose(data: bytes) -> ObjectPose:
    values = _numbers(_ascii(data, WrongCount, "pose"), WrongCount, "pose")
    if len(values) != 16:
        raise WrongCount(f"pose needs 16 numbers, got {len(values)}")
    m = np.array(values).reshape(4, 4)
    try:
        return ObjectPose(m)
    except NonRigidPose as exc:
        raise RigidityViolation(exc.message) from None


def format_pose(pose: ObjectPose) -> bytes:
    return ("\n".join(_fmt_row(r) for r in pose.matrix) + "\n").encode("ascii")


def read_pose(path) -> ObjectPose:
    return parse_pose(_read_bytes(path))


def write_pose(pose, path):
    _write_bytes(path, format_pose(pose))


# --- intrinsics ------------------------------------------------------------

def parse_intrinsics(data: bytes) -> CameraModel:
    values = _numbers(_ascii(data, WrongCount, "intrinsics"), WrongCount, "intrinsics")
    if len(values) not in (18, 20):
        raise WrongCount(f"intrinsics need 18 or 20 numbers, got {len(values)}")
    K = np.array(values[:16]).reshape(4, 4)
    w, h = values[16], values[17]
    if not (w > 0 and h > 0):
        raise NonPositiveDimension(f"image size must be positive, got {w} x {h}")
    if w != int(w) or h != int(h):
        raise WrongCount(f"image size must be integral, got {w} x {h}")
    near, far = (values[18], values[19]) if len(values) == 20 else (DEFAULT_NEAR, DEFAULT_FAR)
    return CameraModel(K, int(w), int(h), near, far)


def format_intrinsics(cam: CameraModel, with_clip=True) -> bytes:
    lines = [_fmt_row(r) for r in cam.K]
    lines.append("%d %d" % (cam.width, cam.height))
    if with_clip:
        lines.append(_fmt_row((cam.near, cam.far)))
    return ("\n".join(lines) + "\n").encode("ascii")


def read_intrinsics(path) -> CameraModel:
    return parse_intrinsics(_read_bytes(path))


def write_intrinsics(cam, path, with_clip=True):
    _write_bytes(path, format_intrinsics(cam, with_clip))


# --- PGM mask ----------------------------------------------------------------

_PNM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*([^\s#]+)")


def _pnm_header(data, n_fields, err):
    """Split `n_fields` whitespace/comment separated header tokens. Returns
    (tokens, payload offset); exactly one whitespace byte ends the header."""
    pos, tokens = 0, []
    for _ in range(n_fields):
        m = _PNM_TOKEN.match(data, pos)
        if m is None:
            raise err("truncated header")
        tokens.append(m.group(1))
        pos = m.end()
    if pos >= len(data) or data[pos:pos + 1] not in b" \t\n\r":
        raise err("header must end with a single whitespace byte")
    return tokens, pos + 1


def _check_shape(shape, expected, what):
    if expected is not None and tuple(shape) != tuple(expected):
        raise DimensionMismatch(
            f"{what} is {shape[1]}x{shape[0]}, expected {expected[1]}x{expected[0]}")


def parse_pgm(data: bytes, expected_shape=None) -> np.ndarray:
    """Decode a binary 8-bit PGM; returns a bool mask of shape (H, W)."""
    tokens, start = _pnm_header(data, 4, MalformedHeader)
    if tokens[0] != b"P5":
        raise MalformedHeader(f"not a binary PGM (magic {tokens[0]!r})")
    dims = [parse_uint(t.decode("ascii", "replace")) for t in tokens[1:]]
    if None in dims:
        raise MalformedHeader(f"bad PGM header fields {tokens[1:]!r}")
    w, h, maxval = dims
    if w <= 0 or h <= 0:
        raise MalformedHeader(f"PGM size must be positive, got {w} x {h}")
    if not 0 < maxval < 256:
        raise MalformedHeader(f"only 8-bit PGM is supported (maxval {maxval})")
    payload = data[start:]
    if len(payload) != w * h:
        raise MalformedHeader(f"PGM payload is {len(payload)} bytes, expected {w * h}")
    img = np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
    _check_shape(img.shape, expected_shape, "mask")
    return img != 0


def format_pgm(mask) -> bytes:
    mask = np.asarray(mask)
    h, w = mask.shape
    body = np.where(mask != 0, 255, 0).astype(np.uint8).tobytes()
    return b"P5\n%d %d\n255\n" % (w, h) + body


def read_mask(path, expected_shape=None) -> np.ndarray:
    return parse_pgm(_read_bytes(path), expected_shape)


def write_mask(mask, path):
    _write_bytes(path, format_pgm(mask))


# --- PFM depth -----------------------------------------------------------------

def parse_pfm(data: bytes, expected_shape=None) -> np.ndarray:
    """Decode a single-channel PFM into a float32 (H, W) array, top row
    first. A negative scale means little-endian samples, positive means
    big-endian; the magnitude is ignored."""
    tokens, start = _pnm_header(data, 4, MalformedHeader)
    if tokens[0] != b"Pf":
        raise MalformedHeader(f"not a single-channel PFM (magic {tokens[0]!r})")
    text = [t.decode("ascii", "replace") for t in tokens[1:]]
    w, h = parse_uint(text[0]), parse_uint(text[1])
    scale = parse_float(text[2])
    if w is None or h is None or scale is None:
        raise MalformedHeader(f"bad PFM header fields {text!r}")
    if w <= 0 or h <= 0:
        raise MalformedHeader(f"PFM size must be positive, got {w} x {h}")
    if scale == 0 or not math.isfinite(scale):
        raise MalformedHeader("PFM scale must be non-zero and finite")
    little = scale < 0
    payload = data[start:]
    if len(payload) != 4 * w * h:
        raise MalformedHeader(
            f"PFM payload is {len(payload)} bytes, expected {4 * w * h}")
    img = np.frombuffer(payload, dtype="<f4" if little else ">f4").reshape(h, w)
    _check_shape(img.shape, expected_shape, "depth")
    # Rows are stored bottom to top.
    return np.ascontiguousarray(img[::-1]).astype(np.float32)


def format_pfm(depth) -> bytes:
    depth = np.asarray(depth, dtype=np.float32)
    h, w = depth.shape
    body = np.ascontiguousarray(depth[::-1]).astype("<f4").tobytes()
    return b"Pf\n%d %d\n-1\n" % (w, h) + body


def read_depth(path, expected_shape=None) -> np.ndarray:
    return parse_pfm(_read_bytes(path), expected_shape)


def write_depth(depth, path):
    _write_bytes(path, format_pfm(depth))


# --- manifest ------------------------------------------------------------------

@dataclass(frozen=True)
class FrameEntry:
    frame_id: int
    mask_path: Path
    depth_path: Path
    pose_path: Path


@dataclass
class SceneManifest:
    """Validated scene manifest with absolute paths and a resolved scale frame."""

    version: int
    intrinsics_path: Path
    mesh_path: Path
    frames: list
    scale_frame: int
    estimated_focal_px: float | None = None
    clip_near: float | None = None
    clip_far: float | None = None
    root: Path = field(default_factory=Path)


def _field(doc, name, where="manifest"):
    if not isinstance(doc, dict) or name not in doc:
        raise MissingField(name if where == "manifest" else f"{where}.{name}")
    return doc[name]


def _path(root, value, name, check=True):
    if not isinstance(value, str) or not value:
        raise ManifestError(f"{name} must be a non-empty string path")
    p = root / value
    if check and not p.is_file():
        raise DanglingPath(str(p))
    return p


def _positive_number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)) \
            or not math.isfinite(value) or value <= 0:
        raise ManifestError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def parse_manifest(data: bytes, root=".", check_paths=True) -> SceneManifest:
    root = Path(root)
    try:
        doc = json.loads(_ascii(data, ManifestError, "manifest"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"invalid JSON: {exc}") from None
    except RecursionError:
        raise ManifestError("invalid JSON: nesting too deep") from None
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    version = _field(doc, "version")
    if isinstance(version, bool) or not isinstance(version, int):
        raise ManifestError(f"version must be an integer, got {version!r}")
    if version != MANIFEST_VERSION:
        raise VersionUnsupported(f"manifest version {version} is not supported")
    intrinsics = _path(root, _field(doc, "intrinsics_path"), "intrinsics_path", check_paths)
    mesh = _path(root, _field(doc, "mesh_path"), "mesh_path", check_paths)
    raw_frames = _field(doc, "frames")
    if not isinstance(raw_frames, list) or not raw_frames:
        raise ManifestError("frames must be a non-empty list")
    frames = []
    for i, fr in enumerate(raw_frames):
        where = f"frames[{i}]"
        if not isinstance(fr, dict):
            raise ManifestError(f"{where} must be an object")
        fid = _field(fr, "frame_id", where)
        if isinstance(fid, bool) or not isinstance(fid, int) or fid < 0:
            raise ManifestError(f"{where}.frame_id must be a non-negative integer")
        frames.append(FrameEntry(
            fid,
            _path(root, _field(fr, "mask_path", where), f"{where}.mask_path", check_paths),
            _path(root, _field(fr, "depth_path", where), f"{where}.depth_path", check_paths),
            _path(root, _field(fr, "pose_path", where), f"{where}.pose_path", check_paths),
        ))
    ids = [f.frame_id for f in frames]
    bad = [(a, b) for a, b in zip(ids, ids[1:]) if b <= a]
    if bad:
        raise ManifestError(
            "frame ids must be strictly increasing; offending pairs: "
            + ", ".join(f"{a} -> {b}" for a, b in bad))
    sf = doc.get("scale_frame", "last")
    if sf == "last":
        scale_frame = ids[-1]
    elif isinstance(sf, int) and not isinstance(sf, bool) and sf in ids:
        scale_frame = sf
    else:
        raise ManifestError(f"scale_frame {sf!r} is neither 'last' nor a listed frame id")
    optional = {}
    for name in ("estimated_focal_px", "clip_near", "clip_far"):
        value = doc.get(name)
        optional[name] = None if value is None else _positive_number(value, name)
    if (optional["clip_near"] is None) != (optional["clip_far"] is None):
        raise ManifestError("clip_near and clip_far must be given together")
    if optional["clip_near"] is not None and not optional["clip_near"] < optional["clip_far"]:
        raise ManifestError("clip_near must be smaller than clip_far")
    return SceneManifest(version, intrinsics, mesh, frames, scale_frame,
                         root=root, **optional)


def _rel(path, root):
    return Path(os.path.relpath(path, root)).as_posix()


def manifest_to_dict(m: SceneManifest) -> dict:
    doc = {
        "version": m.version,
        "intrinsics_path": _rel(m.intrinsics_path, m.root),
        "mesh_path": _rel(m.mesh_path, m.root),
        "frames": [
            {"frame_id": f.frame_id,
             "mask_path": _rel(f.mask_path, m.root),
             "depth_path": _rel(f.depth_path, m.root),
             "pose_path": _rel(f.pose_path, m.root)}
            for f in m.frames
        ],
        "scale_frame": m.scale_frame,
    }
    for name in ("estimated_focal_px", "clip_near", "clip_far"):
        if getattr(m, name) is not None:
            doc[name] = getattr(m, name)
    return doc


def _dump_json(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("ascii")


def format_manifest(m: SceneManifest) -> bytes:
    return _dump_json(manifest_to_dict(m))


def load_manifest(path) -> SceneManifest:
    """Read and fully validate a manifest; "last" is resolved to a frame id."""
    path = Path(path)
    try:
        return parse_manifest(_read_bytes(path), root=path.parent)
    except ScalecamError as exc:
        raise exc.with_context(stage="manifest")


def write_manifest(m: SceneManifest, path):
    _write_bytes(path, format_manifest(m))


def load_camera(m: SceneManifest) -> CameraModel:
    cam = read_intrinsics(m.intrinsics_path)
    if m.clip_near is not None:
        cam = CameraModel(cam.K, cam.width, cam.height, m.clip_near, m.clip_far)
    return cam


def load_frames(m: SceneManifest, cam: CameraModel) -> list:
    """Read every frame's mask, depth and pose, checking sizes against `cam`."""
    shape = (cam.height, cam.width)
    frames = []
    for entry in m.frames:
        try:
            frames.append(FrameBundle(
                entry.frame_id,
                read_mask(entry.mask_path, shape),
                read_depth(entry.depth_path, shape),
                read_pose(entry.pose_path),
            ))
        except ScalecamError as exc:
            raise exc.with_context(stage="load", frame_id=entry.frame_id)
    return frames


# --- report --------------------------------------------------------------------

def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


_REPORT_TYPES = {
    "pixel_volume": "float", "ratio": "float", "metric_volume_ml": "float",
    "frame_used": "int", "warnings": "strs", "depth_m": "float",
    "depth_sample": "str", "focal_px": "float", "focal_source": "str",
    "width_ratio": "float", "object_width_px": "float",
    "image_width_px": "float", "canvas_extent_x": "float",
    "normalization_scale": "float", "mask_centroid_px": "floats",
    "mask_area_px": "int", "faces_added": "int", "raw_volume_sign": "int",
    "projection": "str",
}


def format_report(report: VolumeReport) -> bytes:
    return _dump_json(_json_safe(report.to_dict()))


def parse_report(data: bytes) -> VolumeReport:
    try:
        doc = json.loads(_ascii(data, IoFailure, "report"))
    except (json.JSONDecodeError, RecursionError) as exc:
        raise IoFailure(f"invalid report JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise IoFailure("report must be a JSON object")
    known = set(_REPORT_TYPES)
    for name in ("pixel_volume", "ratio", "metric_volume_ml", "frame_used"):
        if name not in doc:
            raise MissingField(name)
    unknown = set(doc) - known
    if unknown:
        raise IoFailure(f"unknown report fields: {sorted(unknown)}")
    out = {}
    for name, value in doc.items():
        kind = _REPORT_TYPES[name]
        if kind == "float":
            if value is None:
                value = float("nan")
            elif isinstance(value, bool) or not isinstance(value, (int, float)):
                raise IoFailure(f"report field {name} must be a number")
            value = float(value)
        elif kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise IoFailure(f"report field {name} must be an integer")
        elif kind == "str":
            if not isinstance(value, str):
                raise IoFailure(f"report field {name} must be a string")
        elif kind == "strs":
            if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
                raise IoFailure(f"report field {name} must be a list of strings")
        elif kind == "floats":
            if not isinstance(value, list) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                raise IoFailure(f"report field {name} must be a list of numbers")
            value = [float(v) for v in value]
        out[name] = value
    return VolumeReport.from_dict(out)


def write_report(report: VolumeReport, path):
    _write_bytes(path, format_report(report))


def read_report(path) -> VolumeReport:
    return parse_report(_read_bytes(path))
