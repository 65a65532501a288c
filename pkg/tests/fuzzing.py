"""Byte-level corruption of canonical files and checks on what readers accept."""
import json
import re
import warnings

import numpy as np
from scipy.spatial.transform import Rotation

from scalecam import io, shapes
from scalecam.camera import CameraModel, ObjectPose
from scalecam.errors import ScalecamError
from scalecam.obj import format_obj, parse_obj, parse_obj_bytes
from scalecam.scale import VolumeReport

_INTERESTING = b" \n\t-+.0123456789eE#/nNaifPF\x00\xff"


def mutate(data, rng):
    data = bytearray(data)
    op = rng.integers(7)
    pos = int(rng.integers(len(data))) if data else 0
    if op == 0 and data:
        data[pos] ^= 1 << int(rng.integers(8))
    elif op == 1 and data:
        data[pos] = int(rng.integers(256))
    elif op == 2 and data:
        data[pos] = _INTERESTING[int(rng.integers(len(_INTERESTING)))]
    elif op == 3:
        del data[pos:pos + int(rng.integers(1, 5))]
    elif op == 4:
        data[pos:pos] = bytes(rng.integers(0, 256, int(rng.integers(1, 4)), dtype=np.uint8))
    elif op == 5:
        del data[pos:]
    else:
        n = int(rng.integers(1, 8))
        data[pos:pos] = data[pos:pos + n]
    return bytes(data)


# ---- canonical samples ----------------------------------------------------

def canonical_samples(root):
    """Canonical bytes per format; writes a small bundle under `root` so
    manifest paths resolve."""
    rng = np.random.default_rng(0)
    mask = rng.random((6, 8)) < 0.5
    depth = np.where(mask, rng.uniform(0.3, 0.9, mask.shape), 0).astype(np.float32)
    pose = ObjectPose.from_rt(Rotation.random(random_state=rng).as_matrix(), [0.1, -0.2, -1.5])
    cam = CameraModel.pinhole(500.5, 499.25, 4.1, 3.2, 8, 6, 0.01, 20.0)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    io.write_intrinsics(cam, root / "intrinsics.txt")
    (root / "mesh.obj").write_text(format_obj(shapes.cube(0.3)))
    entries = []
    for fid in (0, 1):
        paths = [root / "frames" / f"{fid}_{k}" for k in ("mask.pgm", "depth.pfm", "pose.txt")]
        io.write_mask(mask, paths[0])
        io.write_depth(depth, paths[1])
        io.write_pose(pose, paths[2])
        entries.append(io.FrameEntry(fid, *paths))
    manifest = io.SceneManifest(1, root / "intrinsics.txt", root / "mesh.obj", entries, 1,
                                estimated_focal_px=500.0, root=root)
    report = VolumeReport(pixel_volume=12345.678, ratio=0.0009, metric_volume_ml=9.0,
                          frame_used=1, warnings=["w"], depth_m=0.45, depth_sample="nearest",
                          focal_px=500.0, focal_source="manifest", mask_centroid_px=(4.0, 3.5),
                          mask_area_px=24, projection="weak")
    return {
        "obj": format_obj(shapes.cube(0.3)).encode("ascii"),
        "pgm": io.format_pgm(mask),
        "pfm": io.format_pfm(depth),
        "pose": io.format_pose(pose),
        "intrinsics": io.format_intrinsics(cam),
        "manifest": io.format_manifest(manifest),
        "report": io.format_report(report),
    }


# ---- readers and acceptance checks ----------------------------------------

def _check_obj(data, mesh):
    again = parse_obj(format_obj(mesh))
    assert again.vertices.tobytes() == mesh.vertices.tobytes()
    assert np.array_equal(again.faces, mesh.faces)


def _check_pgm(data, mask):
    # Payload is the last H*W bytes; nonzero bytes are foreground.
    h, w = mask.shape
    payload = np.frombuffer(data[len(data) - h * w:], np.uint8).reshape(h, w)
    assert np.array_equal(mask, payload != 0)


_PFM_SCALE = re.compile(rb"\A\s*Pf\s+\d+\s+\d+\s+(\S+)")


def _check_pfm(data, depth):
    h, w = depth.shape
    scale = float(_PFM_SCALE.match(data).group(1))
    dtype = "<f4" if scale < 0 else ">f4"
    raw = np.frombuffer(data[len(data) - 4 * h * w:], dtype).reshape(h, w)[::-1]
    assert raw.astype(np.float32).view(np.uint32).tobytes() == depth.view(np.uint32).tobytes()


def _check_pose(data, pose):
    assert io.parse_pose(io.format_pose(pose)).matrix.tobytes() == pose.matrix.tobytes()


def _check_intrinsics(data, cam):
    back = io.parse_intrinsics(io.format_intrinsics(cam))
    assert back.K.tobytes() == cam.K.tobytes()
    assert (back.width, back.height, back.near, back.far) == (cam.width, cam.height,
                                                              cam.near, cam.far)


def _check_manifest(root):
    def check(data, m):
        assert all(p.is_file() for f in m.frames for p in (f.mask_path, f.depth_path, f.pose_path))
        ids = [f.frame_id for f in m.frames]
        assert ids == sorted(set(ids)) and m.scale_frame in ids
        again = io.parse_manifest(io.format_manifest(m), root)
        assert io.format_manifest(again) == io.format_manifest(m)
    return check


def _check_report(data, rep):
    doc = json.loads(data)
    assert set(doc) <= set(VolumeReport.__dataclass_fields__)
    again = io.parse_report(io.format_report(rep))
    assert io.format_report(again) == io.format_report(rep)


def readers(root):
    return {
        "obj": (parse_obj_bytes, _check_obj),
        "pgm": (io.parse_pgm, _check_pgm),
        "pfm": (io.parse_pfm, _check_pfm),
        "pose": (io.parse_pose, _check_pose),
        "intrinsics": (io.parse_intrinsics, _check_intrinsics),
        "manifest": (lambda d: io.parse_manifest(d, root), _check_manifest(root)),
        "report": (io.parse_report, _check_report),
    }


def fuzz(root, iterations, seed=0):
    """Corrupt canonical files `iterations` times in total.

    Returns per-format counts of (rejected, accepted). Raises AssertionError
    on a non-structured exception or on an accepted file that fails its check.
    """
    samples = canonical_samples(root)
    table = readers(root)
    rng = np.random.default_rng(seed)
    names = sorted(samples)
    counts = {n: [0, 0] for n in names}
    for i in range(iterations):
        name = names[i % len(names)]
        data = samples[name]
        for _ in range(int(rng.integers(1, 4))):
            data = mutate(data, rng)
        parse, check = table[name]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                value = parse(data)
            except ScalecamError:
                counts[name][0] += 1
                continue
            except Exception as exc:  # pragma: no cover - reported as failure
                raise AssertionError(f"{name} reader crashed on {data!r}: {exc!r}") from exc
        try:
            check(data, value)
        except Exception as exc:
            raise AssertionError(f"{name} silently accepted {data!r}") from exc
        counts[name][1] += 1
    return counts


