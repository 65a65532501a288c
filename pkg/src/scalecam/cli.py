"""Command-line front end.

Exit codes: 0 success, 1 pipeline error, 2 usage error. Machine-readable
output always goes to a file; stdout carries one human-readable line.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

from . import io
from .errors import ScalecamError
from .mesh import Space, fill_holes, signed_volume
from .obj import read_mesh, write_mesh
from .scale import absolute_percentage_error, estimate_volume, metric_volume
from .synth import DEFAULT_RECON_SCALE, Cube, SceneSpec, Sphere, Superellipsoid, generate_scene

log = logging.getLogger("scalecam")


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _count(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return value


def _nonnegative(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return value


def _frame(text):
    if text == "last":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"frame id or 'last': {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(
        prog="scalecam",
        description="Metric volume of a tracked object from an up-to-scale mesh.")
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="more logging (also SCALECAM_LOG=DEBUG|INFO|WARNING)")
    sub = p.add_subparsers(dest="command", metavar="command", required=True)

    e = sub.add_parser("estimate", help="run the full pipeline on a scene manifest")
    e.add_argument("manifest", help="scene manifest (JSON)")
    e.add_argument("--scale-frame", type=_frame, default=None,
                   help="frame id used for depth and width, or 'last' "
                        "(default: the manifest's choice)")
    e.add_argument("--focal-source", choices=["manifest", "intrinsics"], default=None,
                   help="where f_x comes from (default: manifest if it has "
                        "estimated_focal_px, else intrinsics)")
    e.add_argument("--projection", choices=["weak", "perspective"], default="weak",
                   help="canvas projection mode (default: weak)")
    e.add_argument("--out", default="report.json", help="report path (default: report.json)")

    s = sub.add_parser("synth", help="generate a synthetic scene bundle")
    s.add_argument("out_dir")
    s.add_argument("--shape", choices=["cube", "sphere", "superellipsoid"], default="cube")
    s.add_argument("--size", type=_positive, default=0.1,
                   help="cube side or sphere radius in meters (default: 0.1)")
    s.add_argument("--axes", type=_positive, nargs=3, metavar=("A", "B", "C"),
                   default=(0.05, 0.04, 0.03), help="superellipsoid semi-axes (m)")
    s.add_argument("--exponents", type=_positive, nargs=2, metavar=("R", "T"),
                   default=(2.0, 2.0), help="superellipsoid exponents")
    s.add_argument("--subdivisions", type=_count, default=4, help="icosphere subdivisions")
    s.add_argument("--depth", type=_positive, default=0.5,
                   help="distance of the object center from the camera (m)")
    s.add_argument("--frames", type=_count, default=10)
    s.add_argument("--focal", type=_positive, default=500.0, help="f_x = f_y in pixels")
    s.add_argument("--image-side", type=_count, default=512)
    s.add_argument("--recon-scale", type=_positive, default=DEFAULT_RECON_SCALE,
                   help="scale applied to the handed-over mesh")
    s.add_argument("--holes", type=_nonnegative, default=0,
                   help="holes punched into the handed-over mesh")
    s.add_argument("--seed", type=int, default=0, help="seed for hole placement")

    r = sub.add_parser("repair", help="fill the holes of an OBJ mesh")
    r.add_argument("mesh_in")
    r.add_argument("mesh_out")

    v = sub.add_parser("volume", help="enclosed volume of a watertight OBJ mesh")
    v.add_argument("mesh_in")
    v.add_argument("--ratio", type=_positive, default=None,
                   help="meters per mesh unit; prints milliliters when given")

    er = sub.add_parser("error", help="absolute percentage error")
    er.add_argument("--estimate", type=float, required=True)
    er.add_argument("--truth", type=float, required=True)
    return p


def _setup_logging(verbose):
    level = os.environ.get("SCALECAM_LOG", "").upper()
    if verbose:
        level = "DEBUG" if verbose > 1 else "INFO"
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_estimate(args):
    manifest = io.load_manifest(args.manifest)
    cam = io.load_camera(manifest)
    mesh = read_mesh(manifest.mesh_path, Space.RECON)
    frames = io.load_frames(manifest, cam)
    source = args.focal_source
    if source is None:
        source = "manifest" if manifest.estimated_focal_px is not None else "intrinsics"
    if source == "manifest" and manifest.estimated_focal_px is None:
        raise ScalecamError("manifest has no estimated_focal_px", stage="focal")
    focal = manifest.estimated_focal_px if source == "manifest" else None
    scale_frame = manifest.scale_frame if args.scale_frame is None else args.scale_frame
    report = estimate_volume(mesh, frames, cam, scale_frame, focal_px=focal,
                             projection=args.projection)
    for w in report.warnings:
        log.warning(w)
    io.write_report(report, args.out)
    print(f"volume: {report.metric_volume_ml!r} mL "
          f"(frame {report.frame_used}, R={report.ratio!r})")


def cmd_synth(args):
    if args.shape == "cube":
        shape = Cube(args.size)
    elif args.shape == "sphere":
        shape = Sphere(args.size, args.subdivisions)
    else:
        shape = Superellipsoid(*args.axes, *args.exponents)
    spec = SceneSpec.simple(shape, depth=args.depth, frames=args.frames,
                            focal=args.focal, image_side=args.image_side,
                            recon_scale=args.recon_scale, holes=args.holes,
                            seed=args.seed)
    scene = generate_scene(spec, args.out_dir)
    print(f"scene: {scene.manifest_path} ground_truth: {scene.ground_truth_ml!r} mL")


def cmd_repair(args):
    mesh = read_mesh(args.mesh_in)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = fill_holes(mesh)
    for w in caught:
        log.warning(str(w.message))
    write_mesh(out, args.mesh_out)
    print(f"faces added: {out.n_faces - mesh.n_faces}")


def cmd_volume(args):
    mesh = read_mesh(args.mesh_in)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        vol = signed_volume(mesh)
    for w in caught:
        log.warning(str(w.message))
    if args.ratio is None:
        print(f"volume: {vol!r}")
    else:
        print(f"volume: {metric_volume(vol, args.ratio)!r} mL")


def cmd_error(args):
    print(f"{absolute_percentage_error(args.estimate, args.truth):.2f}")


COMMANDS = {
    "estimate": cmd_estimate,
    "synth": cmd_synth,
    "repair": cmd_repair,
    "volume": cmd_volume,
    "error": cmd_error,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    _setup_logging(args.verbose)
    try:
        COMMANDS[args.command](args)
    except ScalecamError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
