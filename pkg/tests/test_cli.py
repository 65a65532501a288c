import argparse
import json
import re
import subprocess
import sys

import pytest

from scalecam import io, shapes
from scalecam.cli import build_parser, main
from scalecam.obj import write_mesh


@pytest.fixture(scope="module")
def cube_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cube")
    assert main(["synth", str(out), "--shape", "cube", "--size", "0.1", "--frames", "4"]) == 0
    return out


def subparsers():
    parser = build_parser()
    action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    return parser, action.choices


def test_help_lists_every_flag(capsys):
    parser, subs = subparsers()
    for name, sub in [("", parser)] + sorted(subs.items()):
        argv = [name, "--help"] if name else ["--help"]
        assert main(argv) == 0
        text = capsys.readouterr().out
        for action in sub._actions:
            for opt in action.option_strings:
                assert opt in text, (name, opt)
        if name:
            assert name in parser.format_help()


def test_error_command(capsys):
    assert main(["error", "--estimate", "345", "--truth", "371"]) == 0
    assert capsys.readouterr().out == "7.01\n"


def test_error_zero_truth(capsys):
    assert main(["error", "--estimate", "1", "--truth", "0"]) == 1
    assert "ZeroTruth" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["error", "--estimate", "1"], ["error", "--estimate", "x", "--truth", "1"],
    ["estimate"], ["estimate", "m.json", "--bogus"], ["estimate", "m.json", "--projection", "ortho"],
    ["synth", "d", "--frames", "0"], ["synth", "d", "--size", "-1"], ["synth", "d", "--shape", "torus"],
    ["volume", "a.obj", "--ratio", "0"], ["repair", "only_one.obj"],
    ["estimate", "m.json", "--scale-frame", "first"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "usage:" in capsys.readouterr().err


def test_synth_truths(tmp_path, capsys):
    assert main(["synth", str(tmp_path / "s"), "--shape", "sphere", "--size", "0.05",
                 "--depth", "0.5", "--frames", "2"]) == 0
    rec = json.loads((tmp_path / "s" / "ground_truth.json").read_text())
    assert round(rec["volume_ml"], 3) == 523.599
    assert "523.59877" in capsys.readouterr().out


def test_synth_superellipsoid(tmp_path):
    assert main(["synth", str(tmp_path), "--shape", "superellipsoid", "--axes", "0.05",
                 "0.04", "0.03", "--exponents", "3", "2.5", "--frames", "1"]) == 0


def test_synth_frustum_violation(tmp_path, capsys):
    assert main(["synth", str(tmp_path), "--depth", "0.01", "--frames", "1"]) == 1
    assert "ObjectOutsideFrustum" in capsys.readouterr().err


def test_estimate_cube_summary_matches_report(cube_dir, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["estimate", str(cube_dir / "manifest.json"), "--out", str(out)]) == 0
    line = capsys.readouterr().out.strip()
    m = re.fullmatch(r"volume: (\S+) mL \(frame (\d+), R=(\S+)\)", line)
    assert m, line
    rep = io.read_report(out)
    assert float(m.group(1)) == rep.metric_volume_ml
    assert int(m.group(2)) == rep.frame_used == 3
    assert float(m.group(3)) == rep.ratio
    assert rep.metric_volume_ml == pytest.approx(1000, rel=0.05)
    assert rep.focal_source == "manifest"


def test_estimate_flags(cube_dir, tmp_path, capsys):
    out = tmp_path / "r.json"
    argv = ["estimate", str(cube_dir / "manifest.json"), "--out", str(out),
            "--scale-frame", "1", "--focal-source", "intrinsics", "--projection", "perspective"]
    assert main(argv) == 0
    rep = io.read_report(out)
    assert (rep.frame_used, rep.focal_source, rep.projection) == (1, "intrinsics", "perspective")
    assert main(argv[:-6] + ["--scale-frame", "7"]) == 1
    assert "select-frame" in capsys.readouterr().err


def test_estimate_missing_pose_exit_1(cube_dir, tmp_path, capsys):
    import shutil
    scene = tmp_path / "scene"
    shutil.copytree(cube_dir, scene)
    (scene / "frames" / "000002_pose.txt").unlink()
    assert main(["estimate", str(scene / "manifest.json"), "--out", str(tmp_path / "r")]) == 1
    err = capsys.readouterr().err
    assert "stage=manifest" in err and "DanglingPath" in err


def test_estimate_corrupt_pose_names_frame(cube_dir, tmp_path, capsys):
    import shutil
    scene = tmp_path / "scene"
    shutil.copytree(cube_dir, scene)
    (scene / "frames" / "000002_pose.txt").write_text("1 2 3\n")
    assert main(["estimate", str(scene / "manifest.json"), "--out", str(tmp_path / "r")]) == 1
    err = capsys.readouterr().err
    assert "stage=load frame=2" in err


def test_estimate_focal_source_manifest_missing(tmp_path, capsys):
    from test_io import write_bundle
    write_bundle(tmp_path)
    assert main(["estimate", str(tmp_path / "manifest.json"), "--focal-source", "manifest",
                 "--out", str(tmp_path / "r")]) == 1


def test_repair_then_volume(tmp_path, capsys):
    open_cube = shapes.remove_faces(shapes.cube(10.0), [2, 3])
    src, dst = tmp_path / "open.obj", tmp_path / "closed.obj"
    write_mesh(open_cube, src)
    assert main(["volume", str(src)]) == 1
    assert "NotWatertight" in capsys.readouterr().err
    assert main(["repair", str(src), str(dst)]) == 0
    assert capsys.readouterr().out == "faces added: 4\n"
    assert main(["volume", str(dst)]) == 0
    assert float(capsys.readouterr().out.split()[1]) == pytest.approx(1000, rel=1e-12)


def test_volume_with_ratio(tmp_path, capsys):
    src = tmp_path / "cube.obj"
    write_mesh(shapes.cube(100.0), src)
    assert main(["volume", str(src), "--ratio", "0.001"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("volume: ") and out.endswith(" mL\n")
    assert float(out.split()[1]) == pytest.approx(1e6 * 1e-9 * 1e6, rel=1e-12)


def test_repair_non_manifold_exit_1(tmp_path, capsys):
    src = tmp_path / "nm.obj"
    src.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\n"
                   "f 1 2 3\nf 2 1 4\nf 1 2 5\n")
    assert main(["repair", str(src), str(tmp_path / "o.obj")]) == 1
    assert "NonManifoldInput" in capsys.readouterr().err


def test_missing_input_file_exit_1(tmp_path, capsys):
    assert main(["volume", str(tmp_path / "nope.obj")]) == 1
    assert main(["estimate", str(tmp_path / "nope.json")]) == 1


def test_verbosity_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SCALECAM_LOG", "DEBUG")
    assert main(["error", "--estimate", "1", "--truth", "2"]) == 0


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "scalecam", "error", "--estimate", "345",
                        "--truth", "371"], capture_output=True, text=True)
    assert (r.returncode, r.stdout) == (0, "7.01\n")
    r = subprocess.run([sys.executable, "-m", "scalecam", "--nope"], capture_output=True)
    assert r.returncode == 2
