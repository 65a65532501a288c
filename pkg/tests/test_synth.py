import filecmp
import json
import math

import numpy as np
import pytest
from scipy import integrate

from scalecam.errors import ObjectOutsideFrustum
from scalecam.scale import mask_stats
from scalecam.synth import (
    Cube,
    SceneSpec,
    Sphere,
    Superellipsoid,
    generate_scene,
    ground_truth_volume,
    render_scene,
    spin_trajectory,
)


def superellipsoid_quadrature(a, b, c, r, t):
    """Volume in mL by integrating the superellipse cross-section over z.

    The section at height z has radius rho = (1 - |z/c|^t)^(1/t) and the
    superellipse |x/A|^r + |y/B|^r <= 1 has area 4AB G(1+1/r)^2 / G(1+2/r).
    """
    k = 4 * math.gamma(1 + 1 / r) ** 2 / math.gamma(1 + 2 / r)
    area = lambda z: a * b * k * (1 - abs(z / c) ** t) ** (2 / t)  # noqa: E731
    return integrate.quad(area, -c, c, epsabs=0, epsrel=1e-12)[0] * 1e6


@pytest.fixture(scope="module")
def cube_scene():
    return render_scene(SceneSpec.simple(Cube(0.1), frames=4))


@pytest.fixture(scope="module")
def sphere_scene():
    return render_scene(SceneSpec.simple(Sphere(0.05), frames=2))


def test_closed_form_truths():
    assert ground_truth_volume(Cube(0.1)) == pytest.approx(1000, rel=1e-12)
    assert ground_truth_volume(Sphere(0.05)) == pytest.approx(523.5987755982989, rel=1e-12)


def test_superellipsoid_ellipsoid_case():
    exact = 4 / 3 * math.pi * 0.05 * 0.04 * 0.03 * 1e6
    got = ground_truth_volume(Superellipsoid(0.05, 0.04, 0.03))
    assert got == pytest.approx(exact, rel=1e-3)


@pytest.mark.parametrize("r, t", [(4.0, 3.0), (1.5, 2.5), (3.0, 1.5)])
def test_superellipsoid_against_quadrature(r, t):
    shape = Superellipsoid(0.05, 0.04, 0.03, r, t)
    oracle = superellipsoid_quadrature(0.05, 0.04, 0.03, r, t)
    assert ground_truth_volume(shape) == pytest.approx(oracle, rel=1e-3)


def test_face_on_cube_silhouette_width(cube_scene):
    # The front face sits at depth 0.45, so its width is 0.1 * 500 / 0.45.
    s = mask_stats(cube_scene.frames[0].mask)
    assert abs(s.width_px - 0.1 * 500 / 0.45) <= 2
    rows = np.flatnonzero(cube_scene.frames[0].mask.any(axis=1))
    assert abs(rows[-1] - rows[0] + 1 - 0.1 * 500 / 0.45) <= 2


def test_sphere_silhouette_radius(sphere_scene):
    # Tangent cone half-angle asin(r / D).
    radius = 500 * math.tan(math.asin(0.05 / 0.5))
    s = mask_stats(sphere_scene.frames[0].mask)
    assert abs(s.width_px / 2 - radius) <= 2
    assert s.area_px == pytest.approx(math.pi * radius ** 2, rel=0.02)


def test_face_on_cube_depth_at_centroid(cube_scene):
    f = cube_scene.frames[0]
    u, v = mask_stats(f.mask).centroid_px
    assert f.depth[int(v), int(u)] == pytest.approx(0.45, abs=1e-6)


def test_mask_and_depth_agree(cube_scene, sphere_scene):
    for scene in (cube_scene, sphere_scene):
        for f in scene.frames:
            assert np.all(np.isfinite(f.depth))
            assert np.all(f.depth[f.mask] > 0)
            assert np.all(f.depth[~f.mask] == 0)


def test_depth_stays_within_object(cube_scene):
    for f in cube_scene.frames:
        d = f.depth[f.mask]
        assert d.min() >= 0.45 - 1e-6 and d.max() <= 0.55 + 1e-6


def test_mesh_is_scaled_reconstruction(cube_scene):
    m = cube_scene.mesh
    np.testing.assert_allclose(m.extent(), [0.237] * 3, rtol=1e-12)
    np.testing.assert_allclose(m.centroid(), [0, 0, -0.5 * 2.37], atol=1e-12)


def test_tracked_pose_carries_mesh_to_each_frame(cube_scene):
    # Inverse of the tracked pose maps the reconstruction into frame i's
    # camera, up to the reconstruction scale.
    spec = cube_scene.spec
    truth = spec.shape.mesh()
    for f, pose in zip(cube_scene.frames, spec.trajectory):
        V = np.linalg.inv(f.pose.matrix)
        recon = np.hstack([cube_scene.mesh.vertices, np.ones((8, 1))]) @ V.T
        metric = truth.vertices @ pose.rotation.T + pose.translation
        np.testing.assert_allclose(recon[:, :3], 2.37 * metric, atol=1e-12)


def test_spin_trajectory_keeps_depth():
    poses = spin_trajectory(0.8, 6)
    for p in poses:
        assert p.translation.tolist() == [0.0, 0.0, -0.8]
    np.testing.assert_allclose(poses[0].rotation, np.eye(3))


def test_frustum_violation():
    with pytest.raises(ObjectOutsideFrustum):
        render_scene(SceneSpec.simple(Cube(0.1), depth=0.01, frames=1))
    with pytest.raises(ObjectOutsideFrustum):
        render_scene(SceneSpec.simple(Cube(0.1), depth=0.5, focal=5000, frames=1))


def test_regeneration_is_bitwise_identical(tmp_path):
    spec = SceneSpec.simple(Sphere(0.05, 3), frames=3, holes=2, seed=11)
    a, b = tmp_path / "a", tmp_path / "b"
    generate_scene(spec, a)
    generate_scene(spec, b)
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert len(files) == 3 * 3 + 4
    match, mismatch, errors = filecmp.cmpfiles(a, b, [str(f) for f in files], shallow=False)
    assert not mismatch and not errors


def test_bundle_layout_and_truth_record(tmp_path):
    scene = generate_scene(SceneSpec.simple(Cube(0.1), frames=2), tmp_path)
    rec = json.loads((tmp_path / "ground_truth.json").read_text())
    assert rec["volume_ml"] == pytest.approx(1000)
    assert rec["recon_scale"] == 2.37
    assert (tmp_path / "frames" / "000001_depth.pfm").exists()
    assert scene.manifest_path == tmp_path / "manifest.json"
