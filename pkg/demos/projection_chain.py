"""
From reconstruction units to pixels
===================================

Follow one mesh through the view matrix, the clip-space projection, the
width normalization and the pixel map, printing the quantities that matter
at each step.
"""

import numpy as np

from scalecam import shapes
from scalecam.camera import (
    CameraModel,
    ObjectPose,
    WidthRatio,
    normalize_mesh,
    project_mesh,
    projection_matrix,
    to_pixel_space,
    view_matrix,
)
from scalecam.mesh import signed_volume

# A 512 x 512 pinhole camera with f = 500 px and the principal point centered.
cam = CameraModel.pinhole(500.0, width=512)
P = projection_matrix(cam)
print(np.round(P, 4) + 0.0)

# Points on the optical axis at the clip planes land on NDC z = -1 and +1.
for d in (cam.near, cam.far):
    clip = P @ [0.0, 0.0, -d, 1.0]
    print("depth %g -> NDC z %.12f" % (d, clip[2] / clip[3]))

# The view matrix is the inverse of the tracked pose. This pose inverts to
# a shift of -2 along z, which puts the cube 2 units in front of a camera
# looking down -z.
pose = ObjectPose.from_rt(np.eye(3), [0.0, 0.0, 2.0])
V = view_matrix(pose)
mesh = shapes.cube(0.4)

# "weak" keeps the mesh a similarity copy of view space on the canvas, which
# is what the volume needs; "perspective" divides every vertex by its own w.
for mode in ("perspective", "weak"):
    canvas = project_mesh(mesh, V, P, mode)
    print(mode, "canvas extent:", np.round(canvas.extent(), 4))

# Suppose the silhouette is 100 px wide. Normalization stretches the canvas
# x-extent to 2 * 100 / 512, then the pixel map scales by L / 2.
canvas = project_mesh(mesh, V, P, "weak")
norm = normalize_mesh(canvas, WidthRatio(100, 512))
pix = to_pixel_space(norm, 512)
print("normalized x-extent:", norm.extent()[0], "expected:", 2 * 100 / 512)
print("pixel extent:", np.round(pix.extent(), 6))
print("pixel volume (px^3): %.1f" % signed_volume(pix))
