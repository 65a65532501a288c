"""
Enclosed volume and hole filling
================================

A mesh only has a volume when it is closed. This walk-through opens a cube,
shows how the boundary is reported, closes it again and measures it.
"""

import numpy as np

from scalecam import shapes
from scalecam.mesh import analyze_manifold, fill_holes, signed_volume

# A cube with side 2, centered on the origin: 8 vertices, 12 triangles.
cube = shapes.cube(2.0)
print("closed cube volume:", signed_volume(cube))

# Removing the two triangles of one side opens a square hole.
opened = shapes.remove_faces(cube, [0, 1])
report = analyze_manifold(opened)
print("boundary edges:", report.boundary_edge_count)
print("loops:", [len(loop) for loop in report.boundary_loops])

# fill_holes adds one vertex at each loop's centroid and fans triangles to it.
closed = fill_holes(opened)
print("faces added:", closed.n_faces - opened.n_faces)
print("repaired volume:", signed_volume(closed))

# The same repair on a sphere with several holes. The fan sits a little
# inside the missing cap, so the volume drops slightly.
sphere = shapes.icosphere(1.0, 4)
holed = shapes.puncture_stars(sphere, 5, np.random.default_rng(0))
repaired = fill_holes(holed)
print("sphere: %.6f  repaired: %.6f  exact: %.6f"
      % (signed_volume(sphere), signed_volume(repaired), 4 * np.pi / 3))
