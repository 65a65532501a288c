"""Hard-edged triangle rasterization with a z-buffer.

Coverage is tested at pixel centers (column + 0.5, row + 0.5). A center lying
exactly on an edge belongs to the triangle only if that edge is a top or left
edge, so two triangles sharing an edge never both claim (and never both miss)
a pixel. There is no antialiasing.
"""

import numpy as np


def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def _owns_edge(ax, ay, bx, by):
    # Top-left rule for positively oriented triangles.
    dx, dy = bx - ax, by - ay
    return (dy < 0) | ((dy == 0) & (dx > 0))


def rasterize_depth(xy, depth, faces, shape):
    """Rasterize triangles into a nearest-depth image.

    Parameters
    ----------
    xy : (N, 2) array
        Vertex positions in pixels (column, row).
    depth : (N,) array
        Positive per-vertex distance along the optical axis.
    faces : (M, 3) int array
    shape : (H, W)

    Returns
    -------
    (H, W) float64 array holding the nearest depth at each covered pixel
    center and 0 elsewhere. Depth is interpolated linearly in 1/depth, which
    is exact for planar triangles under perspective.
    """
    h, w = shape
    xy = np.asarray(xy, dtype=np.float64)
    inv = 1.0 / np.asarray(depth, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    zbuf = np.full(h * w, np.inf)

    a, b, c = xy[faces[:, 0]], xy[faces[:, 1]], xy[faces[:, 2]]
    ia, ib, ic = inv[faces[:, 0]], inv[faces[:, 1]], inv[faces[:, 2]]
    area = _edge(a[:, 0], a[:, 1], b[:, 0], b[:, 1], c[:, 0], c[:, 1])
    flip = area < 0
    b, c = np.where(flip[:, None], c, b), np.where(flip[:, None], b, c)
    ib, ic = np.where(flip, ic, ib), np.where(flip, ib, ic)
    area = np.abs(area)

    lo = np.minimum(np.minimum(a, b), c)
    hi = np.maximum(np.maximum(a, b), c)
    c0 = np.maximum(np.ceil(lo[:, 0] - 0.5), 0).astype(np.int64)
    r0 = np.maximum(np.ceil(lo[:, 1] - 0.5), 0).astype(np.int64)
    c1 = np.minimum(np.floor(hi[:, 0] - 0.5), w - 1).astype(np.int64)
    r1 = np.minimum(np.floor(hi[:, 1] - 0.5), h - 1).astype(np.int64)
    keep = (area > 0) & (c1 >= c0) & (r1 >= r0)
    bw = np.where(keep, c1 - c0 + 1, 0)
    bh = np.where(keep, r1 - r0 + 1, 0)

    # Bucket triangles by padded bounding-box size so each bucket is one
    # dense array evaluation.
    size_w = 1 << np.ceil(np.log2(np.maximum(bw, 1))).astype(np.int64)
    size_h = 1 << np.ceil(np.log2(np.maximum(bh, 1))).astype(np.int64)
    buckets = {}
    for t in np.flatnonzero(keep):
        buckets.setdefault((int(size_h[t]), int(size_w[t])), []).append(t)

    for (sh, sw), tris in sorted(buckets.items()):
        tris = np.asarray(tris)
        # Bound each batch to a few million samples.
        step = max(1, 4_000_000 // (sh * sw))
        for s in range(0, len(tris), step):
            _fill_batch(tris[s:s + step], sh, sw, a, b, c, ia, ib, ic, area,
                        c0, r0, c1, r1, w, zbuf)

    zbuf[~np.isfinite(zbuf)] = 0.0
    return zbuf.reshape(h, w)


def _fill_batch(t, sh, sw, a, b, c, ia, ib, ic, area, c0, r0, c1, r1, w, zbuf):
    dr, dc = np.meshgrid(np.arange(sh), np.arange(sw), indexing="ij")
    cols = c0[t, None, None] + dc[None]
    rows = r0[t, None, None] + dr[None]
    px, py = cols + 0.5, rows + 0.5
    ax, ay = a[t, 0, None, None], a[t, 1, None, None]
    bx, by = b[t, 0, None, None], b[t, 1, None, None]
    cx, cy = c[t, 0, None, None], c[t, 1, None, None]
    # Edge function opposite each vertex gives its barycentric weight.
    wa = _edge(bx, by, cx, cy, px, py)
    wb = _edge(cx, cy, ax, ay, px, py)
    wc = _edge(ax, ay, bx, by, px, py)
    inside = ((wa > 0) | ((wa == 0) & _owns_edge(bx, by, cx, cy)))
    inside &= ((wb > 0) | ((wb == 0) & _owns_edge(cx, cy, ax, ay)))
    inside &= ((wc > 0) | ((wc == 0) & _owns_edge(ax, ay, bx, by)))
    inside &= (cols <= c1[t, None, None]) & (rows <= r1[t, None, None])
    if not inside.any():
        return
    A = area[t, None, None]
    inv_d = (wa * ia[t, None, None] + wb * ib[t, None, None]
             + wc * ic[t, None, None]) / A
    d = 1.0 / inv_d[inside]
    flat = (rows * w + cols)[inside]
    np.minimum.at(zbuf, flat, d)
