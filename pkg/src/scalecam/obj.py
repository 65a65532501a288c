"""
Wavefront OBJ reading and writing, restricted to ``v`` and ``f`` records.

Writing uses 17 significant digits so that read -> write -> read reproduces
every coordinate bit for bit.
"""
import math
import warnings

import numpy as np

from ._text import parse_float, parse_int
from .errors import IgnoredRecord, InvalidMesh, IoFailure, MalformedObj, NonTriangulatableFace
from .mesh import Space, TriangleMesh


def _parse_index(token, n_vertices, line_no):
    # "7", "7/2", "7//3", "7/2/3": only the vertex index matters here.
    head = token.split("/", 1)[0]
    idx = parse_int(head)
    if idx is None:
        raise MalformedObj(f"bad face index {token!r}", line_no)
    if idx < 0:
        idx = n_vertices + idx + 1
    if idx < 1 or idx > n_vertices:
        raise MalformedObj(
            f"face index {head} out of range ({n_vertices} vertices so far)",
            line_no)
    return idx - 1


def parse_obj(text, space=Space.RECON) -> TriangleMesh:
    """Parse OBJ source text. Polygons are fan-triangulated from their first
    vertex: ``f 1 2 3 4`` becomes (1, 2, 3) and (1, 3, 4)."""
    verts = []
    faces = []
    ignored = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        tag = tokens[0]
        if tag == "v":
            if len(tokens) not in (4, 5):
                raise MalformedObj(
                    f"vertex needs 3 coordinates, got {len(tokens) - 1}", line_no)
            xyz = [parse_float(t) for t in tokens[1:]]
            if None in xyz:
                raise MalformedObj(f"bad vertex coordinate in {line!r}", line_no)
            xyz = xyz[:3]
            if not all(math.isfinite(c) for c in xyz):
                raise MalformedObj("non-finite vertex coordinate", line_no)
            verts.append(xyz)
        elif tag == "f":
            idx = [_parse_index(t, len(verts), line_no) for t in tokens[1:]]
            if len(idx) < 3:
                raise NonTriangulatableFace(
                    f"face has {len(idx)} vertices", line_no)
            if len(set(idx)) != len(idx):
                raise NonTriangulatableFace(
                    "face repeats a vertex index", line_no)
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
        else:
            ignored.setdefault(tag, line_no)
    for tag, line_no in ignored.items():
        warnings.warn(f"ignored OBJ record type {tag!r} (first at line {line_no})",
                      IgnoredRecord, stacklevel=3)
    try:
        return TriangleMesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                            np.array(faces, dtype=np.int64).reshape(-1, 3),
                            space)
    except InvalidMesh as exc:
        raise MalformedObj(exc.message) from None


def format_obj(mesh: TriangleMesh) -> str:
    lines = ["v %.17g %.17g %.17g" % tuple(v) for v in mesh.vertices]
    lines += ["f %d %d %d" % tuple(f + 1) for f in mesh.faces]
    return "\n".join(lines) + "\n"


def parse_obj_bytes(data: bytes, space=Space.RECON) -> TriangleMesh:
    """:func:`parse_obj` on raw file bytes, which must be ASCII."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedObj(f"non-ASCII byte at offset {exc.start}") from None
    return parse_obj(text, space)


def read_mesh(path, space=Space.RECON) -> TriangleMesh:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from None
    return parse_obj_bytes(data, space)


def write_mesh(mesh: TriangleMesh, path):
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(format_obj(mesh))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from None
