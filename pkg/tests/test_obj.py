import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scalecam import shapes
from scalecam.errors import IgnoredRecord, IoFailure, MalformedObj
from scalecam.mesh import Space, TriangleMesh
from scalecam.obj import format_obj, parse_obj, read_mesh, write_mesh


def test_minimal_obj():
    m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    assert m.n_vertices == 3 and m.n_faces == 1
    assert m.faces.tolist() == [[0, 1, 2]]


def test_out_of_range_index():
    with pytest.raises(MalformedObj) as info:
        parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n")
    assert info.value.line == 4


def test_quad_is_fanned():
    m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_slash_and_negative_indices():
    with pytest.warns(IgnoredRecord):
        m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf -3/1 2/1/1 3//1\n")
    assert m.faces.tolist() == [[0, 1, 2]]


def test_unknown_records_warn():
    with pytest.warns(IgnoredRecord):
        m = parse_obj("# comment\no thing\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1 2 3\n")
    assert m.n_faces == 1


@pytest.mark.parametrize("text", [
    "v 0 0\n",
    "v 0 0 0 1 2\n",
    "v 0 0 nan\n",
    "v 1_0 0 0\n",
    "v 0 0 inf\n",
    "v 0 0 0\nv 1 0 0\nf 1 2\n",
    "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n",
    "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 0\n",
    "f 1 2 3\nv 0 0 0\nv 1 0 0\nv 0 1 0\n",
])
def test_malformed(text):
    with pytest.raises(MalformedObj):
        parse_obj(text)


def test_space_tag_passed_through():
    m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n", Space.PIXEL)
    assert m.space is Space.PIXEL


def test_canonical_file_round_trips_byte_identically(tmp_path):
    m = shapes.icosphere(0.37, 2)
    p1, p2 = tmp_path / "a.obj", tmp_path / "b.obj"
    write_mesh(m, p1)
    write_mesh(read_mesh(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=100, deadline=None)
@given(coords=st.lists(st.tuples(finite, finite, finite), min_size=3, max_size=12))
def test_seventeen_digits_round_trip_bitwise(coords):
    m = TriangleMesh(np.array(coords), [[0, 1, 2]])
    back = parse_obj(format_obj(m))
    assert back.vertices.tobytes() == m.vertices.tobytes()
    assert np.array_equal(back.faces, m.faces)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        read_mesh(tmp_path / "nope.obj")


def test_non_ascii_file(tmp_path):
    p = tmp_path / "u.obj"
    p.write_bytes("v 0 0 0 é\n".encode())
    with pytest.raises(MalformedObj):
        read_mesh(p)
