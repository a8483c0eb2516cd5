import math

import numpy as np
import pytest

import torsionlab as tl
from torsionlab.errors import DomainError
from torsionlab.mesh import boundary_geometry, mesh_from_spec, load_mesh, save_mesh


def test_disk_mesh_counts():
    # ring k holds 6k vertices, so n rings give 1 + 3n(n+1) vertices and
    # 6n^2 triangles
    for n in (2, 5, 11):
        m = tl.build_disk_mesh(1.0, n)
        assert m.vertices.shape[0] == 1 + 3 * n * (n + 1)
        assert m.triangles.shape[0] == 6 * n * n
        assert len(m.boundary_vertices) == 6 * n


def test_disk_mesh_geometry():
    m = tl.build_disk_mesh(2.0, 12)
    r = np.hypot(m.vertices[:, 0], m.vertices[:, 1])
    assert np.allclose(r[m.boundary_vertices], 2.0, atol=1e-12)
    assert r[0] == 0.0
    areas = m.triangle_areas()
    assert np.all(areas > 0.0)
    # inscribed polygon area converges to pi R^2 from below
    assert math.pi * 4.0 * (1 - 2e-3) < areas.sum() < math.pi * 4.0


def test_rectangle_mesh_counts():
    m = tl.build_rectangle_mesh(2.0, 1.0, 8, 4)
    assert m.vertices.shape[0] == 9 * 5
    assert m.triangles.shape[0] == 2 * 8 * 4
    assert np.isclose(m.triangle_areas().sum(), 2.0)
    assert len(m.boundary_edges) == 2 * (8 + 4)


def test_ellipse_mesh_is_scaled_disk():
    m = tl.build_ellipse_mesh(2.0, 0.5, 6)
    d = tl.build_disk_mesh(1.0, 6)
    assert np.allclose(m.vertices, d.vertices * [2.0, 0.5])
    assert np.array_equal(m.triangles, d.triangles)


def test_boundary_edges_ccw_ordered():
    m = tl.build_disk_mesh(1.0, 4)
    edges = m.boundary_edges
    # consecutive edges chain head to tail around the loop
    assert np.array_equal(edges[1:, 0], edges[:-1, 1])
    assert edges[0, 0] == edges[-1, 1]
    mids, normals, lengths = boundary_geometry(m)
    # outward normal points along the radius on a disk
    rad = mids / np.linalg.norm(mids, axis=1)[:, None]
    assert np.allclose((normals * rad).sum(axis=1), 1.0, atol=1e-3)
    # inscribed 24-gon perimeter falls short of 2*pi by (pi/24)^2/6
    assert np.isclose(lengths.sum(), 2 * math.pi, rtol=5e-3)


def test_interior_vertices_partition():
    m = tl.build_disk_mesh(1.0, 3)
    both = np.concatenate([m.interior_vertices, m.boundary_vertices])
    assert np.array_equal(np.sort(both), np.arange(len(m.vertices)))


def test_from_arrays_rejects_bad_input():
    good_v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    good_t = np.array([[0, 1, 2]])
    with pytest.raises(ValueError):
        tl.TriMesh.from_arrays(good_v, np.array([[0, 1, 3]]))
    with pytest.raises(ValueError):
        tl.TriMesh.from_arrays(good_v, np.array([[0, 2, 1]]))  # clockwise
    with pytest.raises(ValueError):
        tl.TriMesh.from_arrays(good_v[:, :1], good_t)
    # same directed edge twice: two triangles on the same side
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    t = np.array([[0, 1, 2], [0, 1, 3]])
    with pytest.raises(ValueError, match="nonconforming"):
        tl.TriMesh.from_arrays(v, t)


def test_mesh_arrays_immutable():
    m = tl.build_disk_mesh(1.0, 2)
    with pytest.raises(ValueError):
        m.vertices[0, 0] = 5.0
    with pytest.raises(ValueError):
        m.triangles[0, 0] = 7


def test_replace_vertices():
    m = tl.build_disk_mesh(1.0, 3)
    m2 = m.replace_vertices(m.vertices * 2.0)
    assert np.isclose(m2.h, 2.0 * m.h)
    assert np.array_equal(m2.triangles, m.triangles)
    # folding the mesh flips triangles and must be refused
    with pytest.raises(ValueError):
        m.replace_vertices(m.vertices * [-1.0, 1.0])


def test_save_load_roundtrip(tmp_path):
    m = tl.build_disk_mesh(1.0, 3)
    path = tmp_path / "disk.mesh"
    save_mesh(m, path)
    m2 = load_mesh(path)
    assert np.array_equal(m2.vertices, m.vertices)
    assert np.array_equal(m2.triangles, m.triangles)


def test_load_mesh_rejects_junk(tmp_path):
    path = tmp_path / "bad.mesh"
    path.write_text("v 0 0\nv 1 0\nv 0 1\nwhat 1 2 3\nt 0 1 2\n")
    with pytest.raises(ValueError):
        load_mesh(path)


def test_mesh_from_spec(tmp_path):
    m = mesh_from_spec("disk:1:4")
    assert m.vertices.shape[0] == 1 + 3 * 4 * 5
    m = mesh_from_spec("ellipse:2:1:3")
    assert m.vertices[:, 0].max() == pytest.approx(2.0)
    m = mesh_from_spec("rect:1:2:2:4")
    assert m.vertices.shape[0] == 15
    d = tl.build_disk_mesh(1.0, 3)
    path = tmp_path / "m.mesh"
    save_mesh(d, path)
    m = mesh_from_spec(f"file:{path}")
    assert m.vertices.shape[0] == d.vertices.shape[0]
    # image meshes push a disk through a catalogue map
    m = mesh_from_spec("image:quad:0.2:0.5:4")
    assert m.vertices.shape[0] == 1 + 3 * 4 * 5
    for bad in ("disk:1", "disk:1:1", "pentagon:1:3", "rect:1:1:0:4", ""):
        with pytest.raises(ValueError):
            mesh_from_spec(bad)


def test_map_mesh_univalence_guard():
    d = tl.build_disk_mesh(1.0, 4)
    squeeze = tl.moebius_map(2.0)  # univalent only up to |z| = 0.5
    with pytest.raises(DomainError):
        tl.map_mesh(d, squeeze)
    small = tl.build_disk_mesh(0.4, 4)
    img = tl.map_mesh(small, squeeze)
    assert img.vertices.shape == small.vertices.shape
