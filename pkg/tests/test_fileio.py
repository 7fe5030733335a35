import numpy as np
import pytest

from ventcel import fem, fileio
from ventcel.errors import GeometryError

from conftest import prism_mesh


def test_mesh_text_round_trip(tmp_path):
    mesh = prism_mesh(2, 0.58, "side:1")
    p = tmp_path / "m.txt"
    fileio.write_mesh_text(mesh, p)
    back = fileio.read_mesh_text(p, "side:1")
    assert np.array_equal(back.nodes, mesh.nodes)
    assert np.array_equal(back.tets, mesh.tets)
    assert np.array_equal(back.bfaces, mesh.bfaces)
    assert np.array_equal(back.btags, mesh.btags)
    assert np.array_equal(back.node_class, mesh.node_class)
    back.check()


def test_mesh_text_layout(tmp_path):
    mesh = prism_mesh(1)
    p = tmp_path / "m.txt"
    fileio.write_mesh_text(mesh, p)
    lines = p.read_text().splitlines()
    assert int(lines[0]) == mesh.n_nodes
    assert len(lines[1].split()) == 3
    assert int(lines[1 + mesh.n_nodes]) == mesh.n_tets
    k = 2 + mesh.n_nodes + mesh.n_tets
    assert int(lines[k]) == len(mesh.bfaces)
    assert len(lines) == k + 1 + len(mesh.bfaces)


def test_imported_mesh_solves_identically(tmp_path):
    mesh = prism_mesh(2, 0.58)
    p = tmp_path / "m.txt"
    fileio.write_mesh_text(mesh, p)
    f = lambda x: np.ones(len(x))
    a = fem.solve_problem(mesh, f, None)
    b = fem.solve_problem(fileio.read_mesh_text(p, "bottom"), f, None)
    assert np.array_equal(a.values, b.values)


def test_truncated_mesh_rejected(tmp_path):
    mesh = prism_mesh(1)
    p = tmp_path / "m.txt"
    fileio.write_mesh_text(mesh, p)
    text = p.read_text().splitlines()
    p.write_text("\n".join(text[:-3]) + "\n")
    with pytest.raises(GeometryError):
        fileio.read_mesh_text(p, "bottom")


def test_out_of_range_index_rejected(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1\n0 1 2 9\n0\n")
    with pytest.raises(GeometryError):
        fileio.read_mesh_text(p, "bottom")


def test_vtk_mesh(tmp_path):
    mesh = prism_mesh(2)
    p = tmp_path / "m.vtk"
    fileio.write_mesh_vtk(mesh, p)
    text = p.read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert "DATASET UNSTRUCTURED_GRID" in text
    types = text.split("CELL_TYPES")[1].split("POINT_DATA")[0].split()[1:]
    assert set(types) == {"10"} and len(types) == mesh.n_tets
    pts, tets, data = fileio.read_vtk_points(p)
    assert np.array_equal(pts, mesh.nodes)
    assert np.array_equal(tets, mesh.tets)
    assert np.array_equal(data["node_class"], mesh.node_class)


def test_vtk_solution(tmp_path):
    mesh = prism_mesh(2)
    sol = fem.solve_problem(mesh, lambda x: np.ones(len(x)), None)
    p = tmp_path / "u.vtk"
    fileio.write_solution_vtk(sol, p)
    assert "SCALARS u float 1" in p.read_text()
    _, _, data = fileio.read_vtk_points(p)
    np.testing.assert_allclose(data["u"], sol.values, rtol=1e-8, atol=1e-15)


def test_vector_round_trip(tmp_path):
    v = np.random.default_rng(0).standard_normal(37)
    p = tmp_path / "u.txt"
    fileio.write_vector(v, p)
    assert len(p.read_text().splitlines()) == 37
    assert np.array_equal(fileio.read_vector(p), v)
