"""Plain-text and VTK legacy ASCII readers/writers for meshes and solutions.

Plain-text mesh layout, zero-based indices::

    <n_nodes>
    x y z            (n_nodes lines)
    <n_tets>
    i j k l          (n_tets lines)
    <n_boundary_triangles>
    i j k tag        (tag: 0 bottom, 1 top, 2+i side over polygon edge i)
"""
from __future__ import annotations

import numpy as np

from .errors import GeometryError
from .geometry import face_tag
from .meshgen import TetMesh

VTK_TETRA = 10


def _fmt_rows(arr, fmt) -> str:
    return "".join(fmt % tuple(row) + "\n" for row in arr.tolist())


def write_mesh_text(mesh: TetMesh, path):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_nodes}\n")
        fh.write(_fmt_rows(mesh.nodes, "%.17g %.17g %.17g"))
        fh.write(f"{mesh.n_tets}\n")
        fh.write(_fmt_rows(mesh.tets, "%d %d %d %d"))
        fh.write(f"{len(mesh.bfaces)}\n")
        fh.write(_fmt_rows(np.column_stack([mesh.bfaces, mesh.btags]), "%d %d %d %d"))


def read_mesh_text(path, ventcel_face) -> TetMesh:
    """Read a plain-text mesh; the Ventcel face is not stored in the file."""
    with open(path) as fh:
        tokens = fh.read().split()
    pos = 0

    def block(ncols, dtype):
        nonlocal pos
        try:
            n = int(tokens[pos])
            vals = np.array(tokens[pos + 1:pos + 1 + n * ncols], dtype=dtype)
        except (IndexError, ValueError) as exc:
            raise GeometryError(f"malformed mesh file {path}: {exc}") from None
        if len(vals) != n * ncols:
            raise GeometryError(f"malformed mesh file {path}: truncated block")
        pos += 1 + n * ncols
        return vals.reshape(n, ncols)

    nodes = block(3, float)
    tets = block(4, np.int64)
    bf = block(4, np.int64)
    if tets.size and (tets.min() < 0 or tets.max() >= len(nodes)):
        raise GeometryError(f"tet index out of range in {path}")
    return TetMesh(nodes, tets, bf[:, :3].copy(), bf[:, 3].copy(), face_tag(ventcel_face))


def _vtk_header(mesh: TetMesh, title: str) -> str:
    out = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
           f"POINTS {mesh.n_nodes} double"]
    text = "\n".join(out) + "\n" + _fmt_rows(mesh.nodes, "%.17g %.17g %.17g")
    cells = np.column_stack([np.full(mesh.n_tets, 4), mesh.tets])
    text += f"CELLS {mesh.n_tets} {5 * mesh.n_tets}\n" + _fmt_rows(cells, "%d %d %d %d %d")
    text += f"CELL_TYPES {mesh.n_tets}\n" + f"{VTK_TETRA}\n" * mesh.n_tets
    return text


def _vtk_point_scalars(name, values, kind="int") -> str:
    fmt = "%d\n" if kind == "int" else "%.9g\n"
    body = "".join(fmt % v for v in values.tolist())
    return f"SCALARS {name} {kind} 1\nLOOKUP_TABLE default\n" + body


def write_mesh_vtk(mesh: TetMesh, path):
    with open(path, "w") as fh:
        fh.write(_vtk_header(mesh, "ventcel tetrahedral mesh"))
        fh.write(f"POINT_DATA {mesh.n_nodes}\n")
        fh.write(_vtk_point_scalars("node_class", mesh.node_class.astype(int)))


def write_solution_vtk(sol, path):
    mesh = sol.mesh
    with open(path, "w") as fh:
        fh.write(_vtk_header(mesh, "ventcel P1 solution"))
        fh.write(f"POINT_DATA {mesh.n_nodes}\n")
        fh.write(_vtk_point_scalars("u", sol.values, "float"))
        fh.write(_vtk_point_scalars("node_class", mesh.node_class.astype(int)))


def write_vector(values, path):
    with open(path, "w") as fh:
        fh.write("".join("%.17g\n" % v for v in np.asarray(values).tolist()))


def read_vector(path) -> np.ndarray:
    return np.loadtxt(path, dtype=float, ndmin=1)


def read_vtk_points(path):
    """Points, tets and point-data arrays from a file written by this module."""
    with open(path) as fh:
        lines = fh.read().split("\n")
    i = 0
    points = tets = None
    data = {}
    n_points = 0
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        if parts[0] == "POINTS":
            n_points = int(parts[1])
            points = np.array(" ".join(lines[i + 1:i + 1 + n_points]).split(), float)
            points = points.reshape(-1, 3)
            i += 1 + n_points
        elif parts[0] == "CELLS":
            n = int(parts[1])
            cells = np.array(" ".join(lines[i + 1:i + 1 + n]).split(), np.int64).reshape(n, 5)
            tets = cells[:, 1:]
            i += 1 + n
        elif parts[0] == "SCALARS":
            name = parts[1]
            vals = np.array(" ".join(lines[i + 2:i + 2 + n_points]).split(), float)
            data[name] = vals
            i += 2 + n_points
        else:
            i += 1
    return points, tets, data
