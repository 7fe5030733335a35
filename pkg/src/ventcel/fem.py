"""P1 assembly and solution of the discrete Ventcel problem.

The bilinear form is the volume Dirichlet integral plus the tangential
Dirichlet integral of the trace over the Ventcel face.  Boundary data are
homogeneous, so constrained nodes (Dirichlet faces and the rim of the Ventcel
face) are eliminated from the system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError, ConvergenceError, DataError, NumericalError
from .meshgen import SurfaceMesh, TetMesh, extract_surface
from .quadrature import TET_DEG2, TRI_MIDPOINTS, map_points


@dataclass
class DofMap:
    dof: np.ndarray   # node -> dof, CONSTRAINED for eliminated nodes
    n_free: int

    CONSTRAINED = -1

    @classmethod
    def from_mesh(cls, mesh: TetMesh):
        free = mesh.free_mask
        dof = np.full(mesh.n_nodes, cls.CONSTRAINED, dtype=np.int64)
        dof[free] = np.arange(int(free.sum()))
        return cls(dof, int(free.sum()))

    @property
    def free_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.dof >= 0)

    def restrict(self, full: np.ndarray) -> np.ndarray:
        return full[self.free_nodes]

    def extend(self, x: np.ndarray, n_nodes: int) -> np.ndarray:
        out = np.zeros(n_nodes)
        out[self.free_nodes] = x
        return out


# ---------------------------------------------------------------------------
# element kernels

def tet_gradients(nodes, tets):
    """Barycentric gradients (m, 4, 3) and volumes (m,) of each tetrahedron."""
    p = nodes[tets]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=1)
    det = np.linalg.det(jac)
    if np.any(np.abs(det) <= 1e-300):
        raise AssemblyError("zero-volume tetrahedron")
    inv = np.linalg.inv(jac)            # columns are gradients of lambda_1..3
    g = np.transpose(inv, (0, 2, 1))
    grads = np.concatenate([-g.sum(axis=1, keepdims=True), g], axis=1)
    return grads, np.abs(det) / 6.0


def tri_gradients(nodes2d, tris):
    """Barycentric gradients (m, 3, 2) and areas (m,) of 2D triangles."""
    p = nodes2d[tris]
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    if np.any(np.abs(det) <= 1e-300):
        raise AssemblyError("zero-area surface triangle")
    # gradient of lambda_i is the rotated opposite edge over twice the area
    g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det[:, None]
    g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det[:, None]
    grads = np.stack([-(g1 + g2), g1, g2], axis=1)
    return grads, np.abs(det) / 2.0


def tet_stiffness(nodes, tets) -> np.ndarray:
    grads, vol = tet_gradients(nodes, tets)
    return vol[:, None, None] * np.einsum("eid,ejd->eij", grads, grads)


def tri_stiffness(nodes2d, tris) -> np.ndarray:
    grads, area = tri_gradients(nodes2d, tris)
    return area[:, None, None] * np.einsum("eid,ejd->eij", grads, grads)


def _scatter(elems, local, n) -> sp.csr_matrix:
    k = elems.shape[1]
    rows = np.repeat(elems, k, axis=1).ravel()
    cols = np.tile(elems, (1, k)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


# ---------------------------------------------------------------------------
# global assembly

def assemble_volume_full(mesh: TetMesh) -> sp.csr_matrix:
    """Volume stiffness over all nodes, before constraint elimination."""
    return _scatter(mesh.tets, tet_stiffness(mesh.nodes, mesh.tets), mesh.n_nodes)


def assemble_surface_full(surface: SurfaceMesh, n_nodes: int) -> sp.csr_matrix:
    """Tangential stiffness of the face, scattered into volume node numbering."""
    elems = surface.volume_nodes[surface.triangles]
    return _scatter(elems, tri_stiffness(surface.nodes, surface.triangles), n_nodes)


def _reduce(full: sp.csr_matrix, dofs: DofMap) -> sp.csr_matrix:
    idx = dofs.free_nodes
    out = full[idx][:, idx].tocsr()
    out.sort_indices()
    return out


def assemble_volume_stiffness(mesh: TetMesh, dofs: DofMap) -> sp.csr_matrix:
    return _reduce(assemble_volume_full(mesh), dofs)


def assemble_surface_stiffness(surface: SurfaceMesh, dofs: DofMap) -> sp.csr_matrix:
    return _reduce(assemble_surface_full(surface, len(dofs.dof)), dofs)


def _eval(fn, pts, what):
    vals = np.asarray(fn(pts), dtype=float)
    if vals.ndim == 0:
        vals = np.full(len(pts), float(vals))
    vals = vals.reshape(len(pts))
    if not np.all(np.isfinite(vals)):
        raise DataError(f"non-finite {what} values at quadrature points")
    return vals


def assemble_load_full(mesh: TetMesh, surface: SurfaceMesh | None, f, g) -> np.ndarray:
    """Load vector over all nodes: degree-2 rules for volume and face data."""
    b = np.zeros(mesh.n_nodes)
    if f is not None:
        bary, w = TET_DEG2
        _, vol = tet_gradients(mesh.nodes, mesh.tets)
        pts = map_points(mesh.nodes[mesh.tets], bary)
        fv = _eval(f, pts.reshape(-1, 3), "volume data").reshape(pts.shape[:2])
        local = vol[:, None] * np.einsum("eq,q,qi->ei", fv, w, bary)
        np.add.at(b, mesh.tets.ravel(), local.ravel())
    if g is not None and surface is not None:
        bary, w = TRI_MIDPOINTS
        _, area = tri_gradients(surface.nodes, surface.triangles)
        pts2 = map_points(surface.nodes[surface.triangles], bary)
        pts3 = surface.to_3d(pts2.reshape(-1, 2))
        gv = _eval(g, pts3, "surface data").reshape(pts2.shape[:2])
        local = area[:, None] * np.einsum("eq,q,qi->ei", gv, w, bary)
        np.add.at(b, surface.volume_nodes[surface.triangles].ravel(), local.ravel())
    return b


def assemble_load(mesh, surface, f, g, dofs: DofMap) -> np.ndarray:
    return dofs.restrict(assemble_load_full(mesh, surface, f, g))


@dataclass
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dofs: DofMap

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def symmetry_defect(self) -> float:
        """Largest ``|A_ij - A_ji| / max(|A_ii|, |A_jj|)`` over stored entries."""
        a = self.matrix.tocoo()
        at = self.matrix.T.tocsr()
        diff = np.abs(a.data - np.asarray(at[a.row, a.col]).ravel())
        d = np.abs(self.matrix.diagonal())
        scale = np.maximum(d[a.row], d[a.col])
        return float((diff / scale).max()) if len(diff) else 0.0


def assemble_system(mesh: TetMesh, f, g, surface: SurfaceMesh | None = None) -> SparseSystem:
    dofs = DofMap.from_mesh(mesh)
    if surface is None:
        surface = extract_surface(mesh)
    a = assemble_volume_stiffness(mesh, dofs) + assemble_surface_stiffness(surface, dofs)
    a.sort_indices()
    return SparseSystem(a.tocsr(), assemble_load(mesh, surface, f, g, dofs), dofs)


# ---------------------------------------------------------------------------
# solver

@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float   # ||b - A x|| / ||b||, recomputed from scratch


def default_max_iter(n: int) -> int:
    return int(50 * math.sqrt(n) + 1000)


def solve_cg(matrix, b, rel_tol: float = 1e-10, max_iter: int | None = None) -> CGResult:
    """Jacobi-preconditioned conjugate gradients.

    Stops when the true residual satisfies ``||b - A x|| <= rel_tol ||b||``;
    the recursive residual is only used to decide when to check.
    """
    a = sp.csr_matrix(matrix)
    b = np.asarray(b, dtype=float)
    n = len(b)
    if max_iter is None:
        max_iter = default_max_iter(n)
    if not np.all(np.isfinite(b)) or not np.all(np.isfinite(a.data)):
        raise NumericalError("non-finite entries in linear system")
    bnorm = np.linalg.norm(b)
    x = np.zeros(n)
    if bnorm == 0.0:
        return CGResult(x, 0, 0.0)
    diag = a.diagonal()
    if np.any(diag <= 0):
        raise NumericalError("non-positive diagonal entry; matrix is not SPD")
    inv_d = 1.0 / diag
    target = rel_tol * bnorm
    r = b.copy()
    z = inv_d * r
    p = z.copy()
    rz = r @ z
    it = 0
    while it < max_iter:
        ap = a @ p
        pap = p @ ap
        if not np.isfinite(pap) or pap <= 0:
            raise NumericalError("breakdown in conjugate gradients (p^T A p <= 0)")
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        it += 1
        if np.linalg.norm(r) <= target:
            r = b - a @ x
            if np.linalg.norm(r) <= target:
                return CGResult(x, it, float(np.linalg.norm(r) / bnorm))
        z = inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = float(np.linalg.norm(b - a @ x) / bnorm)
    raise ConvergenceError(f"CG did not converge in {max_iter} iterations "
                           f"(relative residual {res:.3e})", x=x, residual=res, iterations=it)


# ---------------------------------------------------------------------------
# driver

@dataclass
class Solution:
    mesh: TetMesh
    values: np.ndarray   # one coefficient per mesh node, 0 at constrained nodes
    meta: dict = field(default_factory=dict)
    _surface: SurfaceMesh | None = field(default=None, repr=False)

    @property
    def surface(self) -> SurfaceMesh:
        if self._surface is None:
            self._surface = extract_surface(self.mesh)
        return self._surface

    def check_constraints(self):
        bad = ~self.mesh.free_mask & (self.values != 0.0)
        if np.any(bad):
            raise ValueError(f"{int(bad.sum())} constrained nodes carry nonzero values")

    @classmethod
    def interpolate(cls, mesh: TetMesh, fn, surface=None):
        """Nodal interpolant of ``fn`` with constrained entries forced to 0."""
        vals = _eval(fn, mesh.nodes, "interpolated")
        vals = np.where(mesh.free_mask, vals, 0.0)
        return cls(mesh, vals, {"interpolant": True}, surface)


def energy(system: SparseSystem, x: np.ndarray) -> float:
    return float(x @ (system.matrix @ x))


def solve_problem(mesh: TetMesh, f, g, rel_tol: float = 1e-10, max_iter: int | None = None,
                  surface: SurfaceMesh | None = None) -> Solution:
    """Assemble and solve; returns nodal values with zeros on constrained nodes."""
    if surface is None:
        surface = extract_surface(mesh)
    system = assemble_system(mesh, f, g, surface)
    res = solve_cg(system.matrix, system.rhs, rel_tol, max_iter)
    values = system.dofs.extend(res.x, mesh.n_nodes)
    meta = dict(mesh.meta)
    meta.update(iterations=res.iterations, residual=res.residual, n_free=system.n,
                energy=energy(system, res.x), load_dot=float(system.rhs @ res.x))
    return Solution(mesh, values, meta, surface)
