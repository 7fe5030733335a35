"""Cross-mesh evaluation, V-norm errors and convergence rates.

The V-norm of ``v`` is ``sqrt(||v||_0^2 + |v|_1^2 + |trace v|_{1,F}^2)`` with
the face seminorm taken in the face chart.  Graded meshes on successive
levels are not nested, so differences are integrated on the finer mesh and
the coarser function is sampled by point location.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, LocationError, UsageError
from .fem import Solution, tet_gradients, tri_gradients
from .meshgen import SurfaceMesh, TetMesh
from .quadrature import TET_DEG2, TRI_DEG2, TRI_DEG4, map_points

BARY_TOL = 1e-10
FALLBACK_TOL = 1e-9
_BATCH = 200_000


class PointLocator:
    """Uniform background grid over the bounding box of a simplex mesh.

    Works for triangles in 2D and tetrahedra in 3D.  Each cell lists the
    simplices whose bounding box overlaps it.
    """

    def __init__(self, nodes, simplices, tol=BARY_TOL, fallback_tol=FALLBACK_TOL):
        self.nodes = np.asarray(nodes, dtype=float)
        self.simplices = np.asarray(simplices, dtype=np.int64)
        self.tol = tol
        self.fallback_tol = fallback_tol
        d = self.nodes.shape[1]
        self.dim = d
        m = len(self.simplices)
        verts = self.nodes[self.simplices]
        self.x0 = verts[:, 0]
        jac = np.stack([verts[:, k] - verts[:, 0] for k in range(1, d + 1)], axis=1)
        self.inv_t = np.transpose(np.linalg.inv(jac), (0, 2, 1))

        lo = self.nodes.min(axis=0)
        hi = self.nodes.max(axis=0)
        pad = 1e-9 * max(1.0, float(np.abs(hi - lo).max()))
        self.lo, self.hi = lo - pad, hi + pad
        res = int(np.clip(round(m ** (1.0 / d)), 4, 128))
        self.res = np.full(d, res)
        self.cell = (self.hi - self.lo) / self.res

        start = self._cell_of(verts.min(axis=1))
        stop = self._cell_of(verts.max(axis=1))
        span = stop - start + 1
        counts = np.prod(span, axis=1)
        owner = np.repeat(np.arange(m), counts)
        k = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        multi = np.empty((len(k), d), dtype=np.int64)
        sp_rep = span[owner]
        for ax in range(d):
            multi[:, ax] = k % sp_rep[:, ax]
            k = k // sp_rep[:, ax]
        cells = self._flat(start[owner] + multi)
        order = np.argsort(cells, kind="stable")
        self.items = owner[order]
        n_cells = int(np.prod(self.res))
        self.ptr = np.concatenate([[0], np.cumsum(np.bincount(cells, minlength=n_cells))])

    @classmethod
    def for_mesh(cls, mesh: TetMesh, **kw):
        return cls(mesh.nodes, mesh.tets, **kw)

    @classmethod
    def for_surface(cls, surface: SurfaceMesh, **kw):
        return cls(surface.nodes, surface.triangles, **kw)

    def _cell_of(self, pts):
        c = np.floor((pts - self.lo) / self.cell).astype(np.int64)
        return np.clip(c, 0, self.res - 1)

    def _flat(self, multi):
        idx = np.zeros(len(multi), dtype=np.int64)
        stride = 1
        for ax in range(self.dim):
            idx += multi[:, ax] * stride
            stride *= self.res[ax]
        return idx

    def barycentric(self, simplex, pts):
        lam = np.einsum("nij,nj->ni", self.inv_t[simplex], pts - self.x0[simplex])
        return np.column_stack([1.0 - lam.sum(axis=1), lam])

    def locate(self, points):
        """Simplex index and barycentric coordinates for each point.

        Points within ``fallback_tol`` of the mesh but outside every simplex
        are clamped onto the best candidate.
        """
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        idx = np.empty(len(pts), dtype=np.int64)
        bary = np.empty((len(pts), self.dim + 1))
        for s in range(0, len(pts), _BATCH):
            i, b = self._locate(pts[s:s + _BATCH])
            idx[s:s + _BATCH] = i
            bary[s:s + _BATCH] = b
        return idx, bary

    def _locate(self, pts):
        n = len(pts)
        cell = self._flat(self._cell_of(pts))
        first = self.ptr[cell]
        count = self.ptr[cell + 1] - first
        found = np.full(n, -1, dtype=np.int64)
        bary = np.zeros((n, self.dim + 1))
        best = np.full(n, -1, dtype=np.int64)
        best_q = np.full(n, -np.inf)
        active = np.flatnonzero(count > 0)
        j = 0
        while len(active):
            cand = self.items[first[active] + j]
            lam = self.barycentric(cand, pts[active])
            q = lam.min(axis=1)
            better = q > best_q[active]
            best[active[better]] = cand[better]
            best_q[active[better]] = q[better]
            hit = q >= -self.tol
            found[active[hit]] = cand[hit]
            bary[active[hit]] = lam[hit]
            j += 1
            keep = ~hit & (count[active] > j)
            active = active[keep]
        miss = np.flatnonzero(found < 0)
        if len(miss):
            self._fallback(pts, miss, best, found, bary)
        return found, bary

    def _fallback(self, pts, miss, best, found, bary):
        cand = best[miss]
        if np.any(cand < 0):
            raise LocationError(f"{int((cand < 0).sum())} points lie outside the mesh grid")
        lam = np.clip(self.barycentric(cand, pts[miss]), 0.0, None)
        lam /= lam.sum(axis=1, keepdims=True)
        proj = np.einsum("nk,nkd->nd", lam, self.nodes[self.simplices[cand]])
        dist = np.linalg.norm(proj - pts[miss], axis=1)
        far = dist > self.fallback_tol
        if np.any(far):
            worst = pts[miss[far][np.argmax(dist[far])]]
            raise LocationError(f"{int(far.sum())} points lie outside the mesh "
                                f"(e.g. {worst.tolist()}, distance {dist[far].max():.3e})")
        found[miss] = cand
        bary[miss] = lam


# ---------------------------------------------------------------------------
# piecewise-linear fields

def tet_field_gradients(mesh: TetMesh, values) -> np.ndarray:
    grads, _ = tet_gradients(mesh.nodes, mesh.tets)
    return np.einsum("eid,ei->ed", grads, values[mesh.tets])


def surface_values(sol: Solution) -> np.ndarray:
    return sol.values[sol.surface.volume_nodes]


def evaluate(sol: Solution, locator: PointLocator | None, points, gradients=False):
    """Values (and optionally gradients) of a P1 solution at arbitrary points."""
    if locator is None:
        locator = PointLocator.for_mesh(sol.mesh)
    idx, lam = locator.locate(points)
    vals = np.einsum("nk,nk->n", lam, sol.values[sol.mesh.tets[idx]])
    if not gradients:
        return vals
    return vals, tet_field_gradients(sol.mesh, sol.values)[idx]


def _check_same_domain(a: TetMesh, b: TetMesh, sa: SurfaceMesh, sb: SurfaceMesh):
    la, ha = a.nodes.min(0), a.nodes.max(0)
    lb, hb = b.nodes.min(0), b.nodes.max(0)
    scale = max(1.0, float(np.abs(ha - la).max()))
    if np.abs(la - lb).max() > 1e-9 * scale or np.abs(ha - hb).max() > 1e-9 * scale:
        raise UsageError("solutions live on domains with different bounding boxes")
    va, vb = a.volumes().sum(), b.volumes().sum()
    if abs(va - vb) > 1e-8 * va:
        raise UsageError("solutions live on domains with different volumes")
    if a.ventcel_tag != b.ventcel_tag or np.abs(sa.axes - sb.axes).max() > 1e-12 \
            or np.abs(sa.origin - sb.origin).max() > 1e-9 * scale:
        raise UsageError("solutions have different Ventcel faces")


@dataclass
class NormParts:
    l2: float
    h1: float
    face: float

    @property
    def total(self) -> float:
        return math.sqrt(self.l2 + self.h1 + self.face)


def vnorm_diff_parts(fine: Solution, coarse: Solution, locator=None,
                     face_locator=None) -> NormParts:
    """Squared V-norm contributions of ``fine - coarse``, integrated on ``fine``."""
    fm, cm = fine.mesh, coarse.mesh
    fs, cs = fine.surface, coarse.surface
    _check_same_domain(fm, cm, fs, cs)
    if locator is None:
        locator = PointLocator.for_mesh(cm)
    if face_locator is None:
        face_locator = PointLocator.for_surface(cs)

    bary, w = TET_DEG2
    grads, vol = tet_gradients(fm.nodes, fm.tets)
    gf = np.einsum("eid,ei->ed", grads, fine.values[fm.tets])
    uf = fine.values[fm.tets] @ bary.T
    pts = map_points(fm.nodes[fm.tets], bary).reshape(-1, 3)
    idx, lam = locator.locate(pts)
    uc = np.einsum("nk,nk->n", lam, coarse.values[cm.tets[idx]]).reshape(uf.shape)
    gc = tet_field_gradients(cm, coarse.values)[idx].reshape(len(fm.tets), len(w), 3)
    l2 = float(np.sum(vol[:, None] * w * (uf - uc) ** 2))
    h1 = float(np.sum(vol[:, None] * w * ((gf[:, None, :] - gc) ** 2).sum(-1)))

    bary2, w2 = TRI_DEG2
    tg, area = tri_gradients(fs.nodes, fs.triangles)
    fv = fine.values[fs.volume_nodes]
    sgf = np.einsum("eid,ei->ed", tg, fv[fs.triangles])
    pts2 = map_points(fs.nodes[fs.triangles], bary2).reshape(-1, 2)
    sidx, _ = face_locator.locate(pts2)
    cg, _ = tri_gradients(cs.nodes, cs.triangles)
    cv = coarse.values[cs.volume_nodes]
    sgc = np.einsum("eid,ei->ed", cg, cv[cs.triangles])[sidx].reshape(len(area), len(w2), 2)
    face = float(np.sum(area[:, None] * w2 * ((sgf[:, None, :] - sgc) ** 2).sum(-1)))
    return NormParts(l2, h1, face)


def vnorm_diff(fine: Solution, coarse: Solution, locator=None, face_locator=None) -> float:
    return vnorm_diff_parts(fine, coarse, locator, face_locator).total


def vnorm(sol: Solution) -> float:
    """Exact V-norm of a single P1 function (element mass and stiffness matrices)."""
    mesh = sol.mesh
    grads, vol = tet_gradients(mesh.nodes, mesh.tets)
    v = sol.values[mesh.tets]
    mass = (np.sum(v, axis=1) ** 2 + np.sum(v ** 2, axis=1)) * vol / 20.0
    g = np.einsum("eid,ei->ed", grads, v)
    s = sol.surface
    tg, area = tri_gradients(s.nodes, s.triangles)
    sg = np.einsum("eid,ei->ed", tg, sol.values[s.volume_nodes][s.triangles])
    return math.sqrt(mass.sum() + np.sum(vol * (g ** 2).sum(1)) + np.sum(area * (sg ** 2).sum(1)))


def _finite(arr, what):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"non-finite {what} at quadrature points")
    return arr


def vnorm_error_exact_parts(sol: Solution, u, grad_u, face_grad=None) -> NormParts:
    """Squared V-norm contributions of ``u - sol`` with analytic ``u``.

    ``u(x)`` and ``grad_u(x)`` take ``(n, 3)`` points; ``face_grad(x)``
    returns chart components ``(n, 2)`` and defaults to the projection of
    ``grad_u`` onto the face plane.
    """
    mesh, s = sol.mesh, sol.surface
    bary, w = TET_DEG2
    grads, vol = tet_gradients(mesh.nodes, mesh.tets)
    gh = np.einsum("eid,ei->ed", grads, sol.values[mesh.tets])
    uh = sol.values[mesh.tets] @ bary.T
    pts = map_points(mesh.nodes[mesh.tets], bary).reshape(-1, 3)
    ue = _finite(u(pts), "exact values").reshape(uh.shape)
    ge = _finite(grad_u(pts), "exact gradients").reshape(len(vol), len(w), 3)
    l2 = float(np.sum(vol[:, None] * w * (ue - uh) ** 2))
    h1 = float(np.sum(vol[:, None] * w * ((ge - gh[:, None, :]) ** 2).sum(-1)))

    bary2, w2 = TRI_DEG2
    tg, area = tri_gradients(s.nodes, s.triangles)
    sg = np.einsum("eid,ei->ed", tg, sol.values[s.volume_nodes][s.triangles])
    p3 = s.to_3d(map_points(s.nodes[s.triangles], bary2).reshape(-1, 2))
    if face_grad is None:
        fe = _finite(grad_u(p3), "exact gradients") @ s.axes.T
    else:
        fe = _finite(face_grad(p3), "exact face gradients")
    fe = fe.reshape(len(area), len(w2), 2)
    face = float(np.sum(area[:, None] * w2 * ((fe - sg[:, None, :]) ** 2).sum(-1)))
    return NormParts(l2, h1, face)


def vnorm_error_exact(sol: Solution, u, grad_u, face_grad=None) -> float:
    return vnorm_error_exact_parts(sol, u, grad_u, face_grad).total


# ---------------------------------------------------------------------------
# face interpolation

def lagrange_interpolate_face(fn, surface: SurfaceMesh) -> np.ndarray:
    """Nodal values of ``fn`` (a function of chart coordinates) on the face."""
    vals = np.asarray(fn(surface.nodes), dtype=float).reshape(len(surface.nodes))
    if not np.all(np.isfinite(vals)):
        raise DataError("non-finite nodal value in face interpolation")
    return vals


def face_h1_error(grad_fn, surface: SurfaceMesh, nodal, rule=TRI_DEG4) -> float:
    """H1 seminorm of ``fn - I fn`` on the face, from the analytic gradient."""
    bary, w = rule
    tg, area = tri_gradients(surface.nodes, surface.triangles)
    gi = np.einsum("eid,ei->ed", tg, np.asarray(nodal)[surface.triangles])
    pts = map_points(surface.nodes[surface.triangles], bary).reshape(-1, 2)
    ge = _finite(grad_fn(pts), "gradient").reshape(len(area), len(w), 2)
    return math.sqrt(float(np.sum(area[:, None] * w * ((ge - gi[:, None, :]) ** 2).sum(-1))))


# ---------------------------------------------------------------------------
# rates and reports

def convergence_rates(values) -> list:
    """``log2(values[k-1] / values[k])`` for consecutive halvings of h."""
    v = [float(x) for x in values]
    if any(not (x > 0) or not math.isfinite(x) for x in v):
        raise DataError("convergence rates need positive finite values")
    return [math.log2(v[k - 1] / v[k]) for k in range(1, len(v))]


@dataclass
class LevelRecord:
    h: float
    n_free: int
    n_tets: int
    value: float | None
    rate: float | None = None


@dataclass
class ConvergenceReport:
    kind: str   # vnorm_diff_successive | vnorm_error_exact | h1_face_interp_error
    records: list = field(default_factory=list)

    KINDS = ("vnorm_diff_successive", "vnorm_error_exact", "h1_face_interp_error")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown report kind {self.kind!r}")

    def add(self, h, n_free, n_tets, value):
        self.records.append(LevelRecord(float(h), int(n_free), int(n_tets), value))
        self._update_rates()

    def _update_rates(self):
        prev = None
        for rec in self.records:
            rec.rate = None
            if rec.value is not None and prev is not None:
                rec.rate = convergence_rates([prev, rec.value])[0]
            prev = rec.value

    @property
    def values(self) -> list:
        return [r.value for r in self.records if r.value is not None]

    @property
    def rates(self) -> list:
        return [r.rate for r in self.records if r.rate is not None]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["h", "n_free", "n_tets", "value", "rate"])
        for r in self.records:
            wr.writerow([repr(r.h), r.n_free, r.n_tets,
                         "" if r.value is None else repr(r.value),
                         "" if r.rate is None else repr(r.rate)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind="vnorm_diff_successive"):
        rep = cls(kind)
        for row in csv.DictReader(io.StringIO(text)):
            rep.records.append(LevelRecord(
                float(row["h"]), int(row["n_free"]), int(row["n_tets"]),
                float(row["value"]) if row["value"] else None,
                float(row["rate"]) if row["rate"] else None))
        return rep

    def format_table(self, title="") -> str:
        lines = [title] if title else []
        lines.append(f"{'h':>10} {'n_free':>9} {'n_tets':>9} {'value':>12} {'rate':>7}")
        for r in self.records:
            k = -math.log2(r.h)
            hs = f"2^-{k:.0f}" if abs(k - round(k)) < 1e-12 else f"{r.h:.4g}"
            val = "" if r.value is None else f"{r.value:.5e}"
            rate = "" if r.rate is None else f"{r.rate:.3f}"
            lines.append(f"{hs:>10} {r.n_free:>9} {r.n_tets:>9} {val:>12} {rate:>7}")
        return "\n".join(lines)
