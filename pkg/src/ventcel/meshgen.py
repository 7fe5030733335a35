"""Conforming tetrahedral meshes of prisms, graded toward singular edges.

Pipeline: ear-clip the cross-section into macro triangles, refine uniformly
by edge midpoints, pull nodes toward each singular corner with the radial
power map ``r -> R0 (r/R0)**(1/mu)``, and extrude in uniform layers.  Prisms
are split into three tetrahedra with the lowest-global-index diagonal rule,
which makes neighbouring prisms agree on shared quadrilateral faces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, GradingError
from .geometry import (BOTTOM, SIDE_OFFSET, TOP, PrismDomain, analyze_domain,
                       face_tag)

INTERIOR = 0
DIRICHLET = 1
VENTCEL_INTERIOR = 2
VENTCEL_BOUNDARY = 3

NODE_CLASS_NAMES = ("interior", "dirichlet", "ventcel_interior", "ventcel_boundary")


# ---------------------------------------------------------------------------
# 2D cross-section meshes

@dataclass
class TriMesh2D:
    nodes: np.ndarray          # (n, 2)
    triangles: np.ndarray      # (m, 3), counter-clockwise
    boundary_edges: np.ndarray  # (b, 2)
    edge_tags: np.ndarray      # (b,) polygon edge index

    def areas(self) -> np.ndarray:
        return triangle_areas(self.nodes, self.triangles)

    def size(self) -> float:
        """Characteristic size: leg of the equal-area right isosceles triangle."""
        return float(np.sqrt(2.0 * self.areas().max()))

    def check(self, polygon=None, tol=1e-12):
        """Raise GeometryError unless the mesh is conforming and positively oriented."""
        if np.any(self.areas() <= 0):
            raise GeometryError("triangle with non-positive area")
        edges = np.sort(np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]],
                                        self.triangles[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise GeometryError("edge shared by more than two triangles")
        bnd = uniq[counts == 1]
        given = np.unique(np.sort(self.boundary_edges, axis=1), axis=0)
        if len(bnd) != len(given) or np.any(bnd != given):
            raise GeometryError("boundary edge list does not match mesh boundary")
        if polygon is not None:
            p = np.asarray(polygon, dtype=float)
            a = p[self.edge_tags]
            b = p[(self.edge_tags + 1) % len(p)]
            for col in (0, 1):
                x = self.nodes[self.boundary_edges[:, col]]
                d = _point_segment_distance_2d(x, a, b)
                if d.max() > tol:
                    raise GeometryError("boundary node off the polygon boundary")


def triangle_areas(nodes, tris) -> np.ndarray:
    p0, p1, p2 = nodes[tris[:, 0]], nodes[tris[:, 1]], nodes[tris[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))


def _point_segment_distance_2d(x, a, b):
    ab = b - a
    t = np.clip(np.einsum("ij,ij->i", x - a, ab) / np.einsum("ij,ij->i", ab, ab), 0, 1)
    return np.linalg.norm(x - (a + t[:, None] * ab), axis=1)


def _min_angle(p, q, r) -> float:
    ang = []
    for u, v, w in ((p, q, r), (q, r, p), (r, p, q)):
        a, b = v - u, w - u
        ang.append(math.atan2(abs(a[0] * b[1] - a[1] * b[0]), float(np.dot(a, b))))
    return min(ang)


def _in_closed_triangle(x, a, b, c, eps=1e-14) -> bool:
    def cr(u, v, w):
        return (v[0] - u[0]) * (w[1] - u[1]) - (v[1] - u[1]) * (w[0] - u[0])
    return cr(a, b, x) >= -eps and cr(b, c, x) >= -eps and cr(c, a, x) >= -eps


def ear_clip(polygon) -> np.ndarray:
    """Triangulate a CCW simple polygon, always clipping the best-shaped ear."""
    p = np.asarray(polygon, dtype=float)
    idx = list(range(len(p)))
    tris = []
    while len(idx) > 3:
        best, best_q = None, -1.0
        k = len(idx)
        for pos in range(k):
            a, i, c = idx[pos - 1], idx[pos], idx[(pos + 1) % k]
            u, v = p[i] - p[a], p[c] - p[i]
            if u[0] * v[1] - u[1] * v[0] <= 1e-14:
                continue
            if any(_in_closed_triangle(p[j], p[a], p[i], p[c])
                   for j in idx if j not in (a, i, c)):
                continue
            q = _min_angle(p[a], p[i], p[c])
            if q > best_q + 1e-12:
                best, best_q = pos, q
        if best is None:
            raise GeometryError("ear clipping failed; polygon is degenerate")
        tris.append((idx[best - 1], idx[best], idx[(best + 1) % k]))
        idx.pop(best)
    tris.append(tuple(idx))
    return flip_improve(p, np.array(tris, dtype=np.int64))


def flip_improve(p, tris) -> np.ndarray:
    """Edge flips that raise the smaller min-angle of each adjacent pair (Lawson)."""
    tris = [tuple(t) for t in tris.tolist()]
    changed, sweeps = True, 0
    while changed and sweeps < 100:
        changed, sweeps = False, sweeps + 1
        edges = {}
        for t, tr in enumerate(tris):
            for e in range(3):
                edges.setdefault(frozenset((tr[e], tr[(e + 1) % 3])), []).append(t)
        for key, owners in edges.items():
            if len(owners) != 2:
                continue
            t1, t2 = owners
            a, b = tuple(key)
            c = next(v for v in tris[t1] if v not in key)
            d = next(v for v in tris[t2] if v not in key)
            if _orient(p, c, d, a) * _orient(p, c, d, b) >= 0:
                continue        # quad not strictly convex
            new1, new2 = _ccw(p, (c, d, a)), _ccw(p, (d, c, b))
            if new1 is None or new2 is None:
                continue
            old = min(_min_angle(*p[list(tris[t1])]), _min_angle(*p[list(tris[t2])]))
            new = min(_min_angle(*p[list(new1)]), _min_angle(*p[list(new2)]))
            if new > old + 1e-12:
                tris[t1], tris[t2] = new1, new2
                changed = True
                break
    return np.array(tris, dtype=np.int64)


def _orient(p, i, j, k) -> float:
    a, b, c = p[i], p[j], p[k]
    area = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return area if abs(area) > 1e-14 else 0.0


def _ccw(p, tri):
    area = _orient(p, *tri)
    if area == 0.0:
        return None
    return tri if area > 0 else (tri[0], tri[2], tri[1])


def refine_uniform(mesh: TriMesh2D, levels: int = 1) -> TriMesh2D:
    """Split every triangle into four through its edge midpoints, ``levels`` times."""
    for _ in range(levels):
        mesh = _refine_once(mesh)
    return mesh


def _refine_once(mesh: TriMesh2D) -> TriMesh2D:
    n = len(mesh.nodes)
    t = mesh.triangles
    m = len(t)
    e = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(e, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mid = (n + inv).reshape(3, m).T
    mab, mbc, mca = mid[:, 0], mid[:, 1], mid[:, 2]
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    tris = np.stack([np.stack([a, mab, mca], 1), np.stack([mab, b, mbc], 1),
                     np.stack([mca, mbc, c], 1), np.stack([mab, mbc, mca], 1)], axis=1)
    nodes = np.vstack([mesh.nodes, 0.5 * (mesh.nodes[uniq[:, 0]] + mesh.nodes[uniq[:, 1]])])

    keys = uniq[:, 0] * (n + 1) + uniq[:, 1]
    be = mesh.boundary_edges
    bs = np.sort(be, axis=1)
    bm = n + np.searchsorted(keys, bs[:, 0] * (n + 1) + bs[:, 1])
    new_edges = np.stack([np.stack([be[:, 0], bm], 1), np.stack([bm, be[:, 1]], 1)], axis=1)
    return TriMesh2D(nodes, tris.reshape(-1, 3), new_edges.reshape(-1, 2),
                     np.repeat(mesh.edge_tags, 2))


def triangulate_cross_section(domain: PrismDomain, h0: float) -> TriMesh2D:
    """Conforming triangulation of the cross-section with ``size() <= h0``.

    Macro triangles come from ear clipping.  Each singular corner is a vertex
    of every triangle it touches; if a macro triangle has two singular
    corners, one extra refinement separates them.
    """
    poly = domain.polygon
    n = len(poly)
    tris = ear_clip(poly)
    mesh = TriMesh2D(poly.copy(), tris,
                     np.stack([np.arange(n), (np.arange(n) + 1) % n], 1).astype(np.int64),
                     np.arange(n, dtype=np.int64))
    sing = set(analyze_domain(domain).singular_corners)
    levels = 0
    if any(len(sing.intersection(tr)) > 1 for tr in tris.tolist()):
        levels = 1
    size = mesh.size()
    while size * 0.5 ** levels > h0 * (1 + 1e-12):
        levels += 1
    return refine_uniform(mesh, levels)


def default_grading_radius(domain: PrismDomain, corner: int) -> float:
    """Half the distance from a corner to the nearest non-adjacent polygon edge."""
    return 0.5 * _nonadjacent_distance(domain.polygon, corner)


def _nonadjacent_distance(poly, corner) -> float:
    n = len(poly)
    others = [j for j in range(n) if j not in (corner, (corner - 1) % n)]
    x = np.repeat(poly[corner][None, :], len(others), axis=0)
    a = poly[others]
    b = poly[[(j + 1) % n for j in others]]
    return float(_point_segment_distance_2d(x, a, b).min())


def apply_grading(mesh: TriMesh2D, corner, mu: float, R0: float,
                  coarse_area: float | None = None) -> TriMesh2D:
    """Move nodes within ``R0`` of ``corner`` radially to ``R0 (r/R0)**(1/mu)``."""
    if not 0 < mu <= 1:
        raise GradingError(f"grading exponent {mu} outside (0, 1]")
    if not R0 > 0:
        raise GradingError("grading radius must be positive")
    corner = np.asarray(corner, dtype=float)
    d = mesh.nodes - corner
    r = np.linalg.norm(d, axis=1)
    if r.min() > 1e-12:
        raise GradingError("grading corner is not a mesh node")
    nodes = mesh.nodes.copy()
    inside = (r > 0) & (r < R0)
    if mu != 1.0:
        scale = (r[inside] / R0) ** (1.0 / mu) * R0 / r[inside]
        nodes[inside] = corner + d[inside] * scale[:, None]
    graded = TriMesh2D(nodes, mesh.triangles.copy(), mesh.boundary_edges.copy(),
                       mesh.edge_tags.copy())
    ref = coarse_area if coarse_area is not None else float(mesh.areas().sum())
    if np.any(graded.areas() < 1e-14 * ref):
        raise GradingError("grading inverted or flattened a triangle; reduce h0 or R0")
    return graded


# ---------------------------------------------------------------------------
# 3D meshes

@dataclass
class TetMesh:
    nodes: np.ndarray        # (n, 3)
    tets: np.ndarray         # (m, 4), positive orientation
    bfaces: np.ndarray       # (k, 3)
    btags: np.ndarray        # (k,)
    ventcel_tag: int
    node_class: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.node_class is None:
            self.node_class = classify_nodes(len(self.nodes), self.bfaces, self.btags,
                                             self.ventcel_tag)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    def volumes(self) -> np.ndarray:
        return tet_volumes(self.nodes, self.tets)

    @property
    def free_mask(self) -> np.ndarray:
        return (self.node_class == INTERIOR) | (self.node_class == VENTCEL_INTERIOR)

    def check(self):
        """Raise GeometryError unless conforming, positively oriented and closed."""
        if np.any(self.volumes() <= 0):
            raise GeometryError("tetrahedron with non-positive volume")
        t = self.tets
        faces = np.sort(np.concatenate([t[:, [1, 2, 3]], t[:, [0, 2, 3]], t[:, [0, 1, 3]],
                                        t[:, [0, 1, 2]]]), axis=1)
        uniq, counts = np.unique(faces, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise GeometryError("facet shared by more than two tetrahedra")
        bnd = uniq[counts == 1]
        given, gcount = np.unique(np.sort(self.bfaces, axis=1), axis=0, return_counts=True)
        if np.any(gcount != 1):
            raise GeometryError("boundary facet listed more than once")
        if len(bnd) != len(given) or np.any(bnd != given):
            raise GeometryError("tagged boundary facets do not match mesh boundary")


def tet_volumes(nodes, tets) -> np.ndarray:
    p0 = nodes[tets[:, 0]]
    m = np.stack([nodes[tets[:, 1]] - p0, nodes[tets[:, 2]] - p0, nodes[tets[:, 3]] - p0], 1)
    return np.linalg.det(m) / 6.0


def classify_nodes(n_nodes, bfaces, btags, ventcel_tag) -> np.ndarray:
    on_v = np.zeros(n_nodes, bool)
    on_d = np.zeros(n_nodes, bool)
    sel = btags == ventcel_tag
    on_v[bfaces[sel].ravel()] = True
    on_d[bfaces[~sel].ravel()] = True
    cls = np.full(n_nodes, INTERIOR, dtype=np.int8)
    cls[on_d] = DIRICHLET
    cls[on_v & ~on_d] = VENTCEL_INTERIOR
    cls[on_v & on_d] = VENTCEL_BOUNDARY
    return cls


def extrude_to_tets(mesh: TriMesh2D, domain: PrismDomain, Nz: int) -> TetMesh:
    """Extrude a cross-section mesh into ``Nz`` uniform layers of tetrahedra."""
    if Nz < 1:
        raise ValueError("need at least one layer")
    n2 = len(mesh.nodes)
    z = np.linspace(0.0, domain.height, Nz + 1)
    nodes = np.column_stack([np.tile(mesh.nodes, (Nz + 1, 1)), np.repeat(z, n2)])

    s = np.sort(mesh.triangles, axis=1)
    off = (np.arange(Nz) * n2)[:, None]
    a = (s[:, 0][None, :] + off).ravel()
    b = (s[:, 1][None, :] + off).ravel()
    c = (s[:, 2][None, :] + off).ravel()
    a1, b1, c1 = a + n2, b + n2, c + n2
    tets = np.stack([np.stack([a, b, c, c1], 1), np.stack([a, b, b1, c1], 1),
                     np.stack([a, a1, b1, c1], 1)], axis=1).reshape(-1, 4)
    neg = tet_volumes(nodes, tets) < 0
    tets[neg] = tets[neg][:, [0, 1, 3, 2]]

    top_off = Nz * n2
    bottom = mesh.triangles[:, [0, 2, 1]]
    top = mesh.triangles + top_off
    be = mesh.boundary_edges
    lo = np.minimum(be[:, 0], be[:, 1])
    hi = np.maximum(be[:, 0], be[:, 1])
    # keep outward orientation: edge (p, q) runs CCW along the polygon
    flip = be[:, 0] != lo
    side_tris, side_tags = [], []
    for layer in range(Nz):
        o = layer * n2
        t1 = np.stack([lo + o, hi + o, hi + o + n2], 1)
        t2 = np.stack([lo + o, hi + o + n2, lo + o + n2], 1)
        t1[flip] = t1[flip][:, [0, 2, 1]]
        t2[flip] = t2[flip][:, [0, 2, 1]]
        side_tris += [t1, t2]
        side_tags += [mesh.edge_tags + SIDE_OFFSET] * 2
    bfaces = np.vstack([bottom, top] + side_tris).astype(np.int64)
    btags = np.concatenate([np.full(len(bottom), BOTTOM), np.full(len(top), TOP)]
                           + side_tags).astype(np.int64)
    return TetMesh(nodes, tets.astype(np.int64), bfaces, btags, domain.ventcel_tag)


@dataclass(frozen=True)
class GradingSpec:
    """Mesh parameters for one refinement level.

    ``mu`` is a scalar applied to every singular corner, or a dict from
    corner index to exponent.  ``R0`` None selects the default radius per
    corner; ``Nz`` None selects ``round(height / h)``.
    """

    h: float
    mu: object = 1.0
    R0: float | None = None
    Nz: int | None = None

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ValueError("global mesh parameter h must lie in (0, 1)")
        mus = self.mu.values() if isinstance(self.mu, dict) else [self.mu]
        if any(not 0 < float(m) <= 1 for m in mus):
            raise ValueError("grading exponent mu must lie in (0, 1]")
        if self.R0 is not None and not self.R0 > 0:
            raise ValueError("grading radius must be positive")

    @classmethod
    def for_level(cls, k: int, mu=1.0, R0=None):
        return cls(h=2.0 ** -k, mu=mu, R0=R0)

    def mu_at(self, corner: int) -> float:
        if isinstance(self.mu, dict):
            return float(self.mu.get(corner, 1.0))
        return float(self.mu)

    def layers(self, domain: PrismDomain) -> int:
        return self.Nz if self.Nz is not None else max(1, int(round(domain.height / self.h)))


def generate_mesh(domain: PrismDomain, spec: GradingSpec) -> TetMesh:
    """Full pipeline: triangulate, refine to size ``h``, grade, extrude."""
    tri = triangulate_cross_section(domain, spec.h)
    area = domain.area
    poly = domain.polygon
    for c in analyze_domain(domain).singular_corners:
        mu = spec.mu_at(c)
        limit = _nonadjacent_distance(poly, c)
        R0 = spec.R0 if spec.R0 is not None else 0.5 * limit
        if R0 > limit * (1 + 1e-12):
            raise GradingError(f"grading radius {R0} exceeds corner clearance {limit}")
        tri = apply_grading(tri, poly[c], mu, R0, coarse_area=area)
    mesh = extrude_to_tets(tri, domain, spec.layers(domain))
    mesh.meta.update(h=spec.h, mu=spec.mu)
    return mesh


# ---------------------------------------------------------------------------
# surface extraction

@dataclass
class SurfaceMesh:
    """Triangulation of one planar boundary face with an isometric 2D chart.

    A chart point ``(s, t)`` sits at ``origin + s * axes[0] + t * axes[1]``.
    """

    nodes: np.ndarray         # (ns, 2) chart coordinates
    triangles: np.ndarray     # (ms, 3), CCW in the chart
    volume_nodes: np.ndarray  # (ns,) volume node index of each surface node
    origin: np.ndarray
    axes: np.ndarray          # (2, 3) orthonormal
    tag: int = -1

    def to_3d(self, pts2d) -> np.ndarray:
        pts2d = np.asarray(pts2d, dtype=float)
        return self.origin + pts2d[:, :1] * self.axes[0] + pts2d[:, 1:2] * self.axes[1]

    def areas(self) -> np.ndarray:
        return triangle_areas(self.nodes, self.triangles)

    @classmethod
    def from_trimesh(cls, tri: TriMesh2D):
        """Planar surface in the z = 0 plane with identity chart."""
        return cls(tri.nodes.copy(), tri.triangles.copy(), np.arange(len(tri.nodes)),
                   np.zeros(3), np.eye(3)[:2], -1)


def extract_surface(mesh: TetMesh, face=None) -> SurfaceMesh:
    """Boundary triangles of one tagged face with an isometric chart."""
    tag = mesh.ventcel_tag if face is None else face_tag(face)
    sel = mesh.btags == tag
    if not np.any(sel):
        raise GeometryError(f"no boundary triangles carry tag {tag}")
    faces = mesh.bfaces[sel]
    vnodes, local = np.unique(faces, return_inverse=True)
    local = local.reshape(faces.shape)
    x = mesh.nodes[vnodes]
    p = mesh.nodes[faces[0]]
    normal = np.cross(p[1] - p[0], p[2] - p[0])
    normal /= np.linalg.norm(normal)
    # make the normal point out of the domain using the adjacent tet
    hit = np.isin(mesh.tets, faces[0]).sum(axis=1) == 3
    tet = mesh.tets[np.argmax(hit)]
    inner = mesh.nodes[tet[~np.isin(tet, faces[0])][0]]
    if np.dot(inner - p[0], normal) > 0:
        normal = -normal
    planar = np.abs((x - p[0]) @ normal).max()
    if planar > 1e-9 * max(1.0, np.abs(x).max()):
        raise GeometryError("selected face is not planar")
    if abs(abs(normal[2]) - 1.0) < 1e-12:
        axes = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        origin = np.array([0.0, 0.0, p[0][2]])
    else:
        e2 = np.array([0.0, 0.0, 1.0]) - normal[2] * normal
        e2 /= np.linalg.norm(e2)
        e1 = np.cross(e2, normal)
        axes = np.array([e1, e2])
        origin = (x @ axes.T).min(axis=0) @ axes + (p[0] @ normal) * normal
    chart = (x - origin) @ axes.T
    tris = local.copy()
    neg = triangle_areas(chart, tris) < 0
    tris[neg] = tris[neg][:, [0, 2, 1]]
    if np.any(triangle_areas(chart, tris) <= 0):
        raise GeometryError("degenerate surface triangle")
    return SurfaceMesh(chart, tris, vnodes, origin, axes, tag)


# ---------------------------------------------------------------------------
# size report

def closest_point_on_triangle(p, a, b, c) -> np.ndarray:
    """Row-wise closest point of triangles ``(a, b, c)`` to points ``p`` (all (m, 3))."""
    def dot(u, v):
        return np.einsum("ij,ij->i", u, v)

    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = dot(ab, ap), dot(ac, ap)
    bp = p - b
    d3, d4 = dot(ab, bp), dot(ac, bp)
    cp = p - c
    d5, d6 = dot(ab, cp), dot(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    out = np.empty_like(p)
    done = np.zeros(len(p), bool)

    def put(mask, val):
        m = mask & ~done
        out[m] = val[m] if val.ndim == 2 else val
        done[m] = True

    with np.errstate(divide="ignore", invalid="ignore"):
        put((d1 <= 0) & (d2 <= 0), a)
        put((d3 >= 0) & (d4 <= d3), b)
        put((d6 >= 0) & (d5 <= d6), c)
        v = d1 / (d1 - d3)
        put((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v[:, None] * ab)
        w = d2 / (d2 - d6)
        put((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w[:, None] * ac)
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        put((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + w[:, None] * (c - b))
        den = va + vb + vc
        v, w = vb / den, vc / den
        put(np.ones(len(p), bool), a + v[:, None] * ab + w[:, None] * ac)
    return out


_TRIPLES = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))


def _dist_to_hull(verts, p) -> np.ndarray:
    """Distance from points ``p`` (m, 3) to tets ``verts`` (m, 4, 3), 0 inside."""
    d = np.full(len(p), np.inf)
    for i, j, k in _TRIPLES:
        q = closest_point_on_triangle(p, verts[:, i], verts[:, j], verts[:, k])
        d = np.minimum(d, np.linalg.norm(q - p, axis=1))
    m = np.stack([verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0],
                  verts[:, 3] - verts[:, 0]], axis=2)
    good = np.abs(np.linalg.det(m)) > 1e-300
    lam = np.zeros((len(p), 3))
    lam[good] = np.linalg.solve(m[good], (p - verts[:, 0])[good][:, :, None])[:, :, 0]
    inside = good & (lam.min(axis=1) >= -1e-14) & (lam.sum(axis=1) <= 1 + 1e-14)
    d[inside] = 0.0
    return d


def _dist_to_hull_2d(pts, x) -> np.ndarray:
    """Distance from ``x`` (m, 2) to the convex hull of ``pts`` (m, k, 2), 0 inside."""
    m, k = pts.shape[:2]
    d = np.full(m, np.inf)
    inside = np.zeros(m, bool)
    for i in range(k):
        for j in range(i + 1, k):
            a, b = pts[:, i], pts[:, j]
            with np.errstate(divide="ignore", invalid="ignore"):
                seg = _point_segment_distance_2d(x, a, b)
            seg = np.where(np.isnan(seg), np.linalg.norm(x - a, axis=1), seg)
            d = np.minimum(d, seg)
            for l in range(j + 1, k):
                c = pts[:, l]
                s1 = (b[:, 0] - a[:, 0]) * (x[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (x[:, 0] - a[:, 0])
                s2 = (c[:, 0] - b[:, 0]) * (x[:, 1] - b[:, 1]) - (c[:, 1] - b[:, 1]) * (x[:, 0] - b[:, 0])
                s3 = (a[:, 0] - c[:, 0]) * (x[:, 1] - c[:, 1]) - (a[:, 1] - c[:, 1]) * (x[:, 0] - c[:, 0])
                area = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
                same = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | ((s1 <= 0) & (s2 <= 0) & (s3 <= 0))
                inside |= same & (np.abs(area) > 1e-300)
    d[inside] = 0.0
    return d


@dataclass
class MeshSizeReport:
    r: np.ndarray            # distance of each tet to the nearest singular edge
    R: np.ndarray            # distance to the nearest singular vertex (edge end points)
    in_plane: np.ndarray     # diameter of the projection onto the cross-section plane
    vertical: np.ndarray     # extent along the extrusion axis
    mu: np.ndarray           # grading exponent of the nearest singular edge
    h: float

    @property
    def touching(self) -> np.ndarray:
        return self.r <= 1e-12

    @property
    def n_touching(self) -> int:
        return int(self.touching.sum())

    def grading_ratios(self) -> np.ndarray:
        """``in_plane / (h r**(1-mu))`` away from the edge, ``in_plane / h**(1/mu)`` on it."""
        out = np.empty(len(self.r))
        t = self.touching
        finite = np.isfinite(self.r)
        far = ~t & finite
        out[far] = self.in_plane[far] / (self.h * self.r[far] ** (1 - self.mu[far]))
        out[t] = self.in_plane[t] / self.h ** (1 / self.mu[t])
        out[~finite] = self.in_plane[~finite] / self.h
        return out

    def max_log_ratio(self) -> float:
        return float(np.abs(np.log(self.grading_ratios())).max())

    def to_csv(self, path):
        data = np.column_stack([np.arange(len(self.r)), self.r, self.R, self.in_plane,
                                self.vertical])
        with open(path, "w") as fh:
            fh.write("tet,r,R,in_plane,vertical\n")
            for row in data:
                fh.write(f"{int(row[0])},{row[1]:.10e},{row[2]:.10e},{row[3]:.10e},"
                         f"{row[4]:.10e}\n")


def mesh_size_report(mesh: TetMesh, domain: PrismDomain, spec: GradingSpec) -> MeshSizeReport:
    verts = mesh.nodes[mesh.tets]
    m = len(verts)
    flat = verts[:, :, :2]
    diffs = flat[:, :, None] - flat[:, None, :]
    in_plane = np.sqrt((diffs ** 2).sum(-1)).reshape(m, -1).max(axis=1)
    vertical = verts[:, :, 2].max(axis=1) - verts[:, :, 2].min(axis=1)
    r = np.full(m, np.inf)
    R = np.full(m, np.inf)
    mu = np.ones(m)
    poly = domain.polygon
    for c in analyze_domain(domain).singular_corners:
        q = np.zeros((m, 3))
        q[:, :2] = poly[c]
        rc = _dist_to_hull_2d(flat, q[:, :2])
        closer = rc < r
        r[closer] = rc[closer]
        mu[closer] = spec.mu_at(c)
        for zc in (0.0, domain.height):
            q3 = q.copy()
            q3[:, 2] = zc
            R = np.minimum(R, _dist_to_hull(verts, q3))
    r[r <= 1e-13] = 0.0
    R[R <= 1e-13] = 0.0
    return MeshSizeReport(r, R, in_plane, vertical, mu, spec.h)
