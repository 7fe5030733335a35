"""Prismatic domains, their singular edges and vertices, and the grading
admissibility conditions that tie mesh exponents to singular exponents.

A domain is a right prism ``P x (0, height)`` over a counter-clockwise simple
polygon ``P``.  Domain vertices are numbered ``0..n-1`` on the bottom and
``n..2n-1`` on the top, and edges are listed vertical first (edge ``i`` above
polygon vertex ``i``), then bottom edges, then top edges (edge ``i`` joins
polygon vertices ``i`` and ``i+1``).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError

ANGLE_TOL = 1e-12

# integer boundary tags used by meshes and mesh files
BOTTOM = 0
TOP = 1
SIDE_OFFSET = 2

_SIDE_RE = re.compile(r"^side\s*[:(]\s*(\d+)\s*\)?$")


def parse_face(selector) -> str:
    """Normalise a face selector to ``'bottom'``, ``'top'`` or ``'side:<i>'``."""
    if isinstance(selector, (int, np.integer)):
        return face_name(int(selector))
    s = str(selector).strip().lower()
    if s in ("bottom", "top"):
        return s
    m = _SIDE_RE.match(s)
    if m is None:
        raise GeometryError(f"unknown face selector {selector!r}")
    return f"side:{int(m.group(1))}"


def face_tag(selector) -> int:
    s = parse_face(selector)
    if s == "bottom":
        return BOTTOM
    if s == "top":
        return TOP
    return SIDE_OFFSET + int(s.split(":")[1])


def face_name(tag: int) -> str:
    if tag == BOTTOM:
        return "bottom"
    if tag == TOP:
        return "top"
    if tag >= SIDE_OFFSET:
        return f"side:{tag - SIDE_OFFSET}"
    raise GeometryError(f"invalid face tag {tag}")


def signed_area(polygon) -> float:
    p = np.asarray(polygon, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) <= 1e-14 else (1 if v > 0 else -1)

    def on_seg(a, b, c):
        return (min(a[0], b[0]) - 1e-14 <= c[0] <= max(a[0], b[0]) + 1e-14
                and min(a[1], b[1]) - 1e-14 <= c[1] <= max(a[1], b[1]) + 1e-14)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4):
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


def validate_polygon(polygon) -> np.ndarray:
    """Return the polygon as an ``(n, 2)`` array or raise :class:`GeometryError`."""
    p = np.asarray(polygon, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
        raise GeometryError("polygon needs at least 3 two-dimensional vertices")
    if not np.all(np.isfinite(p)):
        raise GeometryError("polygon has non-finite coordinates")
    n = len(p)
    edge_len = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    if np.any(edge_len <= 1e-14):
        raise GeometryError("polygon has a zero-length edge")
    if len(np.unique(np.round(p, 14), axis=0)) != n:
        raise GeometryError("polygon has repeated vertices")
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]):
                raise GeometryError(f"polygon edges {i} and {j} intersect")
    if signed_area(p) <= 0:
        raise GeometryError("polygon must be counter-clockwise (positive area)")
    return p


def interior_angle(polygon, i: int) -> float:
    """Interior angle at vertex ``i`` of a CCW polygon, in ``(0, 2*pi)``.

    Reflex corners give values above pi.
    """
    p = np.asarray(polygon, dtype=float)
    n = len(p)
    if not 0 <= i < n:
        raise GeometryError(f"vertex index {i} out of range")
    d_out = p[(i + 1) % n] - p[i]
    d_back = p[(i - 1) % n] - p[i]
    if np.linalg.norm(d_out) <= 1e-14 or np.linalg.norm(d_back) <= 1e-14:
        raise GeometryError(f"degenerate edge at vertex {i}")
    cross = d_out[0] * d_back[1] - d_out[1] * d_back[0]
    dot = float(np.dot(d_out, d_back))
    ang = math.atan2(cross, dot) % (2 * math.pi)
    if ang <= ANGLE_TOL or ang >= 2 * math.pi - ANGLE_TOL:
        raise GeometryError(f"zero interior angle at vertex {i}")
    return ang


def edge_exponent(omega: float) -> float:
    """Singular exponent ``pi / omega`` of an edge with dihedral angle omega."""
    if not (0.0 < omega < 2 * math.pi):
        raise GeometryError(f"dihedral angle {omega} outside (0, 2*pi)")
    return math.pi / omega


@dataclass(frozen=True)
class PrismDomain:
    """Right prism over a CCW polygon with one Ventcel face.

    ``lambda_v`` maps domain vertex indices to user-supplied vertex
    exponents; unlisted vertices are treated as non-singular.
    """

    cross_section: tuple
    height: float
    ventcel_face: str = "bottom"
    lambda_v: dict = field(default_factory=dict)

    def __post_init__(self):
        poly = validate_polygon(self.cross_section)
        object.__setattr__(self, "cross_section", tuple(map(tuple, poly.tolist())))
        if not (self.height > 0 and math.isfinite(self.height)):
            raise GeometryError("height must be positive")
        face = parse_face(self.ventcel_face)
        if face.startswith("side:") and int(face.split(":")[1]) >= len(poly):
            raise GeometryError(f"side face {face} does not exist")
        object.__setattr__(self, "ventcel_face", face)
        lv = {int(k): float(v) for k, v in dict(self.lambda_v).items()}
        for k, v in lv.items():
            if not 0 <= k < 2 * len(poly):
                raise GeometryError(f"lambda_v given for unknown vertex {k}")
            if not v > 0:
                raise GeometryError("lambda_v values must be positive")
        object.__setattr__(self, "lambda_v", lv)

    @property
    def polygon(self) -> np.ndarray:
        return np.array(self.cross_section)

    @property
    def n_corners(self) -> int:
        return len(self.cross_section)

    @property
    def ventcel_tag(self) -> int:
        return face_tag(self.ventcel_face)

    @property
    def area(self) -> float:
        return signed_area(self.cross_section)

    @property
    def volume(self) -> float:
        return self.area * self.height

    def face_tags(self) -> list:
        return [BOTTOM, TOP] + [SIDE_OFFSET + i for i in range(self.n_corners)]

    def face_area(self, selector) -> float:
        tag = face_tag(selector)
        if tag in (BOTTOM, TOP):
            return self.area
        p = self.polygon
        i = tag - SIDE_OFFSET
        return float(np.linalg.norm(p[(i + 1) % len(p)] - p[i])) * self.height

    def vertex(self, k: int) -> np.ndarray:
        n = self.n_corners
        xy = self.cross_section[k % n]
        return np.array([xy[0], xy[1], 0.0 if k < n else self.height])

    def face_vertices(self, selector) -> list:
        """Domain vertex indices of a face, in boundary order."""
        n = self.n_corners
        tag = face_tag(selector)
        if tag == BOTTOM:
            return list(range(n))
        if tag == TOP:
            return list(range(n, 2 * n))
        i = tag - SIDE_OFFSET
        j = (i + 1) % n
        return [i, j, n + j, n + i]


@dataclass(frozen=True)
class SingularityInfo:
    vertical_edge_angles: tuple
    horizontal_edge_angles: tuple
    lambda_e: tuple
    lambda_v: tuple
    face_corner_angles: dict

    @property
    def n_corners(self) -> int:
        return len(self.vertical_edge_angles)

    @property
    def singular_edges(self) -> list:
        return [k for k, lam in enumerate(self.lambda_e) if lam < 1.0 - ANGLE_TOL]

    @property
    def singular_vertices(self) -> list:
        return [k for k, lam in enumerate(self.lambda_v) if lam < 0.5]

    @property
    def singular_corners(self) -> list:
        """Polygon vertices carrying a singular vertical edge."""
        return [k for k in self.singular_edges if k < self.n_corners]

    def incident_edges(self, vertex: int) -> list:
        n = self.n_corners
        c = vertex % n
        base = n if vertex < n else 2 * n
        return [c, base + c, base + (c - 1) % n]


def analyze_domain(domain: PrismDomain) -> SingularityInfo:
    """Angles and exponents of all edges, vertices and Ventcel face corners."""
    poly = domain.polygon
    n = len(poly)
    vert = tuple(interior_angle(poly, i) for i in range(n))
    horiz = tuple([math.pi / 2] * (2 * n))
    lam_e = tuple(edge_exponent(w) for w in vert + horiz)
    lam_v = tuple(domain.lambda_v.get(k, math.inf) for k in range(2 * n))
    fv = domain.face_vertices(domain.ventcel_face)
    if domain.ventcel_tag in (BOTTOM, TOP):
        corners = {v: vert[v % n] for v in fv}
    else:
        corners = {v: math.pi / 2 for v in fv}
    return SingularityInfo(vert, horiz, lam_e, lam_v, corners)


@dataclass(frozen=True)
class ConditionResult:
    region: str
    condition: str
    lhs: float
    threshold: float
    relation: str  # '<' or '>'
    passed: bool


@dataclass(frozen=True)
class AdmissibilityReport:
    results: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [r for r in self.results if not r.passed]

    def by_condition(self, cond: str) -> list:
        return [r for r in self.results if r.condition == cond]

    def format_table(self) -> str:
        lines = [f"{'region':<8} {'cond':<6} {'lhs':>10} {'rel':^3} {'threshold':>10} "
                 f"{'margin':>10}  status"]
        for r in self.results:
            margin = (r.threshold - r.lhs) if r.relation == "<" else (r.lhs - r.threshold)
            lines.append(f"{r.region:<8} {r.condition:<6} {_fmt(r.lhs):>10} {r.relation:^3} "
                         f"{_fmt(r.threshold):>10} {_fmt(margin):>10}  "
                         f"{'pass' if r.passed else 'FAIL'}")
        return "\n".join(lines)


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def _cond(region, name, lhs, thr, rel) -> ConditionResult:
    ok = lhs < thr if rel == "<" else lhs > thr
    return ConditionResult(region, name, float(lhs), float(thr), rel, bool(ok))


def check_region(region: str, mu: float, nu: float, lambda_e: float = math.inf,
                 lambda_v: float = math.inf, face_angle: float | None = None) -> list:
    """Evaluate the five grading conditions for one macro region.

    ``face_angle`` is the interior angle of the Ventcel face at the region's
    singular vertex; pass None when no singular vertex of the region lies on
    the Ventcel face, which makes the two face conditions vacuous.
    """
    if not (0 < mu <= 1 and 0 < nu <= 1):
        raise ValueError("grading exponents must lie in (0, 1]")
    face_lam = math.inf if face_angle is None else math.pi / face_angle
    return [
        _cond(region, "5.2", mu, lambda_e, "<"),
        _cond(region, "5.3", nu, lambda_v + 0.5, "<"),
        _cond(region, "5.4", 1 / nu + (lambda_v - 0.5) / mu, 1.0, ">"),
        _cond(region, "5.32D", nu, face_lam, "<"),
        _cond(region, "5.42D", 1 / nu + (face_lam - 1) / mu, 1.0, ">"),
    ]


def _per_region(value, region: str, corner: int, default=1.0) -> float:
    if isinstance(value, dict):
        for key in (region, corner, str(corner)):
            if key in value:
                return float(value[key])
        return float(default)
    return float(value)


def check_grading_conditions(mu, nu, sing: SingularityInfo) -> AdmissibilityReport:
    """Admissibility of grading exponents, one macro region per domain vertex.

    ``mu`` and ``nu`` are scalars or dicts keyed by region name (``'v3'``) or
    polygon corner index.  A region's edge exponent is the smallest exponent
    among its singular incident edges.
    """
    n = sing.n_corners
    results = []
    for v in range(2 * n):
        name = f"v{v}"
        lam_e = min((sing.lambda_e[e] for e in sing.incident_edges(v)
                     if sing.lambda_e[e] < 1.0 - ANGLE_TOL), default=math.inf)
        lam_v = sing.lambda_v[v]
        face_angle = None
        if v in sing.face_corner_angles and lam_v < 0.5:
            face_angle = sing.face_corner_angles[v]
        results += check_region(name, _per_region(mu, name, v % n),
                                _per_region(nu, name, v % n), lam_e, lam_v, face_angle)
    return AdmissibilityReport(tuple(results))
