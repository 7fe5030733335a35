"""Quadrature rules on simplices, given as barycentric points and weights.

Weights sum to one; multiply by the element measure.
"""
import numpy as np

_A = 0.5854101966249685
_B = 0.1381966011250105

# 4-point rule on the tetrahedron, exact for degree 2
TET_DEG2 = (np.array([[_A, _B, _B, _B], [_B, _A, _B, _B], [_B, _B, _A, _B], [_B, _B, _B, _A]]),
            np.full(4, 0.25))

# edge-midpoint rule on the triangle, exact for degree 2
TRI_MIDPOINTS = (np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
                 np.full(3, 1.0 / 3.0))

# interior 3-point rule on the triangle, exact for degree 2; avoids element edges
TRI_DEG2 = (np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
            np.full(3, 1.0 / 3.0))


def _tri_deg4():
    a1, w1 = 0.445948490915965, 0.223381589678011
    a2, w2 = 0.091576213509771, 0.109951743655322
    pts, wts = [], []
    for a, w in ((a1, w1), (a2, w2)):
        b = 1 - 2 * a
        pts += [[a, a, b], [a, b, a], [b, a, a]]
        wts += [w] * 3
    return np.array(pts), np.array(wts)


# 6-point Dunavant rule, exact for degree 4
TRI_DEG4 = _tri_deg4()


def map_points(verts, bary) -> np.ndarray:
    """Physical quadrature points, shape (n_elem, n_qp, dim)."""
    return np.einsum("qk,ekd->eqd", bary, verts)
