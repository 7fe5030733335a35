"""Data sets for the Ventcel problem and the built-in domains.

Functions take points as ``(n, 3)`` arrays and return ``(n,)`` values or
``(n, 3)`` gradients.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PrismDomain

# cross-section of the reentrant prism: unit square minus the triangle
# (0,0), (1,0), (0.5,0.5); the reentrant corner is polygon vertex 1.
PRISM_SECTION = ((0.0, 0.0), (0.5, 0.5), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
UNIT_SQUARE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
# case II face: side over the edge (0.5,0.5)-(1,0), bordering the singular edge
CASE2_FACE = "side:1"


def prism_domain(ventcel_face="bottom", lambda_v=None) -> PrismDomain:
    return PrismDomain(PRISM_SECTION, 1.0, ventcel_face, lambda_v or {})


def cube_domain(ventcel_face="bottom") -> PrismDomain:
    return PrismDomain(UNIT_SQUARE, 1.0, ventcel_face)


@dataclass(frozen=True)
class Problem:
    f: object
    g: object
    exact: object = None
    grad: object = None

    @property
    def has_exact(self) -> bool:
        return self.exact is not None


def _const(c):
    return lambda x: np.full(len(x), float(c))


def manufactured_cube() -> Problem:
    """``u = sin(pi x) sin(pi y) (1 - z)`` with the Ventcel face at z = 0.

    ``u`` vanishes on the five Dirichlet faces and on the rim of the bottom
    face; ``f = -Laplace u`` and ``g = -Laplace_T u - d_z u`` on z = 0.
    """
    pi = np.pi

    def u(x):
        return np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1]) * (1 - x[:, 2])

    def grad(x):
        sx, sy = np.sin(pi * x[:, 0]), np.sin(pi * x[:, 1])
        cx, cy = np.cos(pi * x[:, 0]), np.cos(pi * x[:, 1])
        z = 1 - x[:, 2]
        return np.column_stack([pi * cx * sy * z, pi * sx * cy * z, -sx * sy])

    def f(x):
        return 2 * pi ** 2 * u(x)

    def g(x):
        return (2 * pi ** 2 + 1) * np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1])

    return Problem(f, g, u, grad)


PROBLEMS = {
    "const1": lambda: Problem(_const(1.0), _const(0.0)),
    "zero": lambda: Problem(_const(0.0), _const(0.0)),
    "manufactured_cube": manufactured_cube,
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise KeyError(f"unknown data set {name!r}; choose from {sorted(PROBLEMS)}") from None
