import functools

import numpy as np
import pytest

from ventcel import meshgen, problems
from ventcel.geometry import PrismDomain
from ventcel.study import run_study

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def prism_study(face, mu, k_min=2, k_max=5):
    return run_study(problems.prism_domain(face), mu, k_min, k_max,
                     problems.get_problem("const1"))


@functools.lru_cache(maxsize=None)
def cube_study(k_min=2, k_max=5):
    return run_study(problems.cube_domain(), 1.0, k_min, k_max, problems.manufactured_cube())


@functools.lru_cache(maxsize=None)
def prism_mesh(k, mu=1.0, face="bottom"):
    return meshgen.generate_mesh(problems.prism_domain(face), meshgen.GradingSpec.for_level(k, mu))


L_SHAPE = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (0.0, -1.0))


def corner_fn(x):
    """r^(2/3) sin(2 theta / 3) about the origin, theta in [0, 3 pi / 2]."""
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0]) % (2 * np.pi)
    return r ** (2 / 3) * np.sin(2 * th / 3)


def corner_grad(x):
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0]) % (2 * np.pi)
    ur = (2 / 3) * r ** (-1 / 3) * np.sin(2 * th / 3)
    ut = (2 / 3) * r ** (-1 / 3) * np.cos(2 * th / 3)
    return np.column_stack([ur * np.cos(th) - ut * np.sin(th),
                            ur * np.sin(th) + ut * np.cos(th)])


def l_shape_face(k, mu=1.0):
    dom = PrismDomain(L_SHAPE, 1.0)
    tri = meshgen.triangulate_cross_section(dom, 2.0 ** -k)
    if mu < 1:
        tri = meshgen.apply_grading(tri, (0.0, 0.0), mu, meshgen.default_grading_radius(dom, 0))
    return meshgen.SurfaceMesh.from_trimesh(tri)


@pytest.fixture
def square_domain():
    return PrismDomain(problems.UNIT_SQUARE, 1.0, "bottom")


@pytest.fixture
def prism():
    return problems.prism_domain()
