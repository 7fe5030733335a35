# %% [markdown]
# # Interpolating a corner singularity on a face
#
# u = r^(2/3) sin(2 theta / 3) on the L-shaped face with the reentrant corner
# at the origin.  On uniform meshes the H1 interpolation error decays like
# h^(2/3); grading with mu = 0.58 restores first order.

# %%
import numpy as np

from ventcel.analysis import convergence_rates, face_h1_error, lagrange_interpolate_face
from ventcel.geometry import PrismDomain
from ventcel.meshgen import (SurfaceMesh, apply_grading, default_grading_radius,
                             triangulate_cross_section)

L_SHAPE = ((0, 0), (1, 0), (1, 1), (-1, 1), (-1, -1), (0, -1))
dom = PrismDomain(L_SHAPE, 1.0)


def u(x):
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0]) % (2 * np.pi)
    return r ** (2 / 3) * np.sin(2 * th / 3)


def grad_u(x):
    r = np.hypot(x[:, 0], x[:, 1])
    th = np.arctan2(x[:, 1], x[:, 0]) % (2 * np.pi)
    ur = 2 / 3 * r ** (-1 / 3) * np.sin(2 * th / 3)
    ut = 2 / 3 * r ** (-1 / 3) * np.cos(2 * th / 3)
    return np.column_stack([ur * np.cos(th) - ut * np.sin(th), ur * np.sin(th) + ut * np.cos(th)])


for mu in (1.0, 0.58):
    errs = []
    for k in range(3, 7):
        tri = triangulate_cross_section(dom, 2.0 ** -k)
        if mu < 1:
            tri = apply_grading(tri, (0.0, 0.0), mu, default_grading_radius(dom, 0))
        s = SurfaceMesh.from_trimesh(tri)
        errs.append(face_h1_error(grad_u, s, lagrange_interpolate_face(u, s)))
    print(f"mu = {mu}: errors {np.round(errs, 5)}, rates {np.round(convergence_rates(errs), 3)}")
