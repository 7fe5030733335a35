# %% [markdown]
# # One Ventcel solve
#
# f = 1 in the prism, g = 0 on the Ventcel face (the bottom).  All other
# faces and the rim of the bottom face carry homogeneous Dirichlet data.

# %%
import numpy as np

from ventcel import fem, fileio
from ventcel.analysis import vnorm
from ventcel.meshgen import GradingSpec, generate_mesh
from ventcel.problems import prism_domain

mesh = generate_mesh(prism_domain(), GradingSpec.for_level(3, 0.58))
sol = fem.solve_problem(mesh, lambda x: np.ones(len(x)), lambda x: np.zeros(len(x)))
m = sol.meta
print(f"{m['n_free']} unknowns, {m['iterations']} CG iterations, residual {m['residual']:.2e}")
print(f"a(u_h, u_h) = {m['energy']:.12f}, b^T x = {m['load_dot']:.12f}")
print(f"V-norm of u_h: {vnorm(sol):.6f}")

# %% [markdown]
# The trace on the Ventcel face is not forced to zero; only its rim is.

# %%
face = sol.values[sol.surface.volume_nodes]
print("max on the bottom face:", face.max(), " max overall:", sol.values.max())

# %%
# write files for ParaView
fileio.write_solution_vtk(sol, "u_demo.vtk")
fileio.write_vector(sol.values, "u_demo.txt")
