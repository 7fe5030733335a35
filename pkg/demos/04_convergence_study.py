# %% [markdown]
# # Convergence rates for the reentrant prism
#
# The rate at level h is log2(|u_h - u_2h|_V / |u_{h/2} - u_h|_V), with the
# coarser solution sampled on the finer mesh.  Graded meshes (mu = 0.58)
# approach first order while uniform meshes fall behind.
# Set KMAX = 5 for the full table (about half a minute per column).

# %%
from ventcel.problems import CASE2_FACE, get_problem, prism_domain
from ventcel.study import run_study

KMAX = 4
data = get_problem("const1")

for face, label in (("bottom", "case I"), (CASE2_FACE, "case II")):
    for mu in (0.58, 0.76, 1.0):
        res = run_study(prism_domain(face), mu, 2, KMAX, data)
        print(res.report.format_table(f"{label}, face {face}, mu = {mu}"))
        print()
