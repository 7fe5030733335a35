# %% [markdown]
# # Corner angles, edge exponents and grading admissibility
#
# The cross-section of the reentrant prism is the unit square with the
# triangle (0,0), (1,0), (0.5,0.5) cut away.  Its corner at (0.5,0.5) has
# interior angle 3 pi / 2, so the vertical edge above it is singular.

# %%
import math

from ventcel.geometry import analyze_domain, check_grading_conditions, interior_angle
from ventcel.problems import PRISM_SECTION, prism_domain

for i, p in enumerate(PRISM_SECTION):
    print(i, p, f"{math.degrees(interior_angle(PRISM_SECTION, i)):.1f} deg")

# %%
sing = analyze_domain(prism_domain())
print("singular vertical edges:", sing.singular_edges)
print("lambda_e at corner 1:", sing.lambda_e[1])

# %% [markdown]
# The edge exponent is 2/3.  Grading with mu below it is admissible;
# mu = 0.76 and the uniform mu = 1 violate the edge condition.

# %%
for mu in (0.58, 0.76, 1.0):
    rep = check_grading_conditions(mu, 1.0, sing)
    print(f"mu = {mu}: {'admissible' if rep.passed else 'not admissible'}")

print()
print(check_grading_conditions(1.0, 1.0, sing).format_table())
