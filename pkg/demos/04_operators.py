# %% [markdown]
# # Degenerate elliptic operators and good unknowns
#
# L1 = beta q d^2 + q_x d is symmetric in L^2(q^(alpha-1)); its Dirichlet form is
# -beta int q^alpha u_x w_x. The good unknown s2 combines second derivatives of
# the state into the quantity that obeys the symmetric linearized system.

# %%
import numpy as np

from vacuum_euler.operators import adjointness_defect, apply_operator, dirichlet_form, good_unknowns, inner
from vacuum_euler.state import FluidState, Grid

for n in (200, 400, 800):
    g = Grid.uniform(-1, 1, n)
    q = 1 - g.nodes**2
    q[0] = q[-1] = 0
    s = FluidState(g, q, np.zeros(n), np.ones(n))
    u, w = s.x + 0.3, np.sin(s.x) + s.x**2
    d = {op: adjointness_defect(op, u, w, s) for op in ("L1", "L2", "L5")}
    print(n, " ".join(f"{k}: {v:.2e}" for k, v in d.items()))

# %%
lhs = inner(apply_operator("L1", u, s), w, s, 0.0)
print("<L1 u, w> =", lhs, "  Dirichlet form =", dirichlet_form("L1", u, w, s))

# %% [markdown]
# For q = 1 - x^2 at rest, s2 = -2 + 4x^2 exactly.

# %%
gu = good_unknowns(s, 1)
print("max |s2 - (4x^2 - 2)| =", np.max(np.abs(gu.s2 - (4 * s.x**2 - 2))))
