# %% [markdown]
# # Weighted norms and interpolation inequalities
#
# Norms weighted by powers of the distance-like function q are evaluated by
# product integration, so negative powers stay accurate up to the boundary.

# %%
import math

import numpy as np

from vacuum_euler.calculus import NormSpec, interpolation_corpus, weighted_integrate, weighted_norm
from vacuum_euler.harness import _hardy_state
from vacuum_euler.oracle import AffineOrbit, affine_state
from vacuum_euler.state import Params

s = affine_state(AffineOrbit(0, 1.0, 1.0), 801)
print("int (1-x^2)^(-1/2) =", weighted_integrate(np.ones(801), s.q, -0.5, s.grid), " pi =", math.pi)
print("H^(2,1) norm of sin(3x):", weighted_norm(np.sin(3 * s.x), s, NormSpec(2, 1.0)))

# %% [markdown]
# The corpus checks each inequality on a few test functions; every ratio of
# left to right side stays bounded and stable under refinement.

# %%
for row in interpolation_corpus(s, _hardy_state(801, Params())):
    print(f"{row.prop_id:6s} {row.f_id:9s} {row.indices:40s} ratio {row.ratio:.4f}")
