# %% [markdown]
# # Monitoring energies along a run with non-constant entropy
#
# The entropy sigma is perturbed away from a constant, so no closed form exists.
# The physical energy and the entropy mass are conserved by the equations; the
# modified energy of order 2 is controlled by exp(C int B dt).

# %%
import numpy as np

from vacuum_euler.energy import fit_gronwall_constant, gronwall_envelope
from vacuum_euler.oracle import AffineOrbit, affine_state
from vacuum_euler.stepper import StepConfig, run

s0 = affine_state(AffineOrbit(0.0, 0.5, 1.0), 401)
s0 = s0.replace(sigma=1 + 0.1 * np.sin(2 * s0.x))
traj = run(s0, 0.5, StepConfig(1e-3), report_every=25)

# %%
print(f"{'t':>6} {'E_phy':>10} {'entropy':>10} {'E2':>10} {'B':>8} {'c':>8}")
for r in traj.reports:
    print(f"{r.t:6.3f} {r.e_phys:10.6f} {r.entropy_mass:10.6f} {r.e2k[1].total:10.6f} "
          f"{r.controls.b:8.4f} {r.nondeg.c:8.4f}")

# %% [markdown]
# The smallest constant whose envelope dominates the recorded energy:

# %%
t = [r.t for r in traj.reports]
e = [r.e2k[1].total for r in traj.reports]
b = [r.controls.b for r in traj.reports]
c = fit_gronwall_constant(t, e, b)
print("C_fit =", c, " least-squares slope =", fit_gronwall_constant(t, e, b, "lstsq"))
print("envelope at T:", gronwall_envelope(list(zip(t, b)), e[0], c)[-1], " energy at T:", e[-1])
