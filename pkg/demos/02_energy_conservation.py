"""
Energy conservation on Henon-Heiles
===================================

The Hamiltonian is a cubic polynomial.  With s = 2 the integrand that carries
the energy change has degree 5, so k = 3 Gauss points integrate it exactly.
"""

# %%
from hbvm import IntegrationPlan, builtin, energy_drift

problem = builtin("henon-heiles")

# %%
# Same step size, same polynomial degree, two quadratures.
drifts = {}
for k in (2, 3, 4):
    run = energy_drift(problem, IntegrationPlan(tf=100.0, n_steps=1000, k=k, s=2))
    drifts[k] = run.max_drift
    print(f"k={k}: max |H(t) - H(0)| = {run.max_drift:.3e}")

# %%
# k = 2 is the 2-stage Gauss method: bounded but visible oscillation in H.
# k >= 3 leaves only round-off.
print("ratio k=2 / k=3:", drifts[2] / drifts[3])

# %%
# The trajectory itself is available from the drift run.
traj = run.trajectory
q = traj.states[0][:, :2]
print("final position:", q[-1])
print("mean solver iterations per step:", traj.iterations[1:].mean())
