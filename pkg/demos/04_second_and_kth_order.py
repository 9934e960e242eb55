"""
Second- and higher-order equations
==================================

Problems of order n are integrated directly: the unknowns are still s
Fourier coefficients of the highest derivative, independent of n and of k.
"""

# %%
import numpy as np

from hbvm import IntegrationPlan, build_operators, builtin, integrate, step_1st, step_2nd_special

# %%
# A pendulum step through the Nystrom path and through its first-order
# companion system gives the same result.
pendulum = builtin("pendulum")
y0, yd0 = pendulum.initial.derivs
ops = build_operators(2, 4)
direct = step_2nd_special(pendulum, y0, yd0, 0.1, ops)
flat = step_1st(pendulum.as_first_order(), np.concatenate([y0, yd0]), 0.1, ops)
print(np.concatenate(direct.derivs) - flat.y)

# %%
# The Nystrom path solves for m values per coefficient instead of 2m.
print(direct.gamma.shape, flat.gamma.shape)

# %%
# Van der Pol written as y'' = mu (1 - y^2) y' - y: a general second-order
# problem with no energy.
vdp = integrate(builtin("vdpol-2nd"), plan=IntegrationPlan(tf=20.0, n_steps=400, k=3, s=2))
print("amplitude:", np.abs(vdp.states[0]).max())

# %%
# y''' = -y' with energy (y'^2 + y''^2)/2.  Third-order problems need s >= 3.
third = builtin("linear-3rd")
traj = integrate(third, plan=IntegrationPlan(tf=10.0, n_steps=100, k=3, s=3))
exact = third.solution(10.0, third.initial)
print("error at t=10:", [float(abs(a[-1, 0] - b[0])) for a, b in zip(traj.states, exact)])
print("energy drift:", traj.max_energy_drift())

# %%
# Dense output between step points.
sigma = traj.dense(50)
print(sigma(0.5)[0], third.solution(traj.times[50] + 0.05, third.initial)[0])
