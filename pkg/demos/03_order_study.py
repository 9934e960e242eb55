"""
Convergence order 2s
====================

Global errors at a fixed final time for a halving ladder of step sizes.
The slope of log(error) against log(h) approaches 2s.
"""

# %%
from hbvm import builtin, order_study

problem = builtin("harmonic")

# %%
for s in (1, 2, 3):
    ladder = [0.5, 0.25, 0.125, 0.0625]
    study = order_study(problem, s, s + 1, ladder, tf=2.0)
    print(f"s={s}")
    print(study.to_csv())

# %%
# Errors below 1e-13 are dominated by round-off and their slopes are flagged
# as unreliable in the CSV.

# %%
# The Kepler problem at eccentricity 0.6 needs smaller steps to reach the
# asymptotic regime.
kepler = builtin("kepler")
study = order_study(kepler, 2, 3, [0.1, 0.05, 0.025, 0.0125], tf=1.0)
print(study.slopes)
