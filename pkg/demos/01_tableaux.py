"""
Butcher tableaux of HBVM(k,s)
=============================

The k-stage tableau is a rank-s product of Legendre operators.  With k = s it
is the Gauss collocation method; larger k keeps the rank fixed.
"""

# %%
import numpy as np

from hbvm import build_operators, operator_residuals, rk_tableau, rkn_tableau

np.set_printoptions(precision=6, suppress=True)

# %%
# The one-point method is the implicit midpoint rule.
print(rk_tableau(build_operators(1, 1)).A)

# %%
# Two points, degree two: the classical 2-stage Gauss method.
tab = rk_tableau(build_operators(2, 2))
print(tab.A)
print(tab.b, tab.c)

# %%
# Four points, degree two.  The matrix is 4x4 but has rank 2.
ops = build_operators(2, 4)
A = rk_tableau(ops).A
print(A)
print("rank:", np.linalg.matrix_rank(A))

# %%
# The discrete operators satisfy the two identities the method rests on.
print(operator_residuals(ops))

# %%
# Nystrom form for y'' = f(y): the position weights are b*(1-c).
rkn = rkn_tableau(ops)
print(rkn.Abar)
print(rkn.bbar, rkn.b * (1 - rkn.c))
