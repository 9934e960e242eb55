"""Independent reference paths for cross-checking the Fourier-coefficient solver.

The stage-form steppers iterate directly on the k stage values of the
Runge-Kutta (or Nystrom) tableau and share nothing with :mod:`hbvm.solver`.
The collocation oracle builds Gauss tableaux from Lagrange polynomials and
so does not touch the Legendre operators at all.
"""
import numpy as np
from numpy.polynomial import Polynomial

from .quadrature import gauss_rule
from .tableau import RKTableau, eval_a_s, eval_abar_s

__all__ = [
    "StageConvergenceError",
    "stage_step_1st",
    "stage_step_2nd",
    "gauss_collocation_oracle",
    "kernel_quadrature_check",
]


class StageConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _settings(cfg):
    if cfg is None:
        return 1e-13, 200
    return cfg.tol, cfg.max_iters


def _field(problem, Y):
    return np.array([problem.rhs(Yi) for Yi in Y])


def stage_step_1st(problem, y0, h, tab, cfg=None):
    """One step of ``Y = e y0 + h A f(Y)``, ``y1 = y0 + h sum b_i f(Y_i)``."""
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    tol, max_iters = _settings(cfg)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    A = np.asarray(tab.A)
    Y = np.tile(y0, (len(tab.c), 1))
    for _ in range(max_iters):
        F = _field(problem, Y)
        Y_new = y0 + h * (A @ F)
        delta = float(np.max(np.abs(Y_new - Y)))
        Y = Y_new
        if delta <= tol * (1.0 + float(np.max(np.abs(Y)))):
            break
    else:
        raise StageConvergenceError(f"stage iteration did not converge (last change {delta:.3e})", delta)
    F = _field(problem, Y)
    return y0 + h * (tab.b @ F)


def stage_step_2nd(problem, y0, yd0, h, tab, cfg=None):
    """One step of ``Y = e y0 + h c y0' + h^2 Abar f(Y)``.

    Returns ``(y1, y1')`` with ``y1 = y0 + h y0' + h^2 sum bbar_i f(Y_i)``
    and ``y1' = y0' + h sum b_i f(Y_i)``.
    """
    if not h > 0:
        raise ValueError(f"step size must be positive, got {h}")
    tol, max_iters = _settings(cfg)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    yd0 = np.atleast_1d(np.asarray(yd0, dtype=float))
    base = y0 + h * np.outer(tab.c, yd0)
    Abar = np.asarray(tab.Abar)
    Y = base.copy()
    for _ in range(max_iters):
        F = _field(problem, Y)
        Y_new = base + h * h * (Abar @ F)
        delta = float(np.max(np.abs(Y_new - Y)))
        Y = Y_new
        if delta <= tol * (1.0 + float(np.max(np.abs(Y)))):
            break
    else:
        raise StageConvergenceError(f"stage iteration did not converge (last change {delta:.3e})", delta)
    F = _field(problem, Y)
    return y0 + h * yd0 + h * h * (tab.bbar @ F), yd0 + h * (tab.b @ F)


def gauss_collocation_oracle(s):
    """s-stage Gauss collocation tableau from ``A_ij = int_0^{c_i} l_j``.

    ``l_j`` is the Lagrange polynomial on the Gauss nodes.
    """
    if s not in (1, 2, 3):
        raise ValueError(f"oracle supports s in {{1, 2, 3}}, got {s}")
    c = np.asarray(gauss_rule(s).c)
    A = np.empty((s, s))
    b = np.empty(s)
    for j in range(s):
        others = np.delete(c, j)
        lj = Polynomial.fromroots(others) if others.size else Polynomial([1.0])
        lj = lj / lj(c[j])
        L = lj.integ()
        b[j] = L(1.0)
        for i in range(s):
            A[i, j] = L(c[i])
    return RKTableau(A=A, b=b, c=c)


def kernel_quadrature_check(s, grid=20):
    """Max over a grid of ``|abar_s(c, t) - int_0^1 a_s(c, x) a_s(x, t) dx|``.

    The integrand has degree ``2s - 1`` in ``x``, so a 2s-point Gauss rule
    integrates it exactly.
    """
    if not 1 <= s <= 6:
        raise ValueError(f"s must be in [1, 6], got {s}")
    points = np.linspace(0.0, 1.0, grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
    rule = gauss_rule(2 * s)
    worst = 0.0
    for c in points:
        left = [eval_a_s(s, c, x) for x in rule.c]
        for t in points:
            quad = sum(w * a * eval_a_s(s, x, t) for w, a, x in zip(rule.b, left, rule.c))
            worst = max(worst, abs(eval_abar_s(s, c, t) - quad))
    return float(worst)
