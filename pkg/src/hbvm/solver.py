"""One-step HBVM(k, s) maps in Fourier-coefficient form.

For a problem of order ``n`` the unknowns are the ``s`` blocks
``gamma_0..gamma_{s-1}`` (each of state dimension ``m``) of the discrete
Legendre expansion of ``f`` along the step, whatever the number ``k`` of
quadrature nodes.  At node ``c_j`` the derivative of order ``i`` is

    sum_{l < n-i} (c_j h)^l / l! y0^(l+i)  +  h^(n-i) I_s(c_j)^T X_s^(n-1-i) gamma

and ``gamma = P_s^T Omega f(...)``.  First-order problems are ``n = 1``,
both second-order classes are ``n = 2``.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .legendre import LegendreBasis, build_spectral, eval_integrals
from .problems import (
    FirstOrderProblem,
    InitialData,
    KthOrderProblem,
    SecondOrderGeneralProblem,
    SecondOrderSpecialProblem,
)

__all__ = [
    "SolverConfig",
    "GammaSolution",
    "StepResult",
    "DenseOutput",
    "KthOrderUpdateCoeffs",
    "ConvergenceError",
    "NonFiniteError",
    "solve_gamma_1st",
    "step_1st",
    "solve_gamma_2nd_special",
    "step_2nd_special",
    "solve_gamma_2nd_general",
    "step_2nd_general",
    "kth_update_coeffs",
    "solve_gamma_kth",
    "step_kth",
    "step",
    "dense_eval",
    "gamma_residual",
]

SCHEMES = ("fixed-point", "simplified-newton")


@dataclass(frozen=True)
class SolverConfig:
    """Nonlinear solver settings.

    ``tol`` is relative: an iterate is accepted when both the last
    increment and the residual are at most ``tol * (1 + max|gamma|)``.
    With ``jacobian_reuse`` the simplified-Newton iteration matrix of one
    step is handed on to the next instead of being rebuilt at every step.
    """

    tol: float = 1e-13
    max_iters: int = 100
    scheme: str = "fixed-point"
    jacobian_reuse: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


class ConvergenceError(RuntimeError):
    """The Fourier-coefficient iteration did not converge."""

    def __init__(self, message, gamma, residual, iterations):
        super().__init__(message)
        self.gamma = gamma
        self.residual = residual
        self.iterations = iterations


class NonFiniteError(FloatingPointError):
    """The vector field returned NaN or Inf at a quadrature node."""

    def __init__(self, node, c):
        super().__init__(f"non-finite vector field value at node {node} (c = {c!r})")
        self.node = node
        self.c = c


@dataclass(frozen=True)
class GammaSolution:
    gamma: np.ndarray
    iterations: int
    residual: float
    converged: bool = True
    newton: Optional[tuple] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class DenseOutput:
    """Degree-s polynomial ``sigma`` over one step.

    ``derivs0`` are the derivatives at the start of the step; ``order`` is
    the problem order ``n``.
    """

    derivs0: tuple
    h: float
    gamma: np.ndarray
    order: int

    def __call__(self, c):
        return dense_eval(self, c)


@dataclass(frozen=True)
class StepResult:
    """New derivatives ``(y1, y1', ...)`` and solver diagnostics."""

    derivs: tuple
    gamma: np.ndarray
    iterations: int
    residual: float
    converged: bool
    dense: DenseOutput = field(repr=False)
    newton: Optional[tuple] = field(default=None, repr=False, compare=False)

    @property
    def y(self):
        return self.derivs[0]

    @property
    def yd(self):
        return self.derivs[1]


@dataclass(frozen=True)
class KthOrderUpdateCoeffs:
    """``rows[p]`` holds ``b_0^(p)..b_p^(p)``, the leading entries of the first row of ``X_s^p``."""

    rows: tuple

    def __getitem__(self, p):
        return self.rows[p]


def kth_update_coeffs(spec, k_ord):
    """Update weights for an order-``k_ord`` problem.

    Raises
    ------
    ValueError
        If ``spec.s < k_ord``.
    """
    if spec.s < k_ord:
        raise ValueError(f"order-{k_ord} problems need s >= {k_ord}, got s={spec.s}")
    return KthOrderUpdateCoeffs(tuple(_first_rows(spec, k_ord)))


def _first_rows(spec, n):
    # for s < n the rows are truncated, i.e. missing gamma_j count as zero
    rows = []
    for p in range(n):
        row = spec.power(p)[0, : min(p + 1, spec.s)].copy()
        row.setflags(write=False)
        rows.append(row)
    return rows


def _taylor(derivs0, i, ch):
    """``sum_l (ch)^l / l! y0^(l+i)``; ``ch`` scalar or vector of node offsets."""
    ch = np.asarray(ch, dtype=float)
    out = np.broadcast_to(derivs0[i], ch.shape + derivs0[i].shape).copy()
    for l in range(1, len(derivs0) - i):
        out = out + (ch**l / math.factorial(l))[..., None] * derivs0[i + l]
    return out


class _System:
    """Fourier-coefficient fixed-point map of one step."""

    def __init__(self, problem, derivs0, h, ops):
        if not (np.isfinite(h) and h > 0):
            raise ValueError(f"step size must be positive and finite, got {h}")
        self.problem = problem
        self.derivs0 = derivs0
        self.h = float(h)
        self.ops = ops
        n = problem.order
        spec = ops.spectral
        self.n = n
        self.m = derivs0[0].size
        self.proj = ops.projector
        # node arguments: offsets[i] + coupling[i] @ gamma
        self.offsets = [_taylor(derivs0, i, ops.c * self.h) for i in range(n)]
        self.coupling = [self.h ** (n - i) * (ops.I_s @ spec.power(n - 1 - i)) for i in range(n)]

    def node_arguments(self, gamma):
        return [off + cpl @ gamma for off, cpl in zip(self.offsets, self.coupling)]

    def __call__(self, gamma):
        args = self.node_arguments(gamma)
        F = np.empty((self.ops.k, self.m))
        for j in range(self.ops.k):
            F[j] = self.problem.rhs(*(a[j] for a in args))
            if not np.all(np.isfinite(F[j])):
                raise NonFiniteError(j, float(self.ops.c[j]))
        return self.proj @ F

    def newton_matrix(self):
        spec = self.ops.spectral
        jacs = self.problem.level_jacobians(*self.derivs0)
        M = np.eye(spec.s * self.m)
        for i, J in enumerate(jacs):
            M -= self.h ** (self.n - i) * np.kron(spec.power(self.n - i), J)
        return scipy.linalg.lu_factor(M)


def _solve(system, cfg, gamma0=None, newton=None):
    cfg = SolverConfig() if cfg is None else cfg
    s, m = system.ops.s, system.m
    gamma = np.zeros((s, m)) if gamma0 is None else np.array(gamma0, dtype=float).reshape(s, m)
    use_newton = cfg.scheme == "simplified-newton"
    if use_newton and newton is None:
        newton = system.newton_matrix()
    increment = 0.0
    for it in range(1, cfg.max_iters + 1):
        phi = system(gamma)
        defect = gamma - phi
        residual = float(np.max(np.abs(defect))) if defect.size else 0.0
        bound = cfg.tol * (1.0 + float(np.max(np.abs(gamma))))
        if residual <= bound and increment <= bound:
            return GammaSolution(gamma, it, residual, True, newton if use_newton else None)
        if use_newton:
            step = -scipy.linalg.lu_solve(newton, defect.ravel()).reshape(s, m)
        else:
            step = phi - gamma
        increment = float(np.max(np.abs(step)))
        gamma = gamma + step
    raise ConvergenceError(
        f"no convergence in {cfg.max_iters} iterations (residual {residual:.3e})",
        gamma,
        residual,
        cfg.max_iters,
    )


def gamma_residual(problem, init, h, ops, gamma):
    """Max-norm defect ``|gamma - P^T Omega f(node arguments(gamma))|``."""
    system = _System(problem, init.derivs, h, ops)
    return float(np.max(np.abs(gamma - system(np.asarray(gamma, dtype=float)))))


def _check_spec(ops, spec):
    if spec is not None and spec.s != ops.s:
        raise ValueError(f"spectral matrices have s={spec.s}, operators have s={ops.s}")


def _as_init(problem, derivs):
    init = InitialData(tuple(derivs))
    problem.check_initial(init)
    return init


def _finish(sol, derivs0, h, order):
    dense = DenseOutput(derivs0=derivs0, h=float(h), gamma=sol.gamma, order=order)
    rows = _first_rows(build_spectral(sol.gamma.shape[0]), order)
    out = []
    for i in range(order):
        p = order - 1 - i
        row = rows[p]
        new = _taylor(derivs0, i, float(h)) + h ** (order - i) * (row @ sol.gamma[: row.size])
        out.append(new)
    return StepResult(
        derivs=tuple(out),
        gamma=sol.gamma,
        iterations=sol.iterations,
        residual=sol.residual,
        converged=sol.converged,
        dense=dense,
        newton=sol.newton,
    )


def _run(problem, init, h, ops, cfg, gamma0, newton):
    problem.check_initial(init)
    system = _System(problem, init.derivs, h, ops)
    sol = _solve(system, cfg, gamma0, newton)
    return sol, _finish(sol, init.derivs, h, problem.order)


# --- first order ---------------------------------------------------------------


def solve_gamma_1st(p, y0, h, ops, cfg=None, gamma0=None, newton=None):
    """Solve ``gamma = P_s^T Omega f(y0 + h I_s gamma)`` (blocks of size m)."""
    init = _as_init(p, [y0])
    return _solve(_System(p, init.derivs, h, ops), cfg, gamma0, newton)


def step_1st(p, y0, h, ops, cfg=None, gamma0=None, newton=None):
    """One step for ``y' = f(y)``: ``y1 = y0 + h gamma_0``."""
    return _run(p, _as_init(p, [y0]), h, ops, cfg, gamma0, newton)[1]


# --- second order ----------------------------------------------------------------


def solve_gamma_2nd_special(p, y0, yd0, h, ops, spec=None, cfg=None, gamma0=None, newton=None):
    """Solve ``gamma = P_s^T Omega f(y0 + c h y0' + h^2 I_s X_s gamma)``."""
    _check_spec(ops, spec)
    init = _as_init(p, [y0, yd0])
    return _solve(_System(p, init.derivs, h, ops), cfg, gamma0, newton)


def step_2nd_special(p, y0, yd0, h, ops, spec=None, cfg=None, gamma0=None, newton=None):
    """One step for ``y'' = f(y)``.

    ``y1' = y0' + h gamma_0`` and ``y1 = y0 + h y0' + h^2 (xi_0 gamma_0 - xi_1 gamma_1)``;
    for ``s = 1`` the ``gamma_1`` term is absent.
    """
    _check_spec(ops, spec)
    return _run(p, _as_init(p, [y0, yd0]), h, ops, cfg, gamma0, newton)[1]


def solve_gamma_2nd_general(p, y0, yd0, h, ops, spec=None, cfg=None, gamma0=None, newton=None):
    """As the special case, with velocity argument ``y0' + h I_s gamma`` at each node."""
    _check_spec(ops, spec)
    init = _as_init(p, [y0, yd0])
    return _solve(_System(p, init.derivs, h, ops), cfg, gamma0, newton)


def step_2nd_general(p, y0, yd0, h, ops, spec=None, cfg=None, gamma0=None, newton=None):
    _check_spec(ops, spec)
    return _run(p, _as_init(p, [y0, yd0]), h, ops, cfg, gamma0, newton)[1]


# --- k-th order ----------------------------------------------------------------------


def solve_gamma_kth(p, init, h, ops, spec=None, cfg=None, gamma0=None, newton=None):
    _check_spec(ops, spec)
    if ops.s < p.order:
        raise ValueError(f"order-{p.order} problems need s >= {p.order}, got s={ops.s}")
    p.check_initial(init)
    return _solve(_System(p, init.derivs, h, ops), cfg, gamma0, newton)


def step_kth(p, init, h, ops, spec=None, cfg=None, gamma0=None, newton=None):
    """One step for ``y^(n) = f(y, ..., y^(n-1))``, requires ``s >= n``.

    ``y1^(i) = sum_{j < n-i} h^j/j! y0^(j+i) + h^(n-i) sum_j b_j^(n-1-i) gamma_j``
    with ``b^(p)`` from :func:`kth_update_coeffs`.
    """
    sol = solve_gamma_kth(p, init, h, ops, spec, cfg, gamma0, newton)
    coeffs = kth_update_coeffs(ops.spectral, p.order)
    n = p.order
    out = []
    for i in range(n):
        row = coeffs[n - 1 - i]
        out.append(_taylor(init.derivs, i, float(h)) + h ** (n - i) * (row @ sol.gamma[: row.size]))
    dense = DenseOutput(derivs0=init.derivs, h=float(h), gamma=sol.gamma, order=n)
    return StepResult(tuple(out), sol.gamma, sol.iterations, sol.residual, True, dense, sol.newton)


def step(problem, init, h, ops, cfg=None, gamma0=None, newton=None):
    """Dispatch to the one-step map of the problem's class."""
    if isinstance(problem, KthOrderProblem):
        return step_kth(problem, init, h, ops, cfg=cfg, gamma0=gamma0, newton=newton)
    if isinstance(problem, (FirstOrderProblem, SecondOrderSpecialProblem, SecondOrderGeneralProblem)):
        return _run(problem, init, h, ops, cfg, gamma0, newton)[1]
    raise TypeError(f"unsupported problem type {type(problem).__name__}")


def dense_eval(d, c):
    """Evaluate ``sigma(ch)`` and its derivatives carried by the problem class.

    Returns a tuple with one state per derivative level: for first order
    ``y0 + h I_s(c)^T gamma``; for order ``n`` the level-``i`` entry is
    ``sum_l (ch)^l/l! y0^(l+i) + h^(n-i) I_s(c)^T X_s^(n-1-i) gamma``.
    """
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"dense output is defined for c in [0, 1], got {c}")
    s = d.gamma.shape[0]
    spec = build_spectral(s)
    integ = eval_integrals(LegendreBasis(s), float(c))
    n = d.order
    out = []
    for i in range(n):
        weights = integ @ spec.power(n - 1 - i)
        out.append(_taylor(d.derivs0, i, c * d.h) + d.h ** (n - i) * (weights @ d.gamma))
    return tuple(out)
