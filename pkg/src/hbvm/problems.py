"""Problem classes for autonomous ODE initial-value problems.

Four classes are supported, all written in autonomous form:

* ``FirstOrderProblem``          y' = f(y)
* ``SecondOrderSpecialProblem``  y'' = f(y)
* ``SecondOrderGeneralProblem``  y'' = f(y, y')
* ``KthOrderProblem``            y^(n) = f(y, y', ..., y^(n-1))

A non-autonomous problem is handled by appending ``t`` as an extra state
component with derivative 1.

Every problem exposes a uniform view used by the solver: ``order``,
``rhs(*levels)`` and ``level_jacobians(*levels)`` where ``levels`` are the
derivatives ``y, y', ..., y^(order-1)``.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "InitialData",
    "FirstOrderProblem",
    "SecondOrderSpecialProblem",
    "SecondOrderGeneralProblem",
    "KthOrderProblem",
    "UnknownProblemError",
    "canonical_skew",
    "builtin",
    "registry_names",
]


@dataclass(frozen=True)
class InitialData:
    """Initial derivatives ``y_0, y_0', ..., y_0^(n-1)`` at time ``t0``."""

    derivs: tuple
    t0: float = 0.0

    def __post_init__(self):
        derivs = tuple(np.atleast_1d(np.asarray(d, dtype=float)).copy() for d in self.derivs)
        if not derivs:
            raise ValueError("at least one initial derivative is required")
        m = derivs[0].shape
        if any(d.shape != m or d.ndim != 1 for d in derivs):
            raise ValueError("initial derivatives must be 1-D states of equal dimension")
        for d in derivs:
            d.setflags(write=False)
        object.__setattr__(self, "derivs", derivs)
        object.__setattr__(self, "t0", float(self.t0))

    @property
    def order(self):
        return len(self.derivs)

    @property
    def dim(self):
        return self.derivs[0].size


def canonical_skew(n):
    """The canonical symplectic matrix ``[[0, I], [-I, 0]]`` of size ``2n``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def _fd_jacobian(fun, x, step=1e-7):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        dx = step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += dx
        xm[i] -= dx
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2.0 * dx))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


class _Problem:
    order: int

    def check_initial(self, init):
        if init.order != self.order:
            raise ValueError(
                f"{type(self).__name__} needs {self.order} initial derivative(s), got {init.order}"
            )
        if init.dim != self.dim:
            raise ValueError(f"state dimension {init.dim} does not match problem dimension {self.dim}")

    def level_jacobians(self, *levels):
        """``[df/dy, df/dy', ...]`` at the given derivatives; finite differences by default."""
        jacs = self._analytic_jacobians(levels)
        if jacs is not None:
            return [np.atleast_2d(np.asarray(J, dtype=float)) for J in jacs]
        out = []
        for i in range(self.order):

            def partial(x, i=i):
                args = list(levels)
                args[i] = x
                return self.rhs(*args)

            out.append(_fd_jacobian(partial, levels[i]))
        return out

    def _analytic_jacobians(self, levels):
        return None

    def evaluate_energy(self, *levels):
        return None if self.energy is None else float(self.energy(*levels))


@dataclass(frozen=True, eq=False)
class FirstOrderProblem(_Problem):
    """``y' = f(y)``.

    ``skew`` is the constant skew-symmetric matrix ``J`` for problems of
    the form ``f = J grad H`` with ``H`` given by ``energy``.
    """

    f: Callable
    dim: int
    name: str = ""
    energy: Optional[Callable] = None
    solution: Optional[Callable] = None
    jac: Optional[Callable] = None
    skew: Optional[np.ndarray] = None
    initial: Optional[InitialData] = None
    order = 1

    def rhs(self, y):
        return np.asarray(self.f(y), dtype=float)

    def _analytic_jacobians(self, levels):
        return None if self.jac is None else [self.jac(*levels)]

    def as_first_order(self):
        return self


@dataclass(frozen=True, eq=False)
class SecondOrderSpecialProblem(_Problem):
    """``y'' = f(y)``; ``energy(y, y')`` is ``|y'|^2/2 + V(y)`` when given."""

    f: Callable
    dim: int
    name: str = ""
    energy: Optional[Callable] = None
    solution: Optional[Callable] = None
    jac: Optional[Callable] = None
    initial: Optional[InitialData] = None
    order = 2

    def rhs(self, y, yd=None):
        return np.asarray(self.f(y), dtype=float)

    def _analytic_jacobians(self, levels):
        if self.jac is None:
            return None
        return [self.jac(levels[0]), np.zeros((self.dim, self.dim))]

    def level_jacobians(self, *levels):
        jacs = self._analytic_jacobians(levels)
        if jacs is not None:
            return [np.atleast_2d(np.asarray(J, dtype=float)) for J in jacs]
        return [_fd_jacobian(self.rhs, levels[0]), np.zeros((self.dim, self.dim))]

    def as_first_order(self):
        """Canonical form ``q' = p, p' = f(q)``; Hamiltonian when ``energy`` is set."""
        return _companion(self, skew=None if self.energy is None else canonical_skew(self.dim))


@dataclass(frozen=True, eq=False)
class SecondOrderGeneralProblem(_Problem):
    """``y'' = f(y, y')``."""

    f: Callable
    dim: int
    name: str = ""
    energy: Optional[Callable] = None
    solution: Optional[Callable] = None
    jac: Optional[Callable] = None
    initial: Optional[InitialData] = None
    order = 2

    def rhs(self, y, yd):
        return np.asarray(self.f(y, yd), dtype=float)

    def _analytic_jacobians(self, levels):
        return None if self.jac is None else list(self.jac(*levels))

    def as_first_order(self):
        return _companion(self)


@dataclass(frozen=True, eq=False)
class KthOrderProblem(_Problem):
    """``y^(n) = f(y, y', ..., y^(n-1))`` with ``n = order``."""

    f: Callable
    order: int
    dim: int
    name: str = ""
    energy: Optional[Callable] = None
    solution: Optional[Callable] = None
    jac: Optional[Callable] = None
    initial: Optional[InitialData] = None

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"order must be a positive integer, got {self.order}")

    def rhs(self, *levels):
        return np.asarray(self.f(*levels), dtype=float)

    def _analytic_jacobians(self, levels):
        return None if self.jac is None else list(self.jac(*levels))

    def as_first_order(self):
        return _companion(self)


def _companion(problem, skew=None):
    """First-order system for the stacked state ``(y, y', ..., y^(n-1))``."""
    n, m = problem.order, problem.dim

    def split(z):
        z = np.asarray(z, dtype=float)
        return [z[i * m:(i + 1) * m] for i in range(n)]

    def f(z):
        levels = split(z)
        return np.concatenate(levels[1:] + [problem.rhs(*levels)])

    def jac(z):
        levels = split(z)
        J = np.zeros((n * m, n * m))
        for i in range(n - 1):
            J[i * m:(i + 1) * m, (i + 1) * m:(i + 2) * m] = np.eye(m)
        for i, Ji in enumerate(problem.level_jacobians(*levels)):
            J[(n - 1) * m:, i * m:(i + 1) * m] = Ji
        return J

    energy = None
    if problem.energy is not None:
        energy = lambda z: problem.energy(*split(z))  # noqa: E731
    solution = None
    if problem.solution is not None:

        def solution(t, init):
            return (np.concatenate(problem.solution(t, _unstack(init, n, m))),)

    initial = None
    if problem.initial is not None:
        initial = InitialData((np.concatenate(problem.initial.derivs),), problem.initial.t0)
    return FirstOrderProblem(
        f=f,
        dim=n * m,
        name=f"{problem.name}[1st]" if problem.name else "",
        energy=energy,
        solution=solution,
        jac=jac,
        skew=skew,
        initial=initial,
    )


def _unstack(init, n, m):
    z = init.derivs[0]
    return InitialData(tuple(z[i * m:(i + 1) * m] for i in range(n)), init.t0)


# --- built-in problems -------------------------------------------------------


def _harmonic():
    def solution(t, init):
        y0, v0 = init.derivs
        dt = t - init.t0
        c, s = math.cos(dt), math.sin(dt)
        return (y0 * c + v0 * s, -y0 * s + v0 * c)

    return SecondOrderSpecialProblem(
        f=lambda y: -y,
        dim=1,
        name="harmonic",
        energy=lambda y, v: 0.5 * float(v @ v + y @ y),
        solution=solution,
        jac=lambda y: -np.eye(1),
        initial=InitialData(([1.0], [0.5])),
    )


def _henon_heiles():
    def H(z):
        q1, q2, p1, p2 = z
        return 0.5 * (p1 * p1 + p2 * p2) + 0.5 * (q1 * q1 + q2 * q2) + q1 * q1 * q2 - q2**3 / 3.0

    def f(z):
        q1, q2, p1, p2 = z
        return np.array([p1, p2, -q1 - 2.0 * q1 * q2, -q2 - q1 * q1 + q2 * q2])

    def jac(z):
        q1, q2, _, _ = z
        return np.array(
            [
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-1.0 - 2.0 * q2, -2.0 * q1, 0.0, 0.0],
                [-2.0 * q1, -1.0 + 2.0 * q2, 0.0, 0.0],
            ]
        )

    # energy 1/8 with q = (0, 0.1), p2 = 0.1
    q2, p2 = 0.1, 0.1
    p1 = math.sqrt(2.0 * (0.125 - (0.5 * p2 * p2 + 0.5 * q2 * q2 - q2**3 / 3.0)))
    return FirstOrderProblem(
        f=f,
        dim=4,
        name="henon-heiles",
        energy=H,
        jac=jac,
        skew=canonical_skew(2),
        initial=InitialData(([0.0, q2, p1, p2],)),
    )


def _kepler(eccentricity=0.6):
    e = float(eccentricity)
    if not 0.0 <= e < 1.0:
        raise ValueError(f"eccentricity must lie in [0, 1), got {e}")
    initial = InitialData(([1.0 - e, 0.0], [0.0, math.sqrt((1.0 + e) / (1.0 - e))]))

    def f(q):
        r = math.hypot(q[0], q[1])
        return -q / r**3

    def jac(q):
        r = math.hypot(q[0], q[1])
        return (3.0 * np.outer(q, q) / r**2 - np.eye(2)) / r**3

    def solution(t, init):
        # unit semi-major axis, perihelion at t0
        if not all(np.array_equal(a, b) for a, b in zip(init.derivs, initial.derivs)):
            raise ValueError("analytic Kepler solution is only available for the perihelion start")
        mean = t - init.t0
        E = mean if e < 0.8 else math.pi
        for _ in range(100):
            dE = (E - e * math.sin(E) - mean) / (1.0 - e * math.cos(E))
            E -= dE
            if abs(dE) < 1e-16:
                break
        cE, sE = math.cos(E), math.sin(E)
        w = math.sqrt(1.0 - e * e)
        denom = 1.0 - e * cE
        return (np.array([cE - e, w * sE]), np.array([-sE / denom, w * cE / denom]))

    return SecondOrderSpecialProblem(
        f=f,
        dim=2,
        name="kepler",
        energy=lambda q, p: 0.5 * float(p @ p) - 1.0 / math.hypot(q[0], q[1]),
        solution=solution,
        jac=jac,
        initial=initial,
    )


def _pendulum():
    return SecondOrderSpecialProblem(
        f=lambda y: -np.sin(y),
        dim=1,
        name="pendulum",
        energy=lambda y, v: 0.5 * float(v @ v) - float(np.cos(y).sum()),
        jac=lambda y: np.diag(-np.cos(y)),
        initial=InitialData(([1.5], [0.0])),
    )


def _van_der_pol(mu=1.0):
    mu = float(mu)
    return SecondOrderGeneralProblem(
        f=lambda y, v: mu * (1.0 - y * y) * v - y,
        dim=1,
        name="vdpol-2nd",
        jac=lambda y, v: (np.diag(-2.0 * mu * y * v - 1.0), np.diag(mu * (1.0 - y * y))),
        initial=InitialData(([2.0], [0.0])),
    )


def _damped():
    def solution(t, init):
        y0, v0 = init.derivs
        decay = math.exp(-(t - init.t0))
        return (y0 + v0 * (1.0 - decay), v0 * decay)

    return SecondOrderGeneralProblem(
        f=lambda y, v: -v,
        dim=1,
        name="damped",
        solution=solution,
        jac=lambda y, v: (np.zeros((1, 1)), -np.eye(1)),
        initial=InitialData(([0.0], [1.0])),
    )


def _linear_third():
    # y''' = -y'  =>  y = A + B cos t + C sin t
    def solution(t, init):
        y0, y1, y2 = init.derivs
        dt = t - init.t0
        c, s = math.cos(dt), math.sin(dt)
        B, C = -y2, y1
        return (y0 + y2 + B * c + C * s, -B * s + C * c, -B * c - C * s)

    return KthOrderProblem(
        f=lambda y, yd, ydd: -yd,
        order=3,
        dim=1,
        name="linear-3rd",
        energy=lambda y, yd, ydd: 0.5 * float(yd @ yd + ydd @ ydd),
        solution=solution,
        jac=lambda y, yd, ydd: (np.zeros((1, 1)), -np.eye(1), np.zeros((1, 1))),
        initial=InitialData(([1.0], [0.5], [-0.3])),
    )


_REGISTRY = {
    "harmonic": _harmonic,
    "henon-heiles": _henon_heiles,
    "kepler": _kepler,
    "pendulum": _pendulum,
    "vdpol-2nd": _van_der_pol,
    "damped": _damped,
    "linear-3rd": _linear_third,
}


class UnknownProblemError(LookupError):
    pass


def registry_names():
    return sorted(_REGISTRY)


def builtin(name, **params):
    """Return the built-in problem ``name``.

    ``kepler`` accepts ``eccentricity`` (default 0.6) and ``vdpol-2nd``
    accepts ``mu`` (default 1).
    """
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; available: {', '.join(registry_names())}"
        ) from None
    return factory(**params)
