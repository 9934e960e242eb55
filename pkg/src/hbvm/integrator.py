"""Uniform-step time marching, convergence-order studies and energy drift."""
import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problems import InitialData
from .solver import ConvergenceError, DenseOutput, SolverConfig, step
from .tableau import build_operators

__all__ = [
    "IntegrationPlan",
    "Trajectory",
    "IntegrationError",
    "integrate",
    "OrderStudy",
    "order_study",
    "EnergyDrift",
    "energy_drift",
    "ERROR_FLOOR",
]

# errors below this are dominated by round-off
ERROR_FLOOR = 1e-13


@dataclass(frozen=True)
class IntegrationPlan:
    """Uniform grid on ``[t0, tf]`` with ``n_steps`` steps of HBVM(k, s).

    ``t0=None`` takes the start time from the initial data.
    """

    tf: float
    n_steps: int
    k: int
    s: int
    t0: Optional[float] = None
    config: SolverConfig = field(default_factory=SolverConfig)
    dense_samples: int = 0
    warm_start: bool = True

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if int(self.s) != self.s or self.s < 1 or int(self.k) != self.k or self.k < self.s:
            raise ValueError(f"need integers k >= s >= 1, got k={self.k}, s={self.s}")
        if self.t0 is not None and not self.tf > self.t0:
            raise ValueError(f"tf must exceed t0 (t0={self.t0}, tf={self.tf})")
        if self.dense_samples < 0:
            raise ValueError("dense_samples must be nonnegative")


_LEVEL_NAMES = ("y", "yd", "ydd", "yddd")


def _level_name(i):
    return _LEVEL_NAMES[i] if i < len(_LEVEL_NAMES) else f"y{i}d"


@dataclass
class Trajectory:
    """States at the step boundaries plus per-step solver statistics.

    ``states[i]`` has shape ``(n_records, m)`` and holds derivative level
    ``i``.  ``gammas[n]`` are the Fourier coefficients of step ``n``.
    """

    times: np.ndarray
    states: tuple
    iterations: np.ndarray
    residuals: np.ndarray
    gammas: np.ndarray
    h: float
    energy: Optional[np.ndarray] = None
    dense_times: Optional[np.ndarray] = None
    dense_states: Optional[tuple] = None
    dense_energy: Optional[np.ndarray] = None
    partial: bool = False

    @property
    def order(self):
        return len(self.states)

    @property
    def n_steps(self):
        return len(self.times) - 1

    def derivs_at(self, n):
        return tuple(level[n] for level in self.states)

    def dense(self, n):
        """Dense output polynomial of step ``n`` (from ``times[n]`` to ``times[n+1]``)."""
        return DenseOutput(derivs0=self.derivs_at(n), h=self.h, gamma=self.gammas[n], order=self.order)

    def max_energy_drift(self):
        if self.energy is None:
            return None
        return float(np.max(np.abs(self.energy - self.energy[0])))

    def header(self):
        m = self.states[0].shape[1]
        cols = ["t"]
        for i in range(self.order):
            cols += [f"{_level_name(i)}_{j + 1}" for j in range(m)]
        if self.energy is not None:
            cols.append("H")
        return cols + ["iters", "residual"]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header())
        fmt = lambda v: "%.17g" % v  # noqa: E731
        for n, t in enumerate(self.times):
            row = [fmt(t)]
            for level in self.states:
                row += [fmt(v) for v in level[n]]
            if self.energy is not None:
                row.append(fmt(self.energy[n]))
            row += [str(int(self.iterations[n])), fmt(self.residuals[n])]
            writer.writerow(row)
        return buf.getvalue()

    def to_json(self):
        doc = {"t": self.times.tolist()}
        for i, level in enumerate(self.states):
            doc[_level_name(i)] = level.tolist()
        if self.energy is not None:
            doc["H"] = self.energy.tolist()
        doc["iters"] = self.iterations.tolist()
        doc["residual"] = self.residuals.tolist()
        doc["partial"] = self.partial
        return json.dumps(doc, indent=2)


class IntegrationError(RuntimeError):
    """A step failed; ``partial`` holds the trajectory up to the failure."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def _step_with_reuse(problem, state, h, ops, cfg, gamma0, newton):
    try:
        return step(problem, state, h, ops, cfg, gamma0=gamma0, newton=newton)
    except ConvergenceError:
        if newton is None:
            raise
        # stale iteration matrix; rebuild at the current state
        return step(problem, state, h, ops, cfg, gamma0=gamma0)


def integrate(problem, init=None, plan=None):
    """March ``plan.n_steps`` uniform steps from ``init`` (default: the problem's own).

    Raises
    ------
    IntegrationError
        When a step fails; the partial trajectory is attached.
    """
    if plan is None:
        raise ValueError("an IntegrationPlan is required")
    init = problem.initial if init is None else init
    if init is None:
        raise ValueError("no initial data given and the problem has none")
    problem.check_initial(init)
    t0 = init.t0 if plan.t0 is None else float(plan.t0)
    if not plan.tf > t0:
        raise ValueError(f"tf must exceed t0 (t0={t0}, tf={plan.tf})")
    N = plan.n_steps
    h = (plan.tf - t0) / N
    ops = build_operators(plan.s, plan.k)
    cfg = plan.config
    order, m = problem.order, init.dim

    times = t0 + h * np.arange(N + 1)
    times[-1] = plan.tf
    states = tuple(np.empty((N + 1, m)) for _ in range(order))
    iterations = np.zeros(N + 1, dtype=int)
    residuals = np.zeros(N + 1)
    gammas = np.empty((N, plan.s, m))
    has_energy = problem.energy is not None
    energy = np.empty(N + 1) if has_energy else None
    dense_t, dense_y, dense_H = [], [[] for _ in range(order)], []

    def record(n, derivs):
        for level, value in zip(states, derivs):
            level[n] = value
        if has_energy:
            energy[n] = problem.evaluate_energy(*derivs)

    def snapshot(upto, partial):
        return Trajectory(
            times=times[: upto + 1].copy(),
            states=tuple(level[: upto + 1].copy() for level in states),
            iterations=iterations[: upto + 1].copy(),
            residuals=residuals[: upto + 1].copy(),
            gammas=gammas[:upto].copy(),
            h=h,
            energy=None if energy is None else energy[: upto + 1].copy(),
            dense_times=np.array(dense_t) if plan.dense_samples else None,
            dense_states=tuple(np.array(d).reshape(-1, m) for d in dense_y) if plan.dense_samples else None,
            dense_energy=np.array(dense_H) if plan.dense_samples and has_energy else None,
            partial=partial,
        )

    record(0, init.derivs)
    state = InitialData(init.derivs, t0)
    gamma0, newton = None, None
    reuse = cfg.jacobian_reuse and cfg.scheme == "simplified-newton"
    for n in range(N):
        try:
            result = _step_with_reuse(problem, state, h, ops, cfg, gamma0, newton)
        except (ConvergenceError, FloatingPointError) as exc:
            raise IntegrationError(f"step {n} failed at t={times[n]!r}: {exc}", snapshot(n, True)) from exc
        gammas[n] = result.gamma
        iterations[n + 1] = result.iterations
        residuals[n + 1] = result.residual
        for j in range(1, plan.dense_samples + 1):
            c = j / (plan.dense_samples + 1)
            values = result.dense(c)
            dense_t.append(times[n] + c * h)
            for store, v in zip(dense_y, values):
                store.append(v)
            if has_energy:
                dense_H.append(problem.evaluate_energy(*values))
        record(n + 1, result.derivs)
        state = InitialData(result.derivs, times[n + 1])
        if plan.warm_start:
            gamma0 = result.gamma
        if reuse:
            newton = result.newton
    return snapshot(N, False)


@dataclass(frozen=True)
class OrderStudy:
    """Global errors at ``tf`` for a ladder of step sizes.

    ``slopes[i]`` compares entries ``i`` and ``i+1``; ``reliable[i]`` is
    False when either error is below the round-off floor.
    """

    h: np.ndarray
    errors: np.ndarray
    slopes: np.ndarray
    reliable: np.ndarray

    def to_csv(self):
        lines = ["h,error,slope"]
        for i, (h, e) in enumerate(zip(self.h, self.errors)):
            if i == 0:
                slope = ""
            else:
                slope = "%.17g" % self.slopes[i - 1] if self.reliable[i - 1] else "unreliable"
            lines.append(f"{h:.17g},{e:.17g},{slope}")
        return "\n".join(lines) + "\n"


def _global_error(problem, init, plan):
    traj = integrate(problem, init, plan)
    exact = problem.solution(traj.times[-1], init)
    return max(float(np.max(np.abs(a - np.asarray(b)))) for a, b in zip(traj.derivs_at(-1), exact))


def order_study(problem, s, k, h_values, tf, init=None, config=None, max_workers=1):
    """Richardson slopes ``log(e_i / e_{i+1}) / log(h_i / h_{i+1})``.

    Each step size must divide ``tf - t0`` into a whole number of steps.
    Ladder entries are independent and may run on ``max_workers`` threads;
    results come back in ladder order.
    """
    if problem.solution is None:
        raise ValueError(f"problem {problem.name!r} has no analytic solution")
    h_values = [float(h) for h in h_values]
    if len(h_values) < 2:
        raise ValueError("the step-size ladder needs at least two entries")
    init = problem.initial if init is None else init
    span = tf - init.t0
    plans = []
    for h in h_values:
        if not h > 0:
            raise ValueError(f"step sizes must be positive, got {h}")
        n = round(span / h)
        if n < 1 or not math.isclose(n * h, span, rel_tol=1e-9):
            raise ValueError(f"step size {h} does not divide the interval length {span}")
        plans.append(IntegrationPlan(tf=tf, n_steps=n, k=k, s=s, config=config or SolverConfig()))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        errors = np.array(list(pool.map(lambda p: _global_error(problem, init, p), plans)))
    hs = np.array(h_values)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])
    reliable = (errors[:-1] >= ERROR_FLOOR) & (errors[1:] >= ERROR_FLOOR)
    return OrderStudy(h=hs, errors=errors, slopes=slopes, reliable=reliable)


@dataclass(frozen=True)
class EnergyDrift:
    times: np.ndarray
    drift: np.ndarray
    max_drift: float
    trajectory: Trajectory = field(repr=False)

    def to_csv(self):
        lines = ["t,drift"] + [f"{t:.17g},{d:.17g}" for t, d in zip(self.times, self.drift)]
        return "\n".join(lines) + "\n"


def energy_drift(problem, plan, init=None):
    """``H(t_n) - H(t_0)`` at the step boundaries and its maximum modulus.

    For a polynomial ``H`` of degree ``nu`` and degree-s dynamics the
    integrand ``grad H(sigma) . sigma'`` has degree ``nu s - 1``; a rule
    with ``2k >= nu s`` integrates it exactly and the drift reduces to
    solver tolerance and round-off.
    """
    if problem.energy is None:
        raise ValueError(f"problem {problem.name!r} has no first integral")
    traj = integrate(problem, init, plan)
    drift = traj.energy - traj.energy[0]
    return EnergyDrift(times=traj.times, drift=drift, max_drift=float(np.max(np.abs(drift))), trajectory=traj)
