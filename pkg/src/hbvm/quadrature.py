"""Gauss-Legendre quadrature on [0, 1]."""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureRule", "gauss_rule", "integrate_fn", "MAX_NODES"]

MAX_NODES = 64


@dataclass(frozen=True)
class QuadratureRule:
    """k-point Gauss-Legendre rule: ascending nodes ``c`` and weights ``b``."""

    k: int
    c: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def integrate(self, g):
        return integrate_fn(self, g)


def _legendre_and_derivative(k, t):
    # standard (non-normalised) Legendre L_k on [-1, 1]
    p_prev = np.ones_like(t)
    p = t.copy()
    for j in range(1, k):
        p_prev, p = p, ((2 * j + 1) * t * p - j * p_prev) / (j + 1)
    dp = k * (t * p - p_prev) / (t * t - 1.0)
    return p, dp


@lru_cache(maxsize=None)
def gauss_rule(k):
    """Build the k-point Gauss-Legendre rule on [0, 1].

    Roots of ``L_k`` on [-1, 1] are found by Newton iteration started from
    the Chebyshev-like points ``cos(pi (4i - 1) / (4k + 2))``.  Only the
    nonnegative half is computed; the rest follows by reflection so the
    rule is symmetric about 1/2.
    """
    if int(k) != k or not 1 <= k <= MAX_NODES:
        raise ValueError(f"number of nodes must be an integer in [1, {MAX_NODES}], got {k}")
    k = int(k)
    half = (k + 1) // 2
    i = np.arange(1, half + 1)
    t = np.cos(np.pi * (4 * i - 1) / (4 * k + 2))
    for _ in range(100):
        p, dp = _legendre_and_derivative(k, t)
        dt = p / dp
        t = t - dt
        if np.max(np.abs(dt)) < 1e-16:
            break
    if k % 2:
        t[-1] = 0.0
    _, dp = _legendre_and_derivative(k, t)
    # w = 2 / ((1 - t^2) L_k'(t)^2) on [-1, 1]; halve for [0, 1]
    w = 1.0 / ((1.0 - t * t) * dp * dp)

    lower = 0.5 * (1.0 - t)
    c = np.concatenate([lower, (1.0 - lower[: k // 2])[::-1]])
    b = np.concatenate([w, w[: k // 2][::-1]])
    c.setflags(write=False)
    b.setflags(write=False)
    return QuadratureRule(k=k, c=c, b=b)


def integrate_fn(rule, g):
    """Apply the rule to ``g``: ``sum_j b_j g(c_j)``.

    ``g`` may return a scalar or an array; the sum runs in node order.
    """
    values = [np.asarray(g(cj), dtype=float) for cj in rule.c]
    total = rule.b[0] * values[0]
    for bj, v in zip(rule.b[1:], values[1:]):
        total = total + bj * v
    return total
