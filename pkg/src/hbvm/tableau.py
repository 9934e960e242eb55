"""Discrete operators and HBVM(k, s) Butcher tableaux.

With ``k`` Gauss nodes and truncation degree ``s`` the k-stage Runge-Kutta
matrix is ``I_s P_s^T Omega`` and the Nystrom matrix is
``I_s X_s P_s^T Omega``.  For ``k == s`` the RK tableau is the s-stage
Gauss collocation method.
"""
import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .legendre import LegendreBasis, build_spectral, eval_basis, eval_integrals
from .quadrature import gauss_rule

__all__ = [
    "DiscreteOperators",
    "RKTableau",
    "RKNTableau",
    "build_operators",
    "rk_tableau",
    "rkn_tableau",
    "eval_a_s",
    "eval_abar_s",
    "operator_residuals",
    "tableau_to_csv",
    "tableau_to_json",
]


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteOperators:
    """Legendre evaluation matrices at the quadrature nodes.

    Attributes
    ----------
    P_s : (k, s) rows ``P_s(c_i)^T``
    P_s1 : (k, s+1) rows ``P_{s+1}(c_i)^T``
    I_s : (k, s) rows ``I_s(c_i)^T``, equal to ``P_s1 @ Xhat``
    Omega : (k, k) diagonal matrix of weights
    """

    k: int
    s: int
    c: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    P_s: np.ndarray = field(repr=False)
    P_s1: np.ndarray = field(repr=False)
    I_s: np.ndarray = field(repr=False)
    Omega: np.ndarray = field(repr=False)

    @property
    def spectral(self):
        return build_spectral(self.s)

    @property
    def projector(self):
        """``P_s^T Omega``: maps node values to the s Legendre coefficients."""
        return self.P_s.T * self.b


@dataclass(frozen=True)
class RKTableau:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def stages(self):
        return len(self.c)


@dataclass(frozen=True)
class RKNTableau:
    Abar: np.ndarray
    bbar: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def stages(self):
        return len(self.c)


def build_operators(s, k, rule=None):
    """Evaluate the basis and its integrals at the nodes of a k-point rule.

    Raises
    ------
    ValueError
        If ``k < s`` or either is not a positive integer.
    """
    if int(s) != s or s < 1:
        raise ValueError(f"s must be a positive integer, got {s}")
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if k < s:
        raise ValueError(f"k must be >= s (got k={k}, s={s})")
    s, k = int(s), int(k)
    if rule is None:
        rule = gauss_rule(k)
    elif rule.k != k:
        raise ValueError(f"rule has {rule.k} nodes, expected {k}")
    spec = build_spectral(s)
    P_s1 = eval_basis(LegendreBasis(s + 1), rule.c)
    return DiscreteOperators(
        k=k,
        s=s,
        c=_frozen(rule.c),
        b=_frozen(rule.b),
        P_s=_frozen(P_s1[:, :s]),
        P_s1=_frozen(P_s1),
        I_s=_frozen(P_s1 @ spec.Xhat),
        Omega=_frozen(np.diag(rule.b)),
    )


def operator_residuals(ops):
    """Max-norm defects of ``P^T Omega P = I`` and ``P^T Omega I_s = X_s``."""
    spec = ops.spectral
    ortho = ops.P_s.T @ ops.Omega @ ops.P_s - np.eye(ops.s)
    integ = ops.P_s.T @ ops.Omega @ ops.I_s - spec.X
    return {
        "orthonormality": float(np.max(np.abs(ortho))),
        "integration": float(np.max(np.abs(integ))),
    }


def rk_tableau(ops):
    A = ops.I_s @ ops.P_s.T @ ops.Omega
    return RKTableau(A=_frozen(A), b=ops.b, c=ops.c)


def rkn_tableau(ops, spec=None):
    spec = ops.spectral if spec is None else spec
    if spec.s != ops.s:
        raise ValueError("spectral matrices and operators disagree on s")
    Abar = ops.I_s @ spec.X @ ops.P_s.T @ ops.Omega
    return RKNTableau(Abar=_frozen(Abar), bbar=_frozen(ops.b * (1.0 - ops.c)), b=ops.b, c=ops.c)


def eval_a_s(s, c, tau):
    """Truncated kernel ``a_s(c, tau) = I_s(c)^T P_s(tau)``."""
    basis = LegendreBasis(s)
    return eval_integrals(basis, c) @ eval_basis(basis, tau)


def eval_abar_s(s, c, tau):
    """Nystrom kernel ``abar_s(c, tau) = I_s(c)^T X_s P_s(tau)``."""
    basis = LegendreBasis(s)
    return eval_integrals(basis, c) @ build_spectral(s).X @ eval_basis(basis, tau)


def tableau_to_csv(ops, form="rk"):
    """CSV text: one row per stage ``c_i, A_i1..A_ik``, then labelled weight rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    fmt = lambda v: "%.17g" % v  # noqa: E731
    k = ops.k
    if form == "rk":
        tab = rk_tableau(ops)
        writer.writerow(["c"] + [f"A_{j + 1}" for j in range(k)])
        for ci, row in zip(tab.c, tab.A):
            writer.writerow([fmt(ci)] + [fmt(v) for v in row])
        writer.writerow(["b"] + [fmt(v) for v in tab.b])
    elif form == "rkn":
        tab = rkn_tableau(ops)
        writer.writerow(["c"] + [f"Abar_{j + 1}" for j in range(k)])
        for ci, row in zip(tab.c, tab.Abar):
            writer.writerow([fmt(ci)] + [fmt(v) for v in row])
        writer.writerow(["bbar"] + [fmt(v) for v in tab.bbar])
        writer.writerow(["b"] + [fmt(v) for v in tab.b])
    else:
        raise ValueError(f"unknown tableau form {form!r}; expected 'rk' or 'rkn'")
    return buf.getvalue()


def tableau_to_json(ops):
    """JSON document ``{k, s, c, b, A, Abar, bbar}``.

    Python's float repr is the shortest string that round-trips, so no
    precision is lost.
    """
    rk = rk_tableau(ops)
    rkn = rkn_tableau(ops)
    doc = {
        "k": ops.k,
        "s": ops.s,
        "c": rk.c.tolist(),
        "b": rk.b.tolist(),
        "A": rk.A.tolist(),
        "Abar": rkn.Abar.tolist(),
        "bbar": rkn.bbar.tolist(),
    }
    return json.dumps(doc, indent=2)
