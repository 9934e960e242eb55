"""Orthonormal shifted Legendre polynomials on [0, 1].

The basis is normalised so that ``int_0^1 P_i P_j = delta_ij`` with a
positive leading coefficient, hence ``P_j(1) = sqrt(2j + 1)``.  Integrals
of the basis are obtained from the basis one degree higher through the
tridiagonal matrix of integration coefficients ``xi_i``.
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "LegendreBasis",
    "SpectralMatrices",
    "xi",
    "eval_basis",
    "eval_integrals",
    "build_spectral",
]


def xi(i):
    """Integration coefficient ``1 / (2 sqrt(|4 i^2 - 1|))``."""
    if i < 0:
        raise ValueError(f"xi index must be nonnegative, got {i}")
    return 1.0 / (2.0 * np.sqrt(abs(4.0 * i * i - 1.0)))


def _check_domain(x):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("Legendre basis is only defined on [0, 1]")
    return x


def _basis_values(r, x):
    # P_{j+1} = ((2x - 1) P_j - 2 j xi_j P_{j-1}) / (2 (j + 1) xi_{j+1})
    out = np.empty(x.shape + (r,))
    out[..., 0] = 1.0
    if r > 1:
        t = 2.0 * x - 1.0
        out[..., 1] = np.sqrt(3.0) * t
        for j in range(1, r - 1):
            out[..., j + 1] = (t * out[..., j] - 2.0 * j * xi(j) * out[..., j - 1]) / (
                2.0 * (j + 1) * xi(j + 1)
            )
    return out


@dataclass(frozen=True)
class LegendreBasis:
    """The first ``r`` orthonormal shifted Legendre polynomials P_0..P_{r-1}."""

    r: int

    def __post_init__(self):
        if int(self.r) != self.r or self.r < 1:
            raise ValueError(f"basis size must be a positive integer, got {self.r}")

    def __call__(self, x):
        return eval_basis(self, x)

    def integrals(self, c):
        return eval_integrals(self, c)


def eval_basis(basis, x):
    """Evaluate ``(P_0(x), ..., P_{r-1}(x))``.

    Parameters
    ----------
    basis : LegendreBasis
    x : float or array_like
        Points in [0, 1].

    Returns
    -------
    numpy.ndarray
        Shape ``x.shape + (r,)``.
    """
    x = _check_domain(x)
    return _basis_values(basis.r, x)


def eval_integrals(basis, c):
    """Evaluate ``(int_0^c P_0, ..., int_0^c P_{r-1})``.

    Uses ``int_0^c P_j = xi_{j+1} P_{j+1}(c) - xi_j P_{j-1}(c)`` for
    ``j >= 1`` and ``int_0^c P_0 = xi_0 P_0(c) + xi_1 P_1(c)``, i.e. the
    columns of the extended matrix ``Xhat``.  The endpoint values
    ``0`` and ``e_1`` are returned exactly.
    """
    c = _check_domain(c)
    r = basis.r
    vals = _basis_values(r + 1, c)
    out = vals @ build_spectral(r).Xhat
    at_zero = c == 0.0
    at_one = c == 1.0
    if np.any(at_zero):
        out[at_zero] = 0.0
    if np.any(at_one):
        out[at_one] = 0.0
        out[at_one, 0] = 1.0
    return out


@dataclass(frozen=True)
class SpectralMatrices:
    """Coefficients ``xi_0..xi_s`` with the matrices ``X_s`` and ``Xhat_s``.

    ``X`` is ``s x s``; ``Xhat`` is ``(s+1) x s`` and equals ``X`` with the
    row ``(0, ..., 0, xi_s)`` appended.
    """

    s: int
    xi: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    Xhat: np.ndarray = field(repr=False)

    def power(self, p):
        """``X_s`` raised to the integer power ``p >= 0``."""
        return np.linalg.matrix_power(self.X, p)


@lru_cache(maxsize=None)
def build_spectral(s):
    """Assemble the integration matrices for truncation degree ``s``."""
    if int(s) != s or s < 1:
        raise ValueError(f"s must be a positive integer, got {s}")
    s = int(s)
    coeffs = np.array([xi(i) for i in range(s + 1)])
    Xhat = np.zeros((s + 1, s))
    Xhat[0, 0] = coeffs[0]
    for i in range(1, s + 1):
        # subdiagonal xi_i; superdiagonal -xi_i
        Xhat[i, i - 1] = coeffs[i]
        if i < s:
            Xhat[i - 1, i] = -coeffs[i]
    X = Xhat[:s].copy()
    for a in (coeffs, X, Xhat):
        a.setflags(write=False)
    return SpectralMatrices(s=s, xi=coeffs, X=X, Xhat=Xhat)
