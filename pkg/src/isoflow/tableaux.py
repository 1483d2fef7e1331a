"""Butcher tableaux for (symplectic) Runge-Kutta methods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Tableau", "gauss", "symplecticity_defect", "quadrature_order", "explicit_euler"]


@dataclass(frozen=True, eq=False)
class Tableau:
    """Butcher coefficients ``(a, b, c)`` and the classical order.

    Row-sum consistency ``c_i = sum_j a_ij`` and ``sum_i b_i = 1`` are checked
    on construction. Symplecticity is not required here; the integrators
    check it when a tableau is handed to them.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    name: str = ""

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64)
        b = np.array(self.b, dtype=np.float64)
        c = np.array(self.c, dtype=np.float64)
        s = b.shape[0] if b.ndim == 1 else -1
        if s < 1 or a.shape != (s, s) or c.shape != (s,):
            raise ValueError(f"inconsistent tableau shapes a{a.shape} b{b.shape} c{c.shape}")
        if np.abs(a.sum(axis=1) - c).max() > 1e-14:
            raise ValueError("row-sum condition c_i = sum_j a_ij violated")
        if abs(b.sum() - 1.0) > 1e-14:
            raise ValueError("weights do not sum to one")
        for arr in (a, b, c):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def s(self) -> int:
        return self.b.shape[0]


def _legendre_roots(s: int) -> np.ndarray:
    """Roots of the Legendre polynomial P_s on (-1, 1), ascending."""
    k = np.arange(1, s + 1)
    x = np.cos(np.pi * (k - 0.25) / (s + 0.5))
    for _ in range(100):
        p0, p1 = np.ones_like(x), x
        for n in range(2, s + 1):
            p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
        dp = s * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.abs(dx).max() < 1e-16:
            break
    return np.sort(x)


def gauss(s: int) -> Tableau:
    """The ``s``-stage Gauss-Legendre collocation method (order ``2s``).

    Abscissae are the roots of the shifted Legendre polynomial on (0, 1),
    found by Newton iteration; ``a`` and ``b`` solve the collocation
    (Vandermonde) conditions ``sum_j a_ij c_j^(k-1) = c_i^k / k`` and
    ``sum_j b_j c_j^(k-1) = 1/k`` for ``k = 1..s``.
    """
    if int(s) != s or s < 1:
        raise ValueError(f"stage count must be a positive integer, got {s!r}")
    s = int(s)
    c = 0.5 * (_legendre_roots(s) + 1.0)
    k = np.arange(1, s + 1)
    V = c[None, :] ** (k[:, None] - 1)  # V[k-1, j] = c_j^(k-1)
    b = np.linalg.solve(V, 1.0 / k)
    rhs = c[None, :] ** k[:, None] / k[:, None]  # rhs[k-1, i] = c_i^k / k
    a = np.linalg.solve(V, rhs).T
    # Remove the O(eps) drift in the row sums so c_i = sum_j a_ij exactly.
    c = a.sum(axis=1)
    b = b / b.sum()
    return Tableau(a, b, c, order=2 * s, name=f"Gauss-Legendre s={s}")


def symplecticity_defect(t: Tableau) -> float:
    """``max_ij |b_i a_ij + b_j a_ji - b_i b_j|``; zero for symplectic methods."""
    M = t.b[:, None] * t.a
    return float(np.abs(M + M.T - np.outer(t.b, t.b)).max())


def quadrature_order(t: Tableau, max_order: int = 12) -> int:
    """Largest ``p <= max_order`` with ``sum_i b_i c_i^(k-1) = 1/k`` for all ``k <= p``."""
    if max_order > 12:
        raise ValueError("max_order must be at most 12")
    p = 0
    for k in range(1, max_order + 1):
        if abs(float(np.dot(t.b, t.c ** (k - 1))) - 1.0 / k) > 1e-12:
            break
        p = k
    return p


explicit_euler = Tableau([[0.0]], [1.0], [0.0], order=1, name="explicit Euler")
