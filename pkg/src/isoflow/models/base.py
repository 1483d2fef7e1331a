"""Common interface of isospectral flow models ``dW/dt = [B(W), W]``."""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from ..dense import as_cmat
from ..errors import MembershipError
from ..quadratic import DEFAULT_MEMBERSHIP_TOL, AlgebraElement, QuadraticStructure, algebra_residual

__all__ = ["IsospectralModel", "StaticModel"]


class IsospectralModel(ABC):
    """An isospectral flow on a quadratic Lie algebra.

    Subclasses implement :meth:`B_stack`, which evaluates ``B`` on a stack of
    matrices of shape ``(..., n, n)`` without membership checks. The
    integrators call it on intermediate stage matrices, which are only
    algebra members once the stage equations have converged, so it must
    accept arbitrary square matrices.
    """

    name: str = "model"
    structure: QuadraticStructure

    @property
    def dim(self) -> int:
        return self.structure.dim

    @property
    def has_hamiltonian(self) -> bool:
        return type(self).H is not IsospectralModel.H

    @abstractmethod
    def B_stack(self, X: np.ndarray, in_algebra: bool = False) -> np.ndarray:
        """Evaluate ``B`` on every matrix of the stack ``X``.

        ``in_algebra=True`` promises that every matrix of ``X`` is an algebra
        member, letting models skip work that only general matrices need.
        """

    def _checked(self, W, tol: float = DEFAULT_MEMBERSHIP_TOL) -> np.ndarray:
        W = getattr(W, "matrix", W)
        W = as_cmat(W)
        r = algebra_residual(self.structure, W)
        if r > tol:
            raise MembershipError(f"{self.name}: algebra residual {r:.3e} exceeds {tol:.1e}", r)
        return W

    def B(self, W) -> np.ndarray:
        """``B(W)`` for an algebra member ``W``."""
        return self.B_stack(self._checked(W)[None])[0]

    def H(self, W) -> float | None:
        """Hamiltonian, or ``None`` when the flow has none."""
        return None

    def initial_state(self) -> AlgebraElement:
        """Default initial condition of the model."""
        raise NotImplementedError(f"{self.name} has no default initial state")

    def rhs(self, W) -> np.ndarray:
        """The vector field ``[B(W), W]``."""
        W = self._checked(W)
        Bw = self.B(W)
        return Bw @ W - W @ Bw


class StaticModel(IsospectralModel):
    """``B == 0`` on u(n): every state is an equilibrium. Used for testing."""

    name = "static"

    def __init__(self, n: int):
        self.structure = QuadraticStructure.identity(n)

    def B_stack(self, X, in_algebra=False):
        return np.zeros_like(X)

    def initial_state(self) -> AlgebraElement:
        """``i diag(1, 2, ..., n)`` with the trace removed."""
        n = self.dim
        d = np.arange(1, n + 1, dtype=np.float64)
        return AlgebraElement(self.structure, np.diag(1j * (d - d.mean())))
