"""J-quadratic Lie algebras and groups.

A quadratic structure is fixed by an invertible matrix ``J`` with
``J @ J = alpha * I``. The algebra is ``{W : W^H J + J W = 0}`` and the group
is ``{Q : Q^H J Q = J}``. Membership is checked by residuals; nothing here
ever projects a matrix back onto the algebra or the group.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dense import as_cmat
from .errors import DimensionError, MembershipError

__all__ = [
    "DEFAULT_MEMBERSHIP_TOL",
    "QuadraticStructure",
    "AlgebraElement",
    "GroupElement",
    "StructureReport",
    "algebra_residual",
    "group_residual",
    "adjunction_conjugate",
    "verify_structure",
    "reconstruct_W",
    "su_basis",
    "so3_basis",
]

DEFAULT_MEMBERSHIP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuadraticStructure:
    """The matrix ``J`` (with ``J^2 = alpha I``) defining algebra and group.

    Args:
        J: invertible square matrix.
        alpha: the scalar with ``J @ J == alpha * I``. Inferred from
            ``trace(J^2) / n`` when omitted.
    """

    J: np.ndarray
    alpha: complex = None

    def __post_init__(self):
        J = as_cmat(self.J)
        J.setflags(write=False)
        object.__setattr__(self, "J", J)
        n = J.shape[0]
        J2 = J @ J
        alpha = complex(np.trace(J2) / n) if self.alpha is None else complex(self.alpha)
        if alpha == 0:
            raise ValueError("J^2 must be a nonzero multiple of the identity (alpha == 0)")
        resid = np.linalg.norm(J2 - alpha * np.eye(n))
        if resid > 1e-12 * abs(alpha) * np.sqrt(n):
            raise ValueError(
                f"J^2 is not a multiple of the identity: ||J^2 - alpha I||_F = {resid:.3e}"
            )
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def identity(cls, n: int) -> "QuadraticStructure":
        """``J = I``: the unitary algebra u(n) and group U(n)."""
        return cls(np.eye(n, dtype=np.complex128), 1.0)

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    @cached_property
    def J_inv(self) -> np.ndarray:
        return self.J / self.alpha

    @cached_property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.J, np.eye(self.dim)))

    @cached_property
    def square_residual(self) -> float:
        return float(np.linalg.norm(self.J @ self.J - self.alpha * np.eye(self.dim)))

    def _check_dim(self, M: np.ndarray) -> None:
        if M.shape != self.J.shape:
            raise DimensionError(f"expected {self.J.shape} matrix, got {M.shape}")


def algebra_residual(struct: QuadraticStructure, W) -> float:
    """``||W^H J + J W||_F``."""
    W = as_cmat(W)
    struct._check_dim(W)
    if struct.is_identity:
        return float(np.linalg.norm(W.conj().T + W))
    J = struct.J
    return float(np.linalg.norm(W.conj().T @ J + J @ W))


def group_residual(struct: QuadraticStructure, Q) -> float:
    """``||Q^H J Q - J||_F``."""
    Q = as_cmat(Q)
    struct._check_dim(Q)
    J = struct.J
    if struct.is_identity:
        return float(np.linalg.norm(Q.conj().T @ Q - J))
    return float(np.linalg.norm(Q.conj().T @ J @ Q - J))


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A matrix certified to lie in the algebra up to ``tol``."""

    structure: QuadraticStructure
    matrix: np.ndarray
    tol: float = DEFAULT_MEMBERSHIP_TOL

    def __post_init__(self):
        M = as_cmat(self.matrix)
        r = algebra_residual(self.structure, M)
        if not r <= self.tol:
            raise MembershipError(f"algebra residual {r:.3e} exceeds {self.tol:.1e}", residual=r)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def trusted(cls, structure: QuadraticStructure, matrix: np.ndarray, tol=DEFAULT_MEMBERSHIP_TOL):
        """Wrap a matrix whose membership the caller has already verified."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "structure", structure)
        object.__setattr__(obj, "matrix", matrix)
        object.__setattr__(obj, "tol", tol)
        return obj


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A matrix certified to lie in the group up to ``tol``."""

    structure: QuadraticStructure
    matrix: np.ndarray
    tol: float = DEFAULT_MEMBERSHIP_TOL

    def __post_init__(self):
        M = as_cmat(self.matrix)
        r = group_residual(self.structure, M)
        if not r <= self.tol:
            raise MembershipError(f"group residual {r:.3e} exceeds {self.tol:.1e}", residual=r)
        object.__setattr__(self, "matrix", M)


def adjunction_conjugate(struct: QuadraticStructure, B, tol: float = DEFAULT_MEMBERSHIP_TOL):
    """Return ``-J^{-1} B^H J``, which equals ``B`` for every algebra member.

    Raises:
        MembershipError: if ``B`` is not in the algebra to ``tol``.
    """
    B = as_cmat(B)
    r = algebra_residual(struct, B)
    if r > tol:
        raise MembershipError(f"algebra residual {r:.3e} exceeds {tol:.1e}", residual=r)
    return -struct.J_inv @ B.conj().T @ struct.J


@dataclass(frozen=True)
class StructureReport:
    """Residuals of the structural checks on a quadratic algebra."""

    square_residual: float
    centrality_residual: float
    closure_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.square_residual, self.centrality_residual, self.closure_residual)


def verify_structure(struct: QuadraticStructure, basis) -> StructureReport:
    """Check that ``J^2`` is central and that the algebra is closed under adjoint.

    ``basis`` holds algebra elements (or raw matrices). The centrality residual
    is ``max_i ||[J^2, W_i]||_F`` and the closure residual is
    ``max_i algebra_residual(W_i^H)``. No exception is raised for bad values;
    the report carries them.
    """
    J2 = struct.J @ struct.J
    central = 0.0
    closure = 0.0
    for W in basis:
        M = W.matrix if isinstance(W, AlgebraElement) else as_cmat(W)
        struct._check_dim(M)
        central = max(central, float(np.linalg.norm(J2 @ M - M @ J2)))
        closure = max(closure, algebra_residual(struct, M.conj().T))
    return StructureReport(struct.square_residual, central, closure)


def reconstruct_W(struct: QuadraticStructure, W0, Q, tol: float = DEFAULT_MEMBERSHIP_TOL):
    """Return ``Q^H W0 J Q J^{-1}`` as an :class:`AlgebraElement`.

    ``W0`` and ``Q`` may be raw matrices or the certified element types.

    Raises:
        MembershipError: if ``Q`` is not in the group to ``tol``.
    """
    W0m = W0.matrix if isinstance(W0, AlgebraElement) else as_cmat(W0)
    Qm = Q.matrix if isinstance(Q, GroupElement) else as_cmat(Q)
    r = group_residual(struct, Qm)
    if r > tol:
        raise MembershipError(f"group residual {r:.3e} exceeds {tol:.1e}", residual=r)
    if struct.is_identity:
        W = Qm.conj().T @ W0m @ Qm
    else:
        W = Qm.conj().T @ W0m @ struct.J @ Qm @ struct.J_inv
    return AlgebraElement(struct, W, tol)


def su_basis(n: int) -> list[np.ndarray]:
    """Skew-Hermitian traceless basis of su(n) (``n^2 - 1`` matrices)."""
    basis = []
    for p in range(n):
        for q in range(p + 1, n):
            E = np.zeros((n, n), dtype=np.complex128)
            E[p, q], E[q, p] = 1.0, -1.0
            basis.append(E)
            F = np.zeros((n, n), dtype=np.complex128)
            F[p, q] = F[q, p] = 1j
            basis.append(F)
    for k in range(1, n):
        D = np.zeros((n, n), dtype=np.complex128)
        D[np.arange(k), np.arange(k)] = 1j
        D[k, k] = -1j * k
        basis.append(D / np.sqrt(k * (k + 1)))
    return basis


def so3_basis() -> list[np.ndarray]:
    """Elementary real skew matrices ``hat(e_1), hat(e_2), hat(e_3)``."""
    out = []
    for p, q in ((2, 1), (0, 2), (1, 0)):
        E = np.zeros((3, 3), dtype=np.complex128)
        E[p, q], E[q, p] = 1.0, -1.0
        out.append(E)
    return out

