"""Dense complex matrix kernel.

Every matrix in the package is a square ``numpy.complex128`` array. The
functions here are thin, validated wrappers over numpy/LAPACK so the rest of
the code can rely on consistent shape checks and error types.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DimensionError, NonFiniteError, SingularMatrixError

__all__ = [
    "as_cmat",
    "commutator",
    "adjoint",
    "frobenius_inner",
    "frobenius_norm",
    "solve_linear",
    "eigenvalues",
    "spectral_norm",
    "SINGULAR_PIVOT_RTOL",
]

# Pivots below this fraction of ||A||_F are treated as singular.
SINGULAR_PIVOT_RTOL = 1e-14


def as_cmat(A, *, check_finite: bool = True) -> np.ndarray:
    """Coerce ``A`` to a square complex128 matrix.

    Raises:
        DimensionError: if ``A`` is not a square 2-D array.
        NonFiniteError: if ``check_finite`` and ``A`` has NaN/Inf entries.
    """
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {M.shape}")
    if check_finite and not np.isfinite(M).all():
        raise NonFiniteError("matrix has non-finite entries")
    return M


def _same_shape(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")


def commutator(A, B) -> np.ndarray:
    """Return ``AB - BA``."""
    A = as_cmat(A)
    B = as_cmat(B)
    _same_shape(A, B)
    return A @ B - B @ A


def adjoint(A) -> np.ndarray:
    """Conjugate transpose."""
    return as_cmat(A).conj().T


def frobenius_inner(A, B) -> complex:
    """Return ``trace(A^H B)``."""
    A = as_cmat(A)
    B = as_cmat(B)
    _same_shape(A, B)
    return complex(np.vdot(A, B))


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(np.asarray(A)))


def solve_linear(A, Y) -> np.ndarray:
    """Solve ``A X = Y`` by LU with partial pivoting.

    Raises:
        SingularMatrixError: if some pivot of the LU factorization is smaller
            than ``SINGULAR_PIVOT_RTOL * ||A||_F``. The offending pivot
            magnitude is attached as ``err.pivot``.
    """
    A = as_cmat(A)
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.shape[0] != A.shape[0]:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {Y.shape}")
    scale = np.linalg.norm(A)
    with warnings.catch_warnings():
        # singular factors are reported below with the pivot attached
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    k = int(np.argmin(pivots))
    if scale == 0.0 or pivots[k] < SINGULAR_PIVOT_RTOL * scale:
        raise SingularMatrixError(
            f"matrix is singular to tolerance: pivot {k} has magnitude {pivots[k]:.3e}"
            f" (||A||_F = {scale:.3e})",
            pivot=float(pivots[k]),
        )
    return scipy.linalg.lu_solve((lu, piv), Y, check_finite=False)


def _sort_spectrum(lam: np.ndarray) -> np.ndarray:
    # Real parts closer than the snap grid compare equal, otherwise round-off
    # in the real part of (nearly) imaginary spectra would scramble the order.
    grid = 1e-9 * max(1.0, float(np.abs(lam).max(initial=0.0)))
    snapped = np.round(lam.real / grid)
    order = np.lexsort((lam.imag, snapped))
    return lam[order]


def eigenvalues(A) -> np.ndarray:
    """Eigenvalues of ``A`` with multiplicity, sorted by (real, imaginary).

    Real parts within ``1e-9 * max(1, max|lambda|)`` of each other are
    treated as equal for ordering purposes, so purely imaginary spectra
    sort by imaginary part regardless of round-off.
    """
    A = as_cmat(A)
    try:
        lam = scipy.linalg.eigvals(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    return _sort_spectrum(np.asarray(lam, dtype=np.complex128))


def spectral_norm(A) -> float:
    """Largest singular value."""
    A = as_cmat(A)
    return float(np.linalg.norm(A, 2))
