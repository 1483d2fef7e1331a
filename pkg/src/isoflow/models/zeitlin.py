"""Euler-Zeitlin equations: the su(N) quantization of 2-D Euler flow on the sphere.

Conventions
-----------
* Spin generators ``S1, S2, S3`` of the N-dimensional irreducible su(2)
  representation, ``j = (N - 1)/2``, basis ordered ``m = j, j-1, ..., -j``.
* Quantized Laplacian ``Lap(W) = -sum_a [S_a, [S_a, W]]``. Its eigenvalues on
  trace-free matrices are ``-l(l+1)``, ``l = 1..N-1``, with no N-dependent
  rescaling.
* Stream matrix ``B(W) = Lap^{-1} W`` (note the sign: ``-Lap^{-1} W`` would
  simply run the flow backwards in time).
* Hamiltonian ``H(W) = 1/2 Re <W, Lap^{-1} W>_F``.

The Laplacian maps each diagonal band ``{(i, i+m)}`` to itself and acts on it
as a symmetric tridiagonal matrix, so the bands are concatenated into one
tridiagonal system of size ``N^2`` that is Cholesky-factorized once. The
singular main-diagonal band (its kernel is the identity) is inverted with a
precomputed ``N x N`` pseudo-inverse instead.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from ..dense import as_cmat, spectral_norm
from ..errors import DimensionError, IsoflowError, MembershipError
from ..quadratic import AlgebraElement, QuadraticStructure
from .base import IsospectralModel

__all__ = [
    "ZeitlinModel",
    "spin_generators",
    "load_coefficients",
    "default_coefficients",
    "lcg_coefficients",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240101
MAX_INITIAL_DEGREE = 4


def spin_generators(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin matrices of the N-dimensional irreducible representation of su(2)."""
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    j = (N - 1) / 2
    m = j - np.arange(N)
    # Raising operator: S+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> sits one
    # index earlier in the basis.
    raise_coef = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    Sp = np.diag(raise_coef, 1).astype(np.complex128)
    Sm = Sp.T.copy()
    S1 = (Sp + Sm) / 2
    S2 = (Sp - Sm) / 2j
    S3 = np.diag(m).astype(np.complex128)
    return S1, S2, S3


class ZeitlinModel(IsospectralModel):
    """Euler-Zeitlin flow on su(N) with ``B(W) = Lap^{-1} W``."""

    name = "zeitlin"

    def __init__(self, N: int):
        if N < 2:
            raise ValueError(f"N must be at least 2, got {N}")
        self.N = N
        self.structure = QuadraticStructure.identity(N)
        self.S = spin_generators(N)
        j = (N - 1) / 2
        self.casimir = j * (j + 1)
        self._diag_m = j - np.arange(N)
        # ladder[p] = (S+)[p-1, p] for p = 1..N-1, zero-padded at both ends
        self._ladder = np.zeros(N + 1)
        self._ladder[1:N] = np.sqrt(self.casimir - self._diag_m[1:] * (self._diag_m[1:] + 1))
        self._build_banded_system()
        self._harmonics: dict[tuple[int, int], np.ndarray] = {}

    # -- banded structure -------------------------------------------------

    def band_coefficients(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Diagonal and off-diagonal of the Laplacian restricted to band ``m``.

        Band ``m`` holds the entries ``(i, i+m)``; consecutive entries are
        coupled with weight ``a_{i+1} a_{k+1}`` where ``a`` are the ladder
        coefficients.
        """
        N = self.N
        if abs(m) >= N:
            raise ValueError(f"band offset {m} out of range for N={N}")
        i = np.arange(max(0, -m), min(N, N - m))
        k = i + m
        d = self._diag_m
        diag = -2.0 * self.casimir + 2.0 * d[i] * d[k]
        off = self._ladder[i[:-1] + 1] * self._ladder[k[:-1] + 1]
        return diag, off

    def _band_system(self, offsets, band0_scale=1.0) -> "_BandSystem":
        rows, cols, diags, offs = [], [], [], []
        for m in offsets:
            i = np.arange(max(0, -m), min(self.N, self.N - m))
            diag, off = self.band_coefficients(m)
            rows.append(i)
            cols.append(i + m)
            diags.append(diag)
            offs.append(np.append(off, 0.0))
        return _BandSystem(self.N, rows, cols, diags, offs, list(offsets).index(0), band0_scale)

    def _build_banded_system(self):
        N = self.N
        self._full = self._band_system(range(-(N - 1), N))
        self._upper = self._band_system(range(0, N), band0_scale=0.5)
        # position in [-Z, conj(Z)] of each output entry of the skew path
        pos = np.empty(N * N, dtype=np.intp)
        pos[self._upper.perm] = np.arange(len(self._upper.perm))
        i, j = np.divmod(np.arange(N * N), N)
        lower = i > j
        self._skew_index = np.where(lower, len(self._upper.perm) + pos[j * N + i], pos)

    def _solve_bands(self, X: np.ndarray) -> np.ndarray:
        """Apply ``Lap^{-1}`` to the trace-free part of each matrix in ``X``."""
        N = self.N
        lead = X.shape[:-2]
        flat = X.reshape(-1, N * N)
        sys = self._full
        sol = sys.solve_negated(np.take(flat, sys.perm, axis=1))
        np.negative(sol, out=sol)
        return np.take(sol, sys.inverse, axis=1).reshape(*lead, N, N)

    def _solve_bands_skew(self, X: np.ndarray) -> np.ndarray:
        """Same as :meth:`_solve_bands` for skew-Hermitian ``X``.

        ``Lap`` commutes with the adjoint, so only the bands ``m >= 0`` are
        solved (diagonal halved) and the result is completed as ``Z - Z^H``.
        """
        N = self.N
        lead = X.shape[:-2]
        flat = X.reshape(-1, N * N)
        sys = self._upper
        M = len(sys.perm)
        # Z holds minus the half-diagonal upper part, so the result is Z^H - Z:
        # -Z above the diagonal, conj(Z^T) below it, both on the diagonal.
        Z = sys.solve_negated(np.take(flat, sys.perm, axis=1))
        ext = np.empty((Z.shape[0], 2 * M), dtype=np.complex128)
        np.negative(Z, out=ext[:, :M])
        np.conjugate(Z, out=ext[:, M:])
        out = np.take(ext, self._skew_index, axis=1)
        out[:, :: N + 1] += ext[:, M + sys.band0.start : M + sys.band0.stop]
        return out.reshape(*lead, N, N)

    # -- public operators -------------------------------------------------

    def laplacian_apply(self, W) -> np.ndarray:
        """``-sum_a [S_a, [S_a, W]]``."""
        W = np.asarray(W, dtype=np.complex128)
        if W.shape[-2:] != (self.N, self.N):
            raise DimensionError(f"expected ({self.N}, {self.N}) matrices, got {W.shape}")
        out = np.zeros_like(W)
        for S in self.S:
            C = S @ W - W @ S
            out -= S @ C - C @ S
        return out

    def laplacian_solve(self, W) -> np.ndarray:
        """Trace-free ``psi`` with ``Lap(psi) = W``.

        Raises:
            MembershipError: if ``|trace(W)| > 1e-12 ||W||_F``; the identity
                spans the kernel of the Laplacian.
        """
        W = as_cmat(W)
        if W.shape != (self.N, self.N):
            raise DimensionError(f"expected ({self.N}, {self.N}) matrix, got {W.shape}")
        tr = abs(np.trace(W))
        if tr > 1e-12 * np.linalg.norm(W):
            raise MembershipError(f"Laplacian is singular on the identity: |trace(W)| = {tr:.3e}", tr)
        return self._solve_bands(W)

    def B_stack(self, X, in_algebra=False):
        X = np.asarray(X)
        return self._solve_bands_skew(X) if in_algebra else self._solve_bands(X)

    def B(self, W):
        return self.laplacian_solve(self._checked(W))

    def H(self, W):
        W = getattr(W, "matrix", W)
        W = as_cmat(W)
        return 0.5 * float(np.vdot(W, self._solve_bands(W)).real)

    # -- harmonics and initial data -------------------------------------

    def harmonic(self, l: int, m: int) -> np.ndarray:
        """Frobenius-normalized matrix harmonic ``T_lm`` supported on band ``m``.

        ``T_lm`` for ``m >= 0`` is the eigenvector of the band-``m`` tridiagonal
        block with eigenvalue ``-l(l+1)``, with its first nonzero component
        made positive. Negative ``m`` use ``T_{l,-m} = (-1)^m T_{l,m}^H``.
        """
        N = self.N
        if not (1 <= l <= N - 1) or abs(m) > l:
            raise ValueError(f"harmonic (l={l}, m={m}) out of range for N={N}")
        if m < 0:
            return (-1) ** m * self.harmonic(l, -m).conj().T
        key = (l, m)
        if key not in self._harmonics:
            diag, off = self.band_coefficients(m)
            if len(diag) == 1:
                evals, evecs = diag.copy(), np.ones((1, 1))
            else:
                evals, evecs = scipy.linalg.eigh_tridiagonal(diag, off)
            target = -l * (l + 1)
            idx = int(np.argmin(np.abs(evals - target)))
            if abs(evals[idx] - target) > 1e-8 * max(1.0, abs(target)):
                raise IsoflowError(
                    f"no eigenvalue -l(l+1)={target} on band {m}: closest is {evals[idx]}"
                )
            v = evecs[:, idx]
            first = np.flatnonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0]
            v = v * np.sign(v[first]) / np.linalg.norm(v)
            T = np.zeros((N, N), dtype=np.complex128)
            i = np.arange(N - m)
            T[i, i + m] = v
            T.setflags(write=False)
            self._harmonics[key] = T
        return self._harmonics[key]

    def initial_vorticity(self, coefficients=None) -> AlgebraElement:
        """Assemble a unit spectral norm vorticity from harmonic coefficients.

        ``coefficients`` maps ``(l, m)`` with ``1 <= l <= 4`` and
        ``0 <= m <= l`` to complex numbers (default: the shipped set). With
        ``F = sum c_lm T_lm`` the vorticity is the trace-free skew-Hermitian
        part of ``iF``, i.e. ``i (F + F^H) / 2`` minus its trace, scaled to
        spectral norm one. A real ``c_10`` therefore yields a multiple of
        ``i S3``.
        """
        if coefficients is None:
            coefficients = default_coefficients()
        N = self.N
        F = np.zeros((N, N), dtype=np.complex128)
        for (l, m), c in coefficients.items():
            if not (1 <= l <= MAX_INITIAL_DEGREE) or not (0 <= m <= l):
                raise ValueError(f"mode (l={l}, m={m}) outside 1 <= l <= 4, 0 <= m <= l")
            F += complex(c) * self.harmonic(l, m)
        W = 0.5j * (F + F.conj().T)
        W -= (np.trace(W) / N) * np.eye(N)
        nrm = spectral_norm(W)
        if nrm == 0.0:
            raise ValueError("initial vorticity is zero: all coefficients vanish")
        return AlgebraElement(self.structure, W / nrm)

    def initial_state(self, coefficients=None) -> AlgebraElement:
        return self.initial_vorticity(coefficients)


class _BandSystem:
    """Concatenated diagonal bands of ``-Lap`` as one SPD tridiagonal system.

    Band 0 (the main diagonal) is singular, its kernel being the identity.
    It is replaced by an identity block in the tridiagonal factorization and
    handled separately with the precomputed pseudo-inverse of its block,
    which also projects out the trace. ``band0_scale`` multiplies that block
    (the skew path stores half the diagonal).
    """

    def __init__(self, N, rows, cols, diags, offs, zero_band, band0_scale=1.0):
        self.perm = np.concatenate(rows) * N + np.concatenate(cols)
        # inverse of perm; only meaningful when every entry is covered
        self.inverse = np.argsort(self.perm) if len(self.perm) == N * N else None
        start = sum(len(r) for r in rows[:zero_band])
        self.band0 = slice(start, start + N)
        d = -np.concatenate(diags)
        e = -np.concatenate(offs)[:-1]
        e0 = e[start : start + N - 1]
        T0 = np.diag(d[self.band0]) + np.diag(e0, 1) + np.diag(e0, -1)
        # rows of the right-hand side multiply from the left: psi0 = w0 @ pinv(T0)^T
        P = np.eye(N) - 1.0 / N
        self.band0_op = (band0_scale * (P @ np.linalg.pinv(T0, hermitian=True) @ P).T).astype(np.complex128)
        d[self.band0] = 1.0
        e[start : start + N - 1] = 0.0
        if start > 0:
            e[start - 1] = 0.0
        if start + N - 1 < len(e):
            e[start + N - 1] = 0.0
        d, e, info = lapack.zpttrf(d, e.astype(np.complex128))
        if info != 0:
            raise IsoflowError(f"tridiagonal factorization failed (info={info})")
        self._factors = (d, e)

    def solve_negated(self, rhs: np.ndarray) -> np.ndarray:
        """Solve ``-Lap psi = rhs`` (trace-free ``psi``) for each row of ``rhs``.

        ``rhs`` is band-ordered and complex; it is overwritten and returned.
        """
        sol, info = lapack.zpttrs(*self._factors, rhs.T, overwrite_b=1)
        if info != 0:
            raise IsoflowError(f"tridiagonal solve failed (info={info})")
        psi = sol.T
        psi[:, self.band0] = psi[:, self.band0] @ self.band0_op
        return psi


def lcg_coefficients(seed: int = DEFAULT_SEED, lmax: int = MAX_INITIAL_DEGREE):
    """Deterministic coefficients in [-1, 1) from a 32-bit linear congruential sequence.

    Uses ``x <- (1664525 x + 1013904223) mod 2^32`` and draws real then
    imaginary parts for ``(l, m)`` in lexicographic order.
    """
    x = seed % 2**32
    out = {}

    def draw():
        nonlocal x
        x = (1664525 * x + 1013904223) % 2**32
        return 2.0 * x / 2**32 - 1.0

    for l in range(1, lmax + 1):
        for m in range(0, l + 1):
            re = draw()
            im = draw()
            out[(l, m)] = complex(re, im)
    return out


def load_coefficients(path) -> dict[tuple[int, int], complex]:
    """Read ``l m re im`` lines. Blank lines and ``#`` comments are skipped."""
    out = {}
    text = path.read_text() if hasattr(path, "read_text") else Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 'l m re im', got {line!r}")
        l, m = int(parts[0]), int(parts[1])
        out[(l, m)] = complex(float(parts[2]), float(parts[3]))
    return out


def default_coefficients() -> dict[tuple[int, int], complex]:
    return load_coefficients(resources.files("isoflow.data") / "initial_vorticity.txt")
