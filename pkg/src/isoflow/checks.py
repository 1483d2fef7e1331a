"""Structural verification suite behind ``isoflow check``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrators import StepConfig, integrate
from .models import ZeitlinModel
from .quadratic import QuadraticStructure, so3_basis, su_basis, verify_structure
from .tableaux import gauss, quadrature_order, symplecticity_defect

__all__ = ["CheckResult", "dense_laplacian_spectrum", "expected_laplacian_spectrum", "run_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} (limit {self.threshold:.1e})"


def _le(name, value, threshold) -> CheckResult:
    return CheckResult(name, float(value), threshold, bool(value <= threshold))


def dense_laplacian_spectrum(N: int) -> np.ndarray:
    """Eigenvalues of the Laplacian on trace-free N x N matrices, ascending.

    The operator is assembled densely from its commutator definition and
    restricted to an orthonormal basis of the trace-free subspace.
    """
    model = ZeitlinModel(N)
    E = np.eye(N * N, dtype=np.complex128).reshape(N * N, N, N)
    L = model.laplacian_apply(E).reshape(N * N, N * N).T
    # Orthonormal basis of the complement of the identity.
    ones = np.eye(N).reshape(-1, 1).astype(np.complex128)
    Q, _ = np.linalg.qr(np.hstack([ones, np.eye(N * N)]))
    Q = Q[:, 1 : N * N]
    M = Q.conj().T @ L @ Q
    return np.sort(np.linalg.eigvalsh(0.5 * (M + M.conj().T)))


def expected_laplacian_spectrum(N: int) -> np.ndarray:
    """``-l(l+1)`` with multiplicity ``2l+1`` for ``l = 1..N-1``, ascending."""
    vals = [-l * (l + 1) for l in range(1, N) for _ in range(2 * l + 1)]
    return np.sort(np.array(vals, dtype=np.float64))


def run_checks(stages=(1, 2, 3), su_n=17, laplacian_sizes=(2, 5, 9), steps=50) -> list[CheckResult]:
    """Run the structural checks; each result states its value and limit."""
    out = []
    for s in stages:
        t = gauss(s)
        out.append(_le(f"symplecticity defect gauss({s})", symplecticity_defect(t), 1e-14))
        q = quadrature_order(t)
        out.append(CheckResult(f"quadrature order gauss({s}) == {2 * s}", q, 2 * s, q == 2 * s))
    rep = verify_structure(QuadraticStructure.identity(su_n), su_basis(su_n))
    out.append(_le(f"structure residual su({su_n})", rep.max_residual, 1e-12))
    rep = verify_structure(QuadraticStructure.identity(3), so3_basis())
    out.append(_le("structure residual so(3)", rep.max_residual, 1e-12))
    for N in laplacian_sizes:
        err = np.max(np.abs(dense_laplacian_spectrum(N) - expected_laplacian_spectrum(N)))
        out.append(_le(f"Laplacian spectrum N={N}", err, 1e-10))
    model = ZeitlinModel(su_n)
    W0 = model.initial_state()
    for s in stages:
        cfg = StepConfig(tableau=gauss(s), h=0.1)
        res = integrate(model, model.structure, "B", W0, cfg, t_end=steps * cfg.h)
        worst = max(r.group_residual for r in res.reports)
        out.append(_le(f"scheme B group residual, su({su_n}), gauss({s}), {steps} steps", worst, 1e-11))
    return out
