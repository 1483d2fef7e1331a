"""Symplectic Runge-Kutta integrators for isospectral flows.

Three formulations of ``dW/dt = [B(W), W]`` share one stepping interface:

``A``
    Runge-Kutta on the lifted system ``dQ/dt = Q B(Q^H P)^H``,
    ``dP/dt = -P B(Q^H P)``, with ``W = Q^H P``. Unknowns: ``2s`` matrices.
``B``
    Runge-Kutta on the reduced equation
    ``dQ/dt = Q B(Q^H W0 J Q J^{-1})^H`` and ``W = Q^H W0 J Q J^{-1}``.
    Unknowns: ``s`` matrices.
``C``
    The isospectral Runge-Kutta method acting directly on the algebra, with
    ``s^2 + 2s`` unknowns (``1`` for the midpoint fast path at ``s = 1``).

Every step re-anchors the lift at ``Q0 = I``, ``P0 = W_n``. Stage equations
are solved by a Jacobi-style fixed-point iteration started cold from the
anchor. For a symplectic tableau all three produce the same ``W_{n+1}`` up to
the fixed-point tolerance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DivergenceError, IsoflowError, MembershipError, NonFiniteError, StepError
from .quadratic import DEFAULT_MEMBERSHIP_TOL, AlgebraElement, QuadraticStructure, algebra_residual
from .tableaux import Tableau, gauss, symplecticity_defect

__all__ = [
    "Scheme",
    "StepConfig",
    "StepReport",
    "StageSetQP",
    "StageSetQ",
    "StageSetIso",
    "IntegrationResult",
    "fixed_point_solve",
    "solve_stages_A",
    "solve_stages_B",
    "solve_stages_C",
    "step_scheme_A",
    "step_scheme_B",
    "step_scheme_C",
    "step",
    "integrate",
    "stage_count",
]

DIVERGENCE_PATIENCE = 5


class Scheme(str, Enum):
    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class StepConfig:
    """Step size, tableau and fixed-point solver settings.

    ``warm_start`` seeds each step's stage iteration with the previous
    step's converged stages; ``fast_midpoint`` enables the single-unknown
    path of scheme C when ``s == 1``.
    """

    tableau: Tableau = field(default_factory=lambda: gauss(1))
    h: float = 0.1
    fp_tolerance: float = 1e-13
    fp_max_iters: int = 100
    membership_tol: float = DEFAULT_MEMBERSHIP_TOL
    warm_start: bool = False
    fast_midpoint: bool = True

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        if not self.fp_tolerance > 0:
            raise ValueError(f"fp_tolerance must be positive, got {self.fp_tolerance}")
        if self.fp_max_iters < 1:
            raise ValueError(f"fp_max_iters must be at least 1, got {self.fp_max_iters}")
        defect = symplecticity_defect(self.tableau)
        if defect > 1e-14:
            raise ValueError(f"tableau {self.tableau.name!r} is not symplectic (defect {defect:.2e})")

    @property
    def s(self) -> int:
        return self.tableau.s


@dataclass
class StepReport:
    fp_iterations: int
    final_residual: float
    stage_count: int
    wall_time: float = 0.0
    group_residual: float | None = None


@dataclass
class StageSetQP:
    KQ: np.ndarray  # (s, n, n)
    KP: np.ndarray


@dataclass
class StageSetQ:
    KQ: np.ndarray  # (s, n, n)


@dataclass
class StageSetIso:
    U: np.ndarray  # (s, n, n), role (K^Q_i)^H P0
    V: np.ndarray  # (s, n, n), role Q0^H K^P_j
    X: np.ndarray  # (s, s, n, n), role (K^Q_i)^H K^P_j

    @property
    def diagonal(self) -> np.ndarray:
        s = self.X.shape[0]
        return self.X[np.arange(s), np.arange(s)]


def stage_count(scheme, s: int, fast_midpoint: bool = True) -> int:
    """Number of unknown matrices in the stage equations of ``scheme``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.A:
        return 2 * s
    if scheme is Scheme.B:
        return s
    if s == 1 and fast_midpoint:
        return 1
    return s * s + 2 * s


# -- fixed point --------------------------------------------------------------


def _residual(new, old) -> float:
    worst = 0.0
    for a, b in zip(new, old):
        d = np.asarray(a) - np.asarray(b)
        if d.ndim >= 2:
            # per-matrix Frobenius norms via the float view of the difference
            d = d.reshape(-1, d.shape[-2] * d.shape[-1])
            if np.iscomplexobj(d):
                d = d.view(np.float64)
            r = float(np.sqrt(np.einsum("ij,ij->i", d, d).max()))
        else:
            r = float(np.abs(d).max(initial=0.0))
        if not r <= worst:
            worst = r  # also propagates NaN
    return worst


def fixed_point_solve(
    update: Callable,
    initial: Sequence,
    tol: float = 1e-13,
    max_iters: int = 100,
    patience: int = DIVERGENCE_PATIENCE,
):
    """Iterate ``X <- update(X)`` until the update is below ``tol``.

    ``initial`` is a tuple of arrays (a "stage set"); ``update`` maps such a
    tuple to a tuple of the same shapes. The residual is the largest
    Frobenius norm of the change of any stage matrix (absolute value for
    scalar or vector entries).

    Returns:
        ``(stages, iterations, residual)``.

    Raises:
        DivergenceError: if the residual grows ``patience`` times in a row.
        ConvergenceError: if ``max_iters`` sweeps do not reach ``tol``.
        NonFiniteError: if a stage becomes NaN or Inf.
    """
    X = tuple(initial)
    prev = np.inf
    growth = 0
    for it in range(1, max_iters + 1):
        Xn = tuple(update(X))
        r = _residual(Xn, X)
        if not np.isfinite(r):
            raise NonFiniteError(f"fixed-point iteration produced non-finite stages at sweep {it}")
        X = Xn
        if r <= tol:
            return X, it, r
        growth = growth + 1 if r > prev else 0
        if growth >= patience:
            raise DivergenceError(
                f"fixed-point residual increased {patience} times in a row (last {r:.3e})",
                residual=r,
                iterations=it,
            )
        prev = r
    raise ConvergenceError(
        f"fixed-point iteration did not reach {tol:.1e} in {max_iters} sweeps (last {r:.3e})",
        residual=r,
        iterations=max_iters,
    )


# -- helpers --------------------------------------------------------------------


def _combine(coef: np.ndarray, F: np.ndarray) -> np.ndarray:
    """``out_i = sum_j coef_ij F_j`` for a stack ``F`` of shape ``(s, n, n)``."""
    s, n, _ = F.shape
    return (coef @ F.reshape(s, n * n)).reshape(-1, n, n)


def _dagger(M: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(M, -1, -2))


def _matrix(W) -> np.ndarray:
    return W.matrix if isinstance(W, AlgebraElement) else np.asarray(W, dtype=np.complex128)


def _finish(structure, W1, cfg: StepConfig) -> AlgebraElement:
    if structure.is_identity:
        r = float(np.linalg.norm(W1 + W1.conj().T))
    else:
        r = algebra_residual(structure, W1)
    if not r <= cfg.membership_tol:
        raise MembershipError(f"W_(n+1) left the algebra: residual {r:.3e}", r)
    return AlgebraElement.trusted(structure, W1, cfg.membership_tol)


# -- scheme A: lifted (Q, P) system ----------------------------------------------


def solve_stages_A(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """Solve the (Q, P) stage equations from ``Q0 = I``, ``P0 = W``.

    Returns ``(stages, BQ, BP, iterations, residual)`` where ``BQ[i] =
    K^Q_i B_i^H`` and ``BP[i] = K^P_i B_i`` are the increments of the last
    sweep.
    """
    W = _matrix(W)
    n = W.shape[0]
    s = cfg.s
    h = cfg.h
    ha = h * cfg.tableau.a
    eye = np.eye(n, dtype=np.complex128)
    last = {}

    def update(stages):
        KQ, KP = stages
        X = _dagger(KQ) @ KP
        Bk = model.B_stack(X)
        FQ = KQ @ _dagger(Bk)
        FP = KP @ Bk
        last["FQ"], last["FP"] = FQ, FP
        return eye + _combine(ha, FQ), W - _combine(ha, FP)

    if initial is None:
        initial = (np.broadcast_to(eye, (s, n, n)), np.broadcast_to(W, (s, n, n)))
    else:
        initial = (initial.KQ, initial.KP)
    (KQ, KP), its, r = fixed_point_solve(update, initial, cfg.fp_tolerance, cfg.fp_max_iters)
    return StageSetQP(KQ, KP), last["FQ"], last["FP"], its, r


def step_scheme_A(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """One step of the symplectic RK method on the lifted (Q, P) system."""
    t0 = time.perf_counter()
    W = _matrix(W)
    stages, FQ, FP, its, r = solve_stages_A(model, structure, W, cfg, initial)
    hb = cfg.h * cfg.tableau.b[None, :]
    Q1 = np.eye(W.shape[0]) + _combine(hb, FQ)[0]
    P1 = W - _combine(hb, FP)[0]
    W1 = _finish(structure, Q1.conj().T @ P1, cfg)
    report = StepReport(its, r, stage_count("A", cfg.s), time.perf_counter() - t0)
    return W1, report, stages


# -- scheme B: reduced Q equation ---------------------------------------------------


def solve_stages_B(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """Solve the Q-only stage equations from ``Q0 = I``, ``W0 = W``.

    Returns ``(stages, FQ, iterations, residual)`` with ``FQ[i] = K^Q_i B_i^H``.
    """
    W = _matrix(W)
    n = W.shape[0]
    s = cfg.s
    ha = cfg.h * cfg.tableau.a
    eye = np.eye(n, dtype=np.complex128)
    last = {}
    if structure.is_identity:
        # Stage arguments K^H W K are skew-Hermitian, so B_i^H = -B_i.
        def update(stages):
            (KQ,) = stages
            Bk = model.B_stack(_dagger(KQ) @ (W @ KQ), in_algebra=True)
            FQ = KQ @ Bk
            FQ *= -1.0
            last["FQ"] = FQ
            return (eye + _combine(ha, FQ),)

    else:
        WJ = W @ structure.J
        Jinv = structure.J_inv

        def update(stages):
            (KQ,) = stages
            Bk = model.B_stack(_dagger(KQ) @ (WJ @ KQ) @ Jinv, in_algebra=True)
            FQ = KQ @ _dagger(Bk)
            last["FQ"] = FQ
            return (eye + _combine(ha, FQ),)

    initial = (np.broadcast_to(eye, (s, n, n)),) if initial is None else (initial.KQ,)
    (KQ,), its, r = fixed_point_solve(update, initial, cfg.fp_tolerance, cfg.fp_max_iters)
    return StageSetQ(KQ), last["FQ"], its, r


def step_scheme_B(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """One step of the symplectic RK method on the reduced Q equation.

    The report's ``group_residual`` is ``||Q1^H J Q1 - J||_F``.
    """
    t0 = time.perf_counter()
    W = _matrix(W)
    stages, FQ, its, r = solve_stages_B(model, structure, W, cfg, initial)
    Q1 = np.eye(W.shape[0]) + _combine(cfg.h * cfg.tableau.b[None, :], FQ)[0]
    Q1h = Q1.conj().T
    if structure.is_identity:
        g = float(np.linalg.norm(Q1h @ Q1 - np.eye(W.shape[0])))
        W1 = Q1h @ W @ Q1
    else:
        J = structure.J
        g = float(np.linalg.norm(Q1h @ J @ Q1 - J))
        W1 = Q1h @ W @ J @ Q1 @ structure.J_inv
    if g > cfg.membership_tol:
        raise MembershipError(f"Q1 left the group: residual {g:.3e}", g)
    W1 = _finish(structure, W1, cfg)
    report = StepReport(its, r, stage_count("B", cfg.s), time.perf_counter() - t0, g)
    return W1, report, stages


# -- scheme C: isospectral RK on the algebra ------------------------------------------


def solve_stages_C(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """Solve the algebra-level stage system in the unknowns ``U, V, X``.

    With ``B_k = B(X_kk)``::

        U_i  = W + h sum_k a_ik B_k U_k
        V_j  = W - h sum_l a_jl V_l B_l
        X_ij = W + h sum_k a_ik B_k U_k - h sum_l a_jl V_l B_l
                 - h^2 sum_kl a_ik a_jl B_k X_kl B_l

    Returns ``(stages, BU, VB, BXB, iterations, residual)`` from the last sweep.
    """
    W = _matrix(W)
    n = W.shape[0]
    s = cfg.s
    h = cfg.h
    a = cfg.tableau.a
    ha = h * a
    h2aa = h * h * np.kron(a, a)
    diag = (np.arange(s), np.arange(s))
    last = {}

    def update(stages):
        U, V, X = stages
        Bk = model.B_stack(X[diag], in_algebra=True)
        BU = Bk @ U
        VB = V @ Bk
        BXB = (Bk[:, None] @ X) @ Bk[None, :]
        last["BU"], last["VB"], last["BXB"] = BU, VB, BXB
        aBU = _combine(ha, BU)
        aVB = _combine(ha, VB)
        Un = W + aBU
        Vn = W - aVB
        Xn = (W + aBU[:, None] - aVB[None, :]) - _combine(h2aa, BXB.reshape(s * s, n, n)).reshape(
            s, s, n, n
        )
        return Un, Vn, Xn

    if initial is None:
        initial = (
            np.broadcast_to(W, (s, n, n)),
            np.broadcast_to(W, (s, n, n)),
            np.broadcast_to(W, (s, s, n, n)),
        )
    else:
        initial = (initial.U, initial.V, initial.X)
    (U, V, X), its, r = fixed_point_solve(update, initial, cfg.fp_tolerance, cfg.fp_max_iters)
    return StageSetIso(U, V, X), last["BU"], last["VB"], last["BXB"], its, r


def _midpoint_C(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """Isospectral midpoint: ``W = (I - hB/2) X (I + hB/2)`` with ``B = B(X)``.

    Iterates ``X <- W + h/2 [B, X] + h^2/4 B X B``. On u(n) (``J = I``)
    ``X B = (B X)^H`` for skew-Hermitian ``B, X``, so each sweep costs two
    matrix products.
    """
    h = cfg.h
    last = {}
    if structure.is_identity:

        def update(stages):
            (X,) = stages
            Bx = model.B_stack(X, in_algebra=True)
            BX = Bx @ X
            BXB = BX @ Bx
            last["B"], last["BX"], last["BXB"] = Bx, BX, BXB
            return (W + (0.5 * h) * (BX - BX.conj().T) + (0.25 * h * h) * BXB,)

    else:

        def update(stages):
            (X,) = stages
            Bx = model.B_stack(X, in_algebra=True)
            BX = Bx @ X
            XB = X @ Bx
            BXB = BX @ Bx
            last["B"], last["BX"], last["XB"], last["BXB"] = Bx, BX, XB, BXB
            return (W + (0.5 * h) * (BX - XB) + (0.25 * h * h) * BXB,)

    start = (W,) if initial is None else (initial,)
    (X,), its, r = fixed_point_solve(update, start, cfg.fp_tolerance, cfg.fp_max_iters)
    XB = last["BX"].conj().T if structure.is_identity else last["XB"]
    # (I + hB/2) X (I - hB/2) = X + h/2 (BX - XB) - h^2/4 BXB
    W1 = X + (0.5 * h) * (last["BX"] - XB) - (0.25 * h * h) * last["BXB"]
    return X, W1, its, r


def step_scheme_C(model, structure: QuadraticStructure, W, cfg: StepConfig, initial=None):
    """One step of the isospectral symplectic RK method."""
    t0 = time.perf_counter()
    W = _matrix(W)
    s = cfg.s
    if s == 1 and cfg.fast_midpoint:
        X, W1, its, r = _midpoint_C(model, structure, W, cfg, initial)
        stages = X
    else:
        stages, BU, VB, BXB, its, r = solve_stages_C(model, structure, W, cfg, initial)
        n = W.shape[0]
        b = cfg.tableau.b
        hb = cfg.h * b[None, :]
        hhbb = cfg.h**2 * np.outer(b, b).reshape(1, s * s)
        W1 = W + _combine(hb, BU - VB)[0] - _combine(hhbb, BXB.reshape(s * s, n, n))[0]
    W1 = _finish(structure, W1, cfg)
    report = StepReport(its, r, stage_count("C", s, cfg.fast_midpoint), time.perf_counter() - t0)
    return W1, report, stages


_STEPPERS = {Scheme.A: step_scheme_A, Scheme.B: step_scheme_B, Scheme.C: step_scheme_C}


def step(scheme, model, structure, W, cfg: StepConfig, initial=None):
    """Dispatch to ``step_scheme_A/B/C``; returns ``(W1, report, stages)``."""
    return _STEPPERS[Scheme(scheme)](model, structure, W, cfg, initial)


# -- trajectories -----------------------------------------------------------------


@dataclass
class IntegrationResult:
    final: AlgebraElement
    steps: int
    fp_iterations_total: int
    fp_iterations_max: int
    wall_time: float
    group_residual_max: float | None
    reports: list[StepReport]

    @property
    def fp_iterations_mean(self) -> float:
        return self.fp_iterations_total / self.steps if self.steps else 0.0


def steps_for(t_end: float, h: float) -> int:
    """Number of steps covering ``t_end``; ``t_end / h`` must be a whole number."""
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    ratio = t_end / h
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"t_end / h = {ratio} is not a whole number of steps")
    return n


def integrate(model, structure, scheme, W0, cfg: StepConfig, t_end: float, observers=()):
    """Advance ``W0`` to ``t_end`` with fixed step ``cfg.h``.

    Each observer is called as ``observer(n, t, W, report)`` after step ``n``
    (1-based). Errors from a step are re-raised as :class:`StepError` carrying
    the step index.
    """
    scheme = Scheme(scheme)
    nsteps = steps_for(t_end, cfg.h)
    stepper = _STEPPERS[scheme]
    W = W0 if isinstance(W0, AlgebraElement) else AlgebraElement(structure, W0, cfg.membership_tol)
    reports = []
    total = peak = 0
    gmax = None
    stages = None
    t0 = time.perf_counter()
    for k in range(1, nsteps + 1):
        try:
            W, rep, new_stages = stepper(model, structure, W, cfg, stages)
        except IsoflowError as exc:
            raise StepError(k, exc) from exc
        if cfg.warm_start:
            stages = new_stages
        reports.append(rep)
        total += rep.fp_iterations
        peak = max(peak, rep.fp_iterations)
        if rep.group_residual is not None:
            gmax = rep.group_residual if gmax is None else max(gmax, rep.group_residual)
        for obs in observers:
            obs(k, k * cfg.h, W, rep)
    wall = time.perf_counter() - t0
    return IntegrationResult(W, nsteps, total, peak, wall, gmax, reports)
