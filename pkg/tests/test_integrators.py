import numpy as np
import pytest

from isoflow.dense import eigenvalues
from isoflow.errors import ConvergenceError, DivergenceError, MembershipError, NonFiniteError, StepError
from isoflow.integrators import (
    Scheme,
    StepConfig,
    fixed_point_solve,
    integrate,
    solve_stages_A,
    solve_stages_B,
    solve_stages_C,
    stage_count,
    step,
    steps_for,
)
from isoflow.models import IsospectralModel, RigidBodyModel, StaticModel, ZeitlinModel
from isoflow.quadratic import AlgebraElement, QuadraticStructure, algebra_residual, group_residual
from isoflow.tableaux import explicit_euler, gauss

TOL = 1e-13


class WeightedModel(IsospectralModel):
    """``B(W) = J^{-1} (A * (J W))`` with a real symmetric weight matrix ``A``.

    For Hermitian ``J`` the algebra condition is that ``JW`` is skew-Hermitian,
    for skew-Hermitian ``J`` that it is Hermitian; an entrywise product with a
    real symmetric ``A`` keeps either property, so ``B`` maps the algebra to
    itself for any such ``J``.
    """

    name = "weighted"

    def __init__(self, J, seed=0):
        self.structure = QuadraticStructure(J)
        n = self.structure.dim
        r = np.random.default_rng(seed).uniform(0.5, 1.5, (n, n))
        self.A = 0.5 * (r + r.T)

    def B_stack(self, X, in_algebra=False):
        return self.structure.J_inv @ (self.A * (self.structure.J @ X))


def symplectic_J(k):
    Z, I = np.zeros((k, k)), np.eye(k)
    return np.block([[Z, I], [-I, Z]]).astype(complex)


def weighted_initial(model, seed=1):
    J = model.structure.J
    n = J.shape[0]
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    S = 0.5 * (X - X.conj().T) if np.allclose(J, J.conj().T) else 0.5 * (X + X.conj().T)
    W = np.linalg.solve(J, S)
    return AlgebraElement(model.structure, W / np.linalg.norm(W, 2))


GENERAL_J = {
    "u21": np.diag([1.0, 1.0, -1.0]).astype(complex),
    "sp4": symplectic_J(2),
}


# -- fixed-point solver ---------------------------------------------------------


def test_fixed_point_identity_map():
    x0 = (np.ones((1, 2, 2)),)
    (x,), its, r = fixed_point_solve(lambda s: s, x0, tol=TOL)
    assert its == 1 and r == 0
    assert np.all(x == 1)


def test_fixed_point_scalar_contraction():
    (x,), its, r = fixed_point_solve(lambda s: (0.5 * s[0] + 1.0,), (np.zeros(1),), tol=1e-13, max_iters=100)
    assert abs(x[0] - 2.0) <= 1e-13 and r <= 1e-13
    # the residual halves each sweep: 2^-k <= 1e-13 needs k = 44
    assert its <= 45


def test_fixed_point_growth_is_detected_early():
    with pytest.raises(DivergenceError) as info:
        fixed_point_solve(lambda s: (2.0 * s[0] + 1.0,), (np.zeros(1),), tol=TOL, max_iters=100)
    assert info.value.iterations < 100
    assert info.value.residual > 1


def test_fixed_point_errors():
    with pytest.raises(NonFiniteError):
        fixed_point_solve(lambda s: (s[0] * np.nan,), (np.ones(1),))
    with pytest.raises(ConvergenceError) as info:
        fixed_point_solve(lambda s: (0.9 * s[0] + 1.0,), (np.zeros(1),), tol=TOL, max_iters=10)
    assert info.value.iterations == 10 and not isinstance(info.value, DivergenceError)


def test_step_config_validation():
    with pytest.raises(ValueError):
        StepConfig(h=0.0)
    with pytest.raises(ValueError):
        StepConfig(fp_tolerance=-1.0)
    with pytest.raises(ValueError):
        StepConfig(fp_max_iters=0)
    with pytest.raises(ValueError, match="not symplectic"):
        StepConfig(tableau=explicit_euler)
    assert StepConfig().h == 0.1 and StepConfig().fp_tolerance == 1e-13 and StepConfig().s == 1


# -- stage counts -----------------------------------------------------------------


@pytest.mark.parametrize("s", [1, 2, 3])
def test_stage_counts(s):
    assert stage_count("A", s) == 2 * s
    assert stage_count("B", s) == s
    assert stage_count("C", s, fast_midpoint=False) == s * s + 2 * s
    assert stage_count(Scheme.C, s) == (1 if s == 1 else s * s + 2 * s)


# -- trivial flows ----------------------------------------------------------------


@pytest.mark.parametrize("scheme", "ABC")
@pytest.mark.parametrize("s", [1, 2, 3])
def test_static_model_is_fixed(scheme, s):
    m = StaticModel(4)
    W0 = m.initial_state()
    W1, rep, _ = step(scheme, m, m.structure, W0, StepConfig(tableau=gauss(s)))
    np.testing.assert_array_equal(W1.matrix, W0.matrix)
    res = integrate(m, m.structure, scheme, W0, StepConfig(tableau=gauss(s)), t_end=1.0)
    np.testing.assert_array_equal(res.final.matrix, W0.matrix)


# -- equivalence of the three formulations ----------------------------------------


def _models():
    rb = RigidBodyModel()
    z = ZeitlinModel(17)
    return {"rigid_body": (rb, rb.initial_state()), "zeitlin17": (z, z.initial_state())}


MODELS = _models()


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("s", [1, 2, 3])
def test_schemes_agree_after_one_step(name, s):
    m, W0 = MODELS[name]
    cfg = StepConfig(tableau=gauss(s), h=0.1, fp_tolerance=TOL)
    out = {sc: step(sc, m, m.structure, W0, cfg)[0].matrix for sc in "ABC"}
    assert np.linalg.norm(out["A"] - out["B"]) <= 100 * TOL
    assert np.linalg.norm(out["A"] - out["C"]) <= 100 * TOL
    assert np.linalg.norm(out["B"] - out["C"]) <= 100 * TOL


def test_rigid_body_s1_schemes_agree_to_ten_tolerances():
    m, W0 = MODELS["rigid_body"]
    cfg = StepConfig(tableau=gauss(1), h=0.1, fp_tolerance=TOL)
    WA, WB, WC = (step(sc, m, m.structure, W0, cfg)[0].matrix for sc in "ABC")
    assert np.linalg.norm(WA - WB) <= 10 * TOL
    assert np.linalg.norm(WA - WC) <= 10 * TOL


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("s", [1, 2, 3])
def test_stage_identity(name, s):
    m, W0 = MODELS[name]
    cfg = StepConfig(tableau=gauss(s), h=0.1, fp_tolerance=TOL)
    stA = solve_stages_A(m, m.structure, W0, cfg)[0]
    stB = solve_stages_B(m, m.structure, W0, cfg)[0]
    W = W0.matrix
    for i in range(s):
        assert np.linalg.norm(stA.KP[i] - W @ stB.KQ[i]) <= 10 * TOL
        assert np.linalg.norm(stA.KQ[i] - stB.KQ[i]) <= 10 * TOL


@pytest.mark.parametrize("name", sorted(MODELS))
def test_midpoint_fast_path_matches_general_path(name):
    m, W0 = MODELS[name]
    fast = step("C", m, m.structure, W0, StepConfig(tableau=gauss(1), fast_midpoint=True))
    slow = step("C", m, m.structure, W0, StepConfig(tableau=gauss(1), fast_midpoint=False))
    assert fast[1].stage_count == 1 and slow[1].stage_count == 3
    assert np.linalg.norm(fast[0].matrix - slow[0].matrix) <= 10 * TOL


@pytest.mark.parametrize("s", [1, 2, 3])
def test_scheme_C_stage_matrices(s):
    m, W0 = MODELS["zeitlin17"]
    cfg = StepConfig(tableau=gauss(s), h=0.1)
    stA = solve_stages_A(m, m.structure, W0, cfg)[0]
    stC = solve_stages_C(m, m.structure, W0, cfg)[0]
    # U_i, V_j, X_ij are the descended (K^Q_i)^H P0, Q0^H K^P_j, (K^Q_i)^H K^P_j
    W = W0.matrix
    for i in range(s):
        assert np.linalg.norm(stC.U[i] - stA.KQ[i].conj().T @ W) <= 100 * TOL
        assert np.linalg.norm(stC.V[i] - stA.KP[i]) <= 100 * TOL
        for j in range(s):
            assert np.linalg.norm(stC.X[i, j] - stA.KQ[i].conj().T @ stA.KP[j]) <= 100 * TOL
    for Xkk in stC.diagonal:
        assert algebra_residual(m.structure, Xkk) <= 1e-10


@pytest.mark.parametrize("kind", sorted(GENERAL_J))
@pytest.mark.parametrize("s", [1, 2, 3])
def test_general_J_schemes(kind, s):
    m = WeightedModel(GENERAL_J[kind])
    W0 = weighted_initial(m)
    cfg = StepConfig(tableau=gauss(s), h=0.1, fp_tolerance=TOL)
    out = {}
    for sc in "ABC":
        W1, rep, _ = step(sc, m, m.structure, W0, cfg)
        assert algebra_residual(m.structure, W1.matrix) <= 1e-10
        out[sc] = W1.matrix
        if sc == "B":
            assert rep.group_residual <= 1e-11
    assert np.linalg.norm(out["A"] - out["B"]) <= 100 * TOL
    assert np.linalg.norm(out["A"] - out["C"]) <= 100 * TOL
    J, Jinv = m.structure.J, m.structure.J_inv
    stA = solve_stages_A(m, m.structure, W0, cfg)[0]
    stB = solve_stages_B(m, m.structure, W0, cfg)[0]
    for i in range(s):
        assert np.linalg.norm(stA.KP[i] - W0.matrix @ J @ stB.KQ[i] @ Jinv) <= 10 * TOL
        assert group_residual(m.structure, stB.KQ[i]) < 1  # stages are near, not in, the group


def test_general_J_spectrum_preserved():
    m = WeightedModel(GENERAL_J["sp4"])
    W0 = weighted_initial(m)
    lam0 = eigenvalues(W0.matrix)
    for sc in "ABC":
        res = integrate(m, m.structure, sc, W0, StepConfig(tableau=gauss(2)), t_end=2.0)
        assert np.max(np.abs(eigenvalues(res.final.matrix) - lam0)) <= 1e-9


# -- single-step properties ------------------------------------------------------------


def test_scheme_A_preserves_spectrum_on_zeitlin():
    m, W0 = MODELS["zeitlin17"]
    W1, _, _ = step("A", m, m.structure, W0, StepConfig(tableau=gauss(2)))
    assert np.max(np.abs(eigenvalues(W1.matrix) - eigenvalues(W0.matrix))) <= 1e-10


def test_scheme_B_group_residual_on_zeitlin():
    m, W0 = MODELS["zeitlin17"]
    _, rep, _ = step("B", m, m.structure, W0, StepConfig(tableau=gauss(3)))
    assert rep.group_residual <= 1e-11


@pytest.mark.parametrize("scheme,count", [("A", 4), ("B", 2), ("C", 8)])
def test_reports(scheme, count):
    m, W0 = MODELS["zeitlin17"]
    _, rep, _ = step(scheme, m, m.structure, W0, StepConfig(tableau=gauss(2)))
    assert rep.stage_count == count
    assert rep.final_residual <= TOL
    assert 1 <= rep.fp_iterations <= 100
    assert rep.wall_time > 0
    assert (rep.group_residual is not None) == (scheme == "B")


# -- trajectories -----------------------------------------------------------------------


def test_steps_for():
    assert steps_for(5.0, 0.1) == 50
    with pytest.raises(ValueError):
        steps_for(1.05, 0.1)
    with pytest.raises(ValueError):
        steps_for(0.0, 0.1)


def test_integrate_counts_steps_and_calls_observers():
    m, W0 = MODELS["rigid_body"]
    seen = []
    res = integrate(m, m.structure, "C", W0, StepConfig(), t_end=5.0, observers=(lambda k, t, W, r: seen.append((k, t)),))
    assert res.steps == 50 and len(res.reports) == 50
    assert seen[0] == (1, pytest.approx(0.1)) and seen[-1] == (50, pytest.approx(5.0))
    assert res.fp_iterations_total == sum(r.fp_iterations for r in res.reports)
    assert res.fp_iterations_max == max(r.fp_iterations for r in res.reports)
    assert res.group_residual_max is None


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("scheme", "ABC")
def test_casimirs_conserved(name, scheme):
    m, W0 = MODELS[name]
    powers = [np.linalg.matrix_power(W0.matrix, k) for k in (2, 3, 4)]
    c0 = [np.trace(P) for P in powers]
    worst = 0.0

    def obs(k, t, W, rep):
        nonlocal worst
        P = W.matrix
        for k_, c in zip((2, 3, 4), c0):
            worst = max(worst, abs(np.trace(np.linalg.matrix_power(P, k_)) - c))

    integrate(m, m.structure, scheme, W0, StepConfig(tableau=gauss(2)), t_end=5.0, observers=(obs,))
    assert worst <= 1e-9


def test_scheme_B_casimir_drift_zeitlin():
    m, W0 = MODELS["zeitlin17"]
    c0 = np.trace(W0.matrix @ W0.matrix)
    drift = []
    integrate(
        m, m.structure, "B", W0, StepConfig(tableau=gauss(2)), t_end=5.0,
        observers=(lambda k, t, W, r: drift.append(abs(np.trace(W.matrix @ W.matrix) - c0)),),
    )  # fmt: skip
    assert max(drift) <= 1e-10


def test_step_errors_carry_the_step_index():
    m, W0 = MODELS["zeitlin17"]
    with pytest.raises(StepError) as info:
        integrate(m, m.structure, "A", W0, StepConfig(fp_max_iters=2), t_end=1.0)
    assert info.value.step == 1
    assert isinstance(info.value.cause, ConvergenceError)


def test_membership_violation_is_reported():
    m = RigidBodyModel()
    with pytest.raises(MembershipError):
        integrate(m, m.structure, "B", np.diag([1.0, 2.0, 3.0]), StepConfig(), t_end=0.1)


def test_warm_start_matches_cold_start():
    m, W0 = MODELS["zeitlin17"]
    for sc in "ABC":
        cold = integrate(m, m.structure, sc, W0, StepConfig(tableau=gauss(2)), t_end=1.0)
        warm = integrate(m, m.structure, sc, W0, StepConfig(tableau=gauss(2), warm_start=True), t_end=1.0)
        assert np.linalg.norm(cold.final.matrix - warm.final.matrix) <= 1e-11
        assert warm.fp_iterations_total <= cold.fp_iterations_total
