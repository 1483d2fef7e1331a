import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isoflow.tableaux import Tableau, explicit_euler, gauss, quadrature_order, symplecticity_defect

R3 = np.sqrt(3.0)
R15 = np.sqrt(15.0)

CLOSED_FORMS = {
    1: (np.array([[0.5]]), np.array([1.0]), np.array([0.5])),
    2: (
        np.array([[1 / 4, 1 / 4 - R3 / 6], [1 / 4 + R3 / 6, 1 / 4]]),
        np.array([0.5, 0.5]),
        np.array([0.5 - R3 / 6, 0.5 + R3 / 6]),
    ),
    3: (
        np.array(
            [
                [5 / 36, 2 / 9 - R15 / 15, 5 / 36 - R15 / 30],
                [5 / 36 + R15 / 24, 2 / 9, 5 / 36 - R15 / 24],
                [5 / 36 + R15 / 30, 2 / 9 + R15 / 15, 5 / 36],
            ]
        ),
        np.array([5 / 18, 4 / 9, 5 / 18]),
        np.array([0.5 - R15 / 10, 0.5, 0.5 + R15 / 10]),
    ),
}


@pytest.mark.parametrize("s", [1, 2, 3])
def test_gauss_matches_closed_form(s):
    a, b, c = CLOSED_FORMS[s]
    t = gauss(s)
    assert t.s == s and t.order == 2 * s
    np.testing.assert_allclose(t.a, a, atol=1e-15)
    np.testing.assert_allclose(t.b, b, atol=1e-15)
    np.testing.assert_allclose(t.c, c, atol=1e-15)


@pytest.mark.parametrize("s", range(1, 9))
def test_gauss_nodes_match_numpy_leggauss(s):
    x, w = np.polynomial.legendre.leggauss(s)
    t = gauss(s)
    np.testing.assert_allclose(t.c, 0.5 * (x + 1), atol=1e-14)
    np.testing.assert_allclose(t.b, 0.5 * w, atol=1e-14)


def test_gauss_order_four_conditions():
    t = gauss(2)
    a, b, c = t.a, t.b, t.c
    conditions = [
        (b.sum(), 1),
        (b @ c, 1 / 2),
        (b @ c**2, 1 / 3),
        (b @ a @ c, 1 / 6),
        (b @ c**3, 1 / 4),
        (b @ (c * (a @ c)), 1 / 8),
        (b @ a @ c**2, 1 / 12),
        (b @ a @ a @ c, 1 / 24),
    ]
    for got, want in conditions:
        assert got == pytest.approx(want, abs=1e-15)


def test_gauss3_simplifying_assumptions():
    # B(6), C(3) and D(3) together imply order 6.
    t = gauss(3)
    a, b, c = t.a, t.b, t.c
    for k in range(1, 7):
        assert b @ c ** (k - 1) == pytest.approx(1 / k, abs=1e-15)
    for k in range(1, 4):
        np.testing.assert_allclose(a @ c ** (k - 1), c**k / k, atol=1e-15)
        np.testing.assert_allclose((b * c ** (k - 1)) @ a, b * (1 - c**k) / k, atol=1e-15)


def test_symplecticity_defect_examples():
    assert symplecticity_defect(gauss(1)) == 0
    assert symplecticity_defect(gauss(2)) <= 1e-15
    assert symplecticity_defect(explicit_euler) == 1


@pytest.mark.parametrize("s,order", [(1, 2), (2, 4), (3, 6)])
def test_quadrature_order(s, order):
    assert quadrature_order(gauss(s)) == order


def test_quadrature_order_limits():
    assert quadrature_order(explicit_euler) == 1
    assert quadrature_order(gauss(6), max_order=8) == 8
    with pytest.raises(ValueError):
        quadrature_order(gauss(1), max_order=13)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        gauss(0)
    with pytest.raises(ValueError):
        gauss(1.5)
    with pytest.raises(ValueError, match="row-sum"):
        Tableau([[0.5]], [1.0], [0.4], order=2)
    with pytest.raises(ValueError, match="sum to one"):
        Tableau([[0.5]], [0.9], [0.5], order=2)
    with pytest.raises(ValueError, match="shapes"):
        Tableau([[0.5, 0.0]], [1.0], [0.5], order=2)


def test_tableau_is_immutable():
    t = gauss(2)
    with pytest.raises(ValueError):
        t.a[0, 0] = 1.0


@given(st.integers(1, 6))
def test_gauss_family_properties(s):
    t = gauss(s)
    assert symplecticity_defect(t) <= 1e-14
    assert quadrature_order(t) == 2 * s
    assert np.all(np.diff(t.c) > 0) and 0 < t.c[0] and t.c[-1] < 1
