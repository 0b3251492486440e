import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmapquot.errors import DomainError
from cmapquot.prepotential import (
    CubicPrepotential,
    HomogeneousPrepotential,
    Monomial,
    MonomialPrepotential,
    QuadraticPrepotential,
    check_clifford,
    clifford_gammas,
    eval_jet,
    n_matrix,
)

from helpers import quad, stu, sym3

cplx = st.complex_numbers(min_magnitude=0.1, max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_quadratic_at_origin():
    j = eval_jet(quad(3), np.array([1, 0, 0], dtype=complex))
    assert j.F == pytest.approx(0.5j)
    assert np.allclose(j.F_AB, 1j * np.diag([1, -1, -1]))
    assert np.allclose(n_matrix(j), np.diag([1, -1, -1]))


def test_stu_value_and_f0():
    S, T, U = 0.3 + 1j, -0.2 + 0.7j, 0.5 + 1.3j
    j = stu().jet(np.array([1, S, T, U]))
    assert j.F == pytest.approx(S * T * U)
    assert j.F_A[0] == pytest.approx(-S * T * U)


def test_stu_n_matches_fd_oracle():
    # frozen from central differences of F = Z1 Z2 Z3 / Z0 at (1, i, i, i), step 1e-6
    oracle = np.array([[-2, 0, 0, 0], [0, 0, 1, 1], [0, 1, 0, 1], [0, 1, 1, 0]], dtype=float)
    N = n_matrix(stu().jet(np.array([1, 1j, 1j, 1j])))
    assert np.allclose(N, oracle, atol=1e-4)
    assert np.array_equal(N, N.T)


@given(st.lists(cplx, min_size=4, max_size=4))
def test_cubic_homogeneity(zs):
    Z = np.array(zs)
    r = stu().jet(Z).homogeneity_residuals()
    assert max(r) < 1e-12


@given(st.lists(cplx, min_size=7, max_size=7))
def test_homogeneous_family_homogeneity(zs):
    spec = HomogeneousPrepotential(1, 2)
    assert max(spec.jet(np.array(zs)).homogeneity_residuals()) < 1e-12


def _fd_derivs(spec, Z, h=1e-5):
    n = Z.size
    E = np.eye(n)
    FA = np.array([(spec.jet(Z + h * E[i]).F - spec.jet(Z - h * E[i]).F) / (2 * h) for i in range(n)])
    FAB = np.array([(spec.jet(Z + h * E[i]).F_A - spec.jet(Z - h * E[i]).F_A) / (2 * h) for i in range(n)])
    FABC = np.array([(spec.jet(Z + h * E[i]).F_AB - spec.jet(Z - h * E[i]).F_AB) / (2 * h) for i in range(n)])
    return FA, FAB, FABC


@pytest.mark.parametrize("spec", [quad(4), stu(), HomogeneousPrepotential(0, 2)], ids=["quad", "stu", "hom"])
def test_jet_matches_finite_differences(spec, rng):
    Z = np.concatenate([[1.0], rng.normal(size=spec.n - 1) + 1j * rng.uniform(0.5, 1.5, spec.n - 1)])
    j = spec.jet(Z)
    FA, FAB, FABC = _fd_derivs(spec, Z)
    for exact, approx in ((j.F_A, FA), (j.F_AB, FAB), (j.F_ABC, FABC)):
        assert np.max(np.abs(exact - approx)) <= 1e-6 * max(1.0, np.max(np.abs(exact)))


def test_quantum_stu_is_additive(rng):
    base = sym3(3, [((0, 1, 2), 1.0)])
    q = CubicPrepotential(base, extra=(Monomial(1 / 3, (0, 3, 0), -1),))
    t3 = MonomialPrepotential([Monomial(1 / 3, (0, 3, 0), -1)])
    Z = np.array([1.0, 0.2 + 1j, 0.4 + 0.5j, -0.3 + 0.8j])
    a, b, c = q.jet(Z), CubicPrepotential(base).jet(Z), t3.jet(Z)
    assert np.allclose(a.F_ABC, b.F_ABC + c.F_ABC, atol=1e-13)
    assert np.allclose(a.F_AB, b.F_AB + c.F_AB, atol=1e-13)


def test_cubic_pole_raises():
    with pytest.raises(DomainError):
        stu().jet(np.array([0, 1, 1, 1], dtype=complex))


def test_quadratic_signature_checked():
    with pytest.raises(ValueError):
        QuadraticPrepotential(1j * np.eye(3))


def test_monomial_degree_checked():
    with pytest.raises(ValueError):
        MonomialPrepotential([Monomial(1.0, (1, 1, 1), 0)])


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_clifford_relations(k):
    assert check_clifford(clifford_gammas(k)) < 1e-14


def test_homogeneous_r_must_fit_representation():
    with pytest.raises(ValueError):
        HomogeneousPrepotential(3, 4)
