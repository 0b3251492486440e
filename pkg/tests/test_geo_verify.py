import numpy as np
import pytest

from cmapquot.errors import StepUnderflow
from cmapquot.geo_verify import (
    FDPolicy,
    Verdict,
    complex_structure_from_curvature,
    curvature_symmetry_residuals,
    exterior_derivative,
    exterior_derivative_2form,
    holomorphic_sectional_curvature,
    kahler_closedness,
    lie_bracket,
    nijenhuis,
    partials,
    riemann,
    sectional_curvature,
    verdict,
    wedge,
)


def test_d_of_exact_form_vanishes(rng):
    f = lambda x: np.sin(x[0]) * x[1] + x[2] ** 3  # noqa: E731
    df = lambda x: partials(f, x).value  # noqa: E731
    x = rng.normal(size=3)
    assert np.abs(exterior_derivative(df, x).value).max() < 1e-6


def test_d_of_x1_dx2(rng):
    omega = lambda x: np.array([0.0, x[0], 0.0])  # noqa: E731
    x = rng.normal(size=3)
    d = exterior_derivative(omega, x).value
    # d(x1 dx2) = dx1 ^ dx2 in the antisymmetric-matrix convention
    assert np.allclose(d, wedge(np.eye(3)[0], np.eye(3)[1]), atol=1e-9)


def test_d_squared_on_two_forms(rng):
    alpha = lambda x: wedge(np.array([x[1], 0, 0]), np.array([0, 0, 1.0]))  # noqa: E731
    beta = lambda x: exterior_derivative(lambda y: np.array([y[1] * y[2], 0.0, y[0]]), x).value  # noqa: E731
    x = rng.normal(size=3)
    assert np.abs(exterior_derivative_2form(beta, x).value).max() < 1e-5
    assert np.isfinite(exterior_derivative_2form(alpha, x).value).all()


def test_lie_bracket_of_coordinate_rotations():
    X = lambda x: np.array([-x[1], x[0], 0.0])  # noqa: E731
    Y = lambda x: np.array([0.0, -x[2], x[1]])  # noqa: E731
    x = np.array([0.3, -0.2, 0.7])
    # [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i = (-x3, 0, x1)
    assert np.allclose(lie_bracket(X, Y, x).value, [-x[2], 0, x[0]], atol=1e-8)


def _sphere(x):
    th = x[0]
    return np.diag([1.0, np.sin(th) ** 2])


def test_round_sphere_has_unit_curvature():
    cs = riemann(_sphere, np.array([1.1, 0.3]))
    assert sectional_curvature(cs, [1, 0], [0, 1]) == pytest.approx(1.0, abs=1e-5)
    assert max(curvature_symmetry_residuals(cs).values()) < 1e-6


def test_complex_hyperbolic_line():
    # Poincare half plane with metric |dz|^2 / y^2: H = -1 for the standard J
    g = lambda x: np.eye(2) / x[1] ** 2  # noqa: E731
    cs = riemann(g, np.array([0.2, 0.9]))
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert holomorphic_sectional_curvature(cs, J, [1.0, 0.3]) == pytest.approx(-1.0, abs=1e-5)


def test_complex_structure_recovered_on_ch2():
    # ddbar of -log(1 - |z|^2) on the unit ball in C^2; holomorphic sectional curvature -4
    def g(x):
        z = x[:2] + 1j * x[2:]
        s = 1 - np.vdot(z, z).real
        h = np.eye(2) / s + np.outer(z, z.conj()) / s**2
        return np.block([[h.real, -h.imag], [h.imag, h.real]])

    x = np.array([0.1, -0.2, 0.15, 0.05])
    cs = riemann(g, x)
    J, dev = complex_structure_from_curvature(cs)
    assert dev < 1e-4
    Jstd = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
    assert min(np.abs(J - Jstd).max(), np.abs(J + Jstd).max()) < 1e-3
    rng = np.random.default_rng(3)
    Hs = [holomorphic_sectional_curvature(cs, J, rng.normal(size=4)) for _ in range(4)]
    assert np.allclose(Hs, -4.0, atol=1e-4)


def test_constant_structure_is_integrable():
    J = lambda x: np.array([[0.0, -1.0], [1.0, 0.0]])  # noqa: E731
    assert np.abs(nijenhuis(J, np.array([0.4, -0.1])).value).max() < 1e-12


def test_flat_kahler_form_is_closed():
    g = lambda x: np.eye(4)  # noqa: E731
    J = lambda x: np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])  # noqa: E731
    assert np.abs(kahler_closedness(g, J, np.zeros(4)).value).max() < 1e-12


def test_verdict_rules():
    assert verdict(1e-9, 1e-8) is Verdict.PASS
    assert verdict(1e-7, 1e-8) is Verdict.FAIL
    assert verdict(1e-7, 1e-8, fd_error=1e-6) is Verdict.INCONCLUSIVE
    assert verdict(0.5, 0.1, lower=True) is Verdict.PASS
    assert verdict(0.05, 0.1, lower=True) is Verdict.FAIL
    assert verdict(float("nan"), 1.0) is Verdict.FAIL


def test_step_underflow():
    with pytest.raises(StepUnderflow):
        FDPolicy(rel=1e-20, floor=0.0).steps(np.array([1e10]))
