import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmapquot.cmap import ChartPoint, holo_coords
from cmapquot.errors import NullConditionError, SignatureError
from cmapquot.quotient import (
    act,
    act_w,
    base_tangent_check,
    canonical_lambda,
    canonical_representative,
    fiber_chart,
    fiber_quotient_metric,
    hermitian_to_real,
    kernel_pairing,
    make_quotient_spec,
    membership,
    n_tilde,
    null_vector_sample,
    point_on_N,
    pullback_quotient_metric,
)
from cmapquot.special_kahler import lift

from helpers import quad, random_base, stu, sym3


def _setup(spec, rng, seed=4):
    z = random_base(spec, rng)
    Z = lift(z)
    D = null_vector_sample(spec, Z, seed=seed, phase=True)
    q = make_quotient_spec(spec, Z, D, 0.3 - 0.2j, rank_samples=0)
    n = spec.n
    p = point_on_N(spec, q, z, 0.2, 0.4, rng.normal(size=n), rng.normal(size=n))
    return z, q, p


def test_canonical_null_vector_quadratic():
    D = null_vector_sample(quad(3), [1, 0, 0])
    assert np.allclose(D, [1, 1, 0])


def test_null_vectors_on_stu():
    spec = stu()
    rng = np.random.default_rng(0)
    for seed in range(50):
        Z = lift(random_base(spec, rng))
        D = null_vector_sample(spec, Z, seed=seed, phase=True)
        N = spec.jet(Z).F_AB.imag
        assert abs(D.conj() @ N @ D) < 1e-12 * np.linalg.norm(D) ** 2 * np.linalg.norm(N, 2)


def test_signature_and_null_errors():
    bad = quad(3)
    with pytest.raises(SignatureError):
        # flipping Q gives signature (2, 1)
        null_vector_sample(type(bad)(-bad.Q), [1, 0, 0])
    with pytest.raises(NullConditionError):
        make_quotient_spec(quad(3), [1, 0, 0], [1, 0, 0], rank_samples=0)


def test_rank_bounds(rng):
    for spec in (quad(4), stu()):
        z, q, _ = _setup(spec, rng)
        G = np.einsum("abc,c->ab", spec.jet(lift(z)).F_ABC, q.D)
        assert np.allclose(G @ lift(z), 0, atol=1e-12)
        assert 0 <= q.r <= spec.n - 1
        assert q.dim_Mprime_real == 4 * (spec.n - 1) - 2 * q.r


@pytest.mark.parametrize("spec", [quad(3), stu()], ids=["quad", "stu"])
@given(l1=st.complex_numbers(max_magnitude=3, allow_nan=False), l2=st.complex_numbers(max_magnitude=3, allow_nan=False))
def test_action_composes(spec, l1, l2):
    rng = np.random.default_rng(7)
    _, q, p = _setup(spec, rng)
    a = act(q, l1 + l2, p).to_vector()
    b = act(q, l2, act(q, l1, p)).to_vector()
    assert np.allclose(a, b, atol=1e-9)
    assert np.allclose(act(q, 0, p).to_vector(), p.to_vector())


@pytest.mark.parametrize("spec", [quad(3), stu()], ids=["quad", "stu"])
def test_action_in_holomorphic_coordinates(spec, rng):
    z, q, p = _setup(spec, rng)
    lam = 0.7 - 0.4j
    w0, w = holo_coords(spec, act(q, lam, p))
    v0, v = act_w(spec, q, lam, z, *holo_coords(spec, p))
    assert abs(w0 - v0) < 1e-10 and np.abs(w - v).max() < 1e-10


@pytest.mark.parametrize("spec", [quad(3), stu()], ids=["quad", "stu"])
def test_action_preserves_N(spec, rng):
    _, q, p = _setup(spec, rng)
    assert max(membership(spec, q, p)) < 1e-12
    assert max(membership(spec, q, act(q, 1.3 + 2.1j, p))) < 1e-11


@pytest.mark.parametrize("spec", [quad(3), stu()], ids=["quad", "stu"])
def test_canonical_representative(spec, rng):
    z, q, p = _setup(spec, rng)
    lam, rep, chart, x = canonical_representative(spec, q, p)
    _, w = holo_coords(spec, rep)
    assert abs(lift(z) @ w) < 1e-12
    assert abs(canonical_lambda(spec, q, rep)) < 1e-12
    lam2, _, _, x2 = canonical_representative(spec, q, act(q, -0.8 + 0.5j, p))
    assert np.allclose(x, x2, atol=1e-10)


@pytest.mark.parametrize("spec", [quad(3), stu()], ids=["quad", "stu"])
def test_reduced_metric(spec, rng):
    z, q, p = _setup(spec, rng)
    _, _, chart, x = canonical_representative(spec, q, p)
    Nt = n_tilde(spec, chart, x)[0]
    assert np.linalg.eigvalsh(Nt).max() < 0
    H = fiber_quotient_metric(spec, q, z, x, chart)
    P = pullback_quotient_metric(spec, q, z, x, chart)
    assert np.abs(hermitian_to_real(H) - P).max() < 1e-9 * np.abs(P).max()
    assert kernel_pairing(spec, q, z, x, chart) < 1e-9
    assert np.linalg.eigvalsh(P).min() > 0


def test_chart_solves_constraints(rng):
    spec = stu()
    z, q, _ = _setup(spec, rng)
    chart = fiber_chart(q, z)
    x = rng.normal(size=spec.n - 1) + 1j * rng.normal(size=spec.n - 1)
    _, w = chart.to_w(x)
    assert abs(chart.Z @ w) < 1e-12
    assert abs(q.D @ w - q.Ct) < 1e-12


def test_base_tangent_check_stu():
    d = sym3(3, [((0, 1, 2), 1.0)])
    z0 = np.array([1j, 1j, 1j])
    # D = (1, i, i, 0) up to the null condition; alpha along U is tangent
    D = np.array([1.0, 1j, 1j, 0.0])
    lin, cub = base_tangent_check(d, D, z0, [0, 0, 1])
    assert lin < 1e-14 and cub == 0
    lin, _ = base_tangent_check(d, D, z0, [1, 0, 0])
    assert lin > 0.1


def test_chart_point_requires_fiber_shape():
    with pytest.raises(ValueError):
        ChartPoint.at([1j, 1j, 1j], a=np.zeros(2))


def test_holomorphic_derivative_near_branch_point():
    from cmapquot.quotient import _holo_derivative

    f = lambda t: np.array([np.sqrt(t[0]), t[0] * t[1] ** 2])  # noqa: E731
    for t0 in (np.array([1.0 + 0.5j, 0.3j]), np.array([3e-3 + 1e-3j, 2.0])):
        d = _holo_derivative(f, t0)
        exact = np.array([[0.5 / np.sqrt(t0[0]), 0], [t0[1] ** 2, 2 * t0[0] * t0[1]]])
        assert np.abs(d - exact).max() < 1e-9 * np.abs(exact).max()
