import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmapquot.cmap import (
    ChartPoint,
    Layout,
    coframe,
    complex_structures,
    group_inverse,
    group_multiply,
    holo_coords,
    killing_basis,
    killing_fields,
    metric,
    metric_from_vielbein,
    moment_map,
    quaternionic_vielbein,
)
from cmapquot.geo_verify import lie_derivative_metric
from cmapquot.special_kahler import base_geometry

from helpers import quad, random_point, stu

SPECS = {"quad": quad(3), "stu": stu()}
seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("name", SPECS)
@given(seed=seeds)
def test_quaternion_algebra(name, seed):
    spec = SPECS[name]
    p = random_point(spec, np.random.default_rng(seed))
    g = metric(spec, p)
    J1, J2, J3 = complex_structures(spec, p)
    I = np.eye(g.shape[0])
    tol = 1e-9 * max(1.0, np.abs(J1).max(), np.abs(J2).max())
    for J in (J1, J2, J3):
        assert np.abs(J @ J + I).max() < tol
        assert np.abs(g @ J + (g @ J).T).max() < tol * np.abs(g).max()
    assert np.abs(J1 @ J2 - J3).max() < tol
    assert np.abs(J2 @ J3 - J1).max() < tol


@pytest.mark.parametrize("name", SPECS)
def test_vielbein_reproduces_metric(name, rng):
    spec = SPECS[name]
    p = random_point(spec, rng)
    g = metric(spec, p)
    assert np.abs(metric_from_vielbein(quaternionic_vielbein(coframe(spec, p))) - g).max() < 1e-10 * np.abs(g).max()


def test_metric_blocks_at_fiber_origin(rng):
    spec = stu()
    p = ChartPoint.at([0.2 + 1.1j, -0.3 + 0.8j, 0.1 + 1.4j], phi=0.3)
    L = p.layout
    g = metric(spec, p)
    assert g[L.phi, L.phi] == pytest.approx(1.0)
    h = base_geometry(spec, p.z).g
    # real form of the hermitian base metric in (Re z, Im z)
    real = np.block([[h.real, h.imag], [-h.imag, h.real]])
    assert np.abs(g[L.base, L.base] - real).max() < 1e-12


@pytest.mark.parametrize("name", SPECS)
def test_j3_holomorphic_forms(name, rng):
    spec = SPECS[name]
    p = random_point(spec, rng)
    cf = coframe(spec, p)
    J3 = complex_structures(spec, p, cf)[2]
    forms = np.vstack([cf.u, cf.v, cf.e, cf.E.conj()])
    assert np.abs(forms @ J3 - 1j * forms).max() < 1e-9 * np.abs(forms).max()


@pytest.mark.parametrize("name", SPECS)
def test_killing_fields_preserve_metric(name, rng):
    spec = SPECS[name]
    p = random_point(spec, rng)
    n = p.n
    g = lambda x: metric(spec, ChartPoint.from_vector(x, n), check=False)  # noqa: E731
    for k in killing_basis(n):
        X = lambda x, k=k: killing_fields(ChartPoint.from_vector(x, n))[k]  # noqa: E731
        L = lie_derivative_metric(g, X, p.to_vector())
        assert np.abs(L.value).max() < 1e-6, k


fib = st.tuples(
    st.floats(-1, 1),
    st.floats(-2, 2),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
)


def _close(x, y, tol=1e-9):
    return all(np.allclose(a, b, atol=tol, rtol=tol) for a, b in zip(x, y))


@given(fib, fib, fib)
def test_group_associative(x, y, w):
    assert _close(group_multiply(group_multiply(x, y), w), group_multiply(x, group_multiply(y, w)), 1e-7)


@given(fib)
def test_group_inverse(x):
    e = (0.0, 0.0, np.zeros(3), np.zeros(3))
    assert _close(group_multiply(x, group_inverse(x)), e, 1e-8)
    assert _close(group_multiply(group_inverse(x), x), e, 1e-8)


def test_holo_coords_at_fiber_origin():
    p = ChartPoint.at([0.1 + 0.2j, -0.2 + 0.1j], phi=0.4, phit=0.7)
    w0, w = holo_coords(quad(3), p)
    assert w0 == pytest.approx(np.exp(-0.8) - 0.7j)
    assert np.allclose(w, 0)


@pytest.mark.parametrize("name", SPECS)
def test_holo_domain_identity(name, rng):
    spec = SPECS[name]
    p = random_point(spec, rng)
    w0, w = holo_coords(spec, p)
    bg = base_geometry(spec, p.z)
    assert w0.real + w.imag @ bg.Ninv @ w.imag == pytest.approx(np.exp(-2 * p.phi), rel=1e-10)


@pytest.mark.parametrize("phi", [-0.4, 0.0, 0.5])
def test_moment_of_phit_shift(phi, rng):
    spec = stu()
    p = random_point(spec, rng).with_fiber((phi, 0.3, rng.normal(size=4), rng.normal(size=4)))
    c = moment_map(spec, p, {"k_phit": 1.0})
    # derived from the su(2) connection rows: only the third component survives
    assert np.allclose(c, [0, 0, -0.5 * np.exp(2 * phi)], atol=1e-13)


def test_layout_and_vector_roundtrip(rng):
    p = random_point(stu(), rng)
    assert Layout(4).dim == 16
    q = ChartPoint.from_vector(p.to_vector(), 4)
    assert np.allclose(q.to_vector(), p.to_vector())
    with pytest.raises(ValueError):
        ChartPoint([1j], 0, 0, [0, 0, 0], [0, 0])
