import numpy as np
import pytest

from cmapquot.errors import DomainError
from cmapquot.special_kahler import base_geometry, in_domain, kahler_potential, lift, pi_identity_residuals

from helpers import quad, random_base, stu


def test_quadratic_origin_potential_and_metric():
    assert kahler_potential(quad(3), [0, 0]) == pytest.approx(-np.log(2))
    # frozen from second central differences of K at z = 0 (independent oracle)
    assert np.allclose(base_geometry(quad(3), [0, 0]).g, np.eye(2), atol=1e-7)


def test_stu_potential_oracle():
    # 2 Z N Zbar at (1, i, i, i) from the FD oracle of F equals 8
    assert kahler_potential(stu(), [1j, 1j, 1j]) == pytest.approx(-np.log(8.0), abs=1e-10)


def test_vielbein_factorises_metric(rng):
    bg = base_geometry(stu(), random_base(stu(), rng))
    assert np.abs(bg.e.conj().T @ bg.e - bg.g).max() < 1e-12


def test_pi_identities_stu(rng):
    worst = 0.0
    for _ in range(50):
        worst = max(worst, *pi_identity_residuals(base_geometry(stu(), random_base(stu(), rng))))
    assert worst < 1e-10


@pytest.mark.parametrize("spec", [quad(3), stu()], ids=["quad", "stu"])
def test_metric_is_ddbar_of_potential(spec, rng):
    z0 = random_base(spec, rng)
    m = z0.size
    h = 1e-4
    g = np.zeros((m, m), dtype=complex)
    for a in range(m):
        for b in range(m):

            def d2(u, v):
                e = np.zeros(m, complex)
                f = np.zeros(m, complex)
                e[a], f[b] = u, v
                K = lambda dz: kahler_potential(spec, z0 + dz)  # noqa: E731
                return (K(h * e + h * f) - K(h * e - h * f) - K(-h * e + h * f) + K(-h * e - h * f)) / (4 * h * h)

            g[a, b] = 0.25 * (d2(1, 1) + d2(1j, 1j) + 1j * (d2(1, 1j) - d2(1j, 1)))
    # g is stored with the antiholomorphic index first
    exact = base_geometry(spec, z0).g.T
    assert np.abs(g - exact).max() <= 1e-6 * max(1.0, np.abs(exact).max())


def test_rescaling_lift(rng):
    spec = stu()
    z = random_base(spec, rng)
    Z = lift(z)
    N = spec.jet(Z).F_AB.imag
    K1 = -np.log(2 * np.real(Z @ N @ Z.conj()))
    Z2 = 2 * Z
    N2 = spec.jet(Z2).F_AB.imag
    K2 = -np.log(2 * np.real(Z2 @ N2 @ Z2.conj()))
    assert K2 - K1 == pytest.approx(-np.log(4.0), abs=1e-12)


def test_out_of_domain():
    assert not in_domain(stu(), [1j, -1j, 1j + 0.1])
    with pytest.raises(DomainError):
        kahler_potential(stu(), [1j, 1j, -1j])
