"""Quaternionic Kaehler structure on ``M = M_sk x G`` built from a prepotential.

Real coordinates are always ordered ``(Re z, Im z, phi, phit, a, b)`` with
``z`` in ``C^{n-1}`` and ``a, b`` in ``R^n``; total real dimension ``4n``.
Covectors are complex rows of length ``4n`` over those differentials,
tangent vectors are real columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SignatureError, SingularFrame
from .prepotential import Prepotential
from .special_kahler import BaseGeometry, base_geometry

__all__ = [
    "ChartPoint",
    "Layout",
    "CoframeSample",
    "QuaternionicTriple",
    "coframe",
    "metric",
    "metric_from_vielbein",
    "quaternionic_vielbein",
    "complex_structures",
    "su2_connection",
    "fundamental_forms",
    "killing_fields",
    "killing_basis",
    "moment_map",
    "group_multiply",
    "group_inverse",
    "holo_coords",
    "fiber_metric_w",
]

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class Layout:
    """Index bookkeeping for the ordered real coordinates."""

    n: int

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def dim(self) -> int:
        return 4 * self.n

    @property
    def zr(self) -> slice:
        return slice(0, self.m)

    @property
    def zi(self) -> slice:
        return slice(self.m, 2 * self.m)

    @property
    def phi(self) -> int:
        return 2 * self.m

    @property
    def phit(self) -> int:
        return 2 * self.m + 1

    @property
    def a(self) -> slice:
        return slice(2 * self.m + 2, 2 * self.m + 2 + self.n)

    @property
    def b(self) -> slice:
        return slice(2 * self.m + 2 + self.n, 4 * self.n)

    @property
    def base(self) -> slice:
        return slice(0, 2 * self.m)

    @property
    def fiber(self) -> slice:
        return slice(2 * self.m, 4 * self.n)

    def dz(self) -> np.ndarray:
        """Rows ``dz^a`` (shape ``(m, 4n)``)."""
        out = np.zeros((self.m, self.dim), dtype=complex)
        idx = np.arange(self.m)
        out[idx, idx] = 1.0
        out[idx, self.m + idx] = 1j
        return out

    def names(self) -> list[str]:
        m, n = self.m, self.n
        return (
            [f"Re z{i + 1}" for i in range(m)]
            + [f"Im z{i + 1}" for i in range(m)]
            + ["phi", "phit"]
            + [f"a{A}" for A in range(n)]
            + [f"b{A}" for A in range(n)]
        )


@dataclass(frozen=True)
class ChartPoint:
    z: np.ndarray
    phi: float
    phit: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=complex)))
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        if self.a.shape != self.b.shape or self.a.shape[0] != self.z.shape[0] + 1:
            raise ValueError("inconsistent ChartPoint dimensions")

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def layout(self) -> Layout:
        return Layout(self.n)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.z.real, self.z.imag, [self.phi, self.phit], self.a, self.b])

    @classmethod
    def from_vector(cls, x, n: int) -> "ChartPoint":
        x = np.asarray(x, dtype=float)
        L = Layout(n)
        if x.shape != (L.dim,):
            raise ValueError(f"expected a real {L.dim}-vector")
        return cls(x[L.zr] + 1j * x[L.zi], float(x[L.phi]), float(x[L.phit]), x[L.a], x[L.b])

    @classmethod
    def at(cls, z, phi=0.0, phit=0.0, a=None, b=None) -> "ChartPoint":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        n = z.shape[0] + 1
        return cls(z, phi, phit, np.zeros(n) if a is None else a, np.zeros(n) if b is None else b)

    def fiber(self) -> tuple:
        return (self.phi, self.phit, self.a.copy(), self.b.copy())

    def with_fiber(self, fib) -> "ChartPoint":
        phi, phit, a, b = fib
        return ChartPoint(self.z, phi, phit, a, b)


@dataclass(frozen=True)
class CoframeSample:
    """The complex one-forms ``u, v, e^b, E^b`` at a point."""

    u: np.ndarray
    v: np.ndarray
    e: np.ndarray
    E: np.ndarray
    base: BaseGeometry

    def rows(self) -> np.ndarray:
        return np.vstack([self.u, self.v, self.e, self.E])


@dataclass(frozen=True)
class QuaternionicTriple:
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray

    def __iter__(self):
        return iter((self.J1, self.J2, self.J3))

    def __getitem__(self, i):
        return (self.J1, self.J2, self.J3)[i]


def coframe(spec: Prepotential, p: ChartPoint) -> CoframeSample:
    """Evaluate ``u, v, e^b, E^b`` with ``Z = (1, z)``."""
    bg = base_geometry(spec, p.z)
    L = p.layout
    n, m = L.n, L.m
    Z, FAB, K, phi = bg.Z, bg.jet.F_AB, bg.K, p.phi

    u = np.zeros(L.dim, dtype=complex)
    cu = 1j * np.exp(K / 2 + phi)
    u[L.b] = cu * Z
    u[L.a] = -cu * (Z @ FAB)

    v = np.zeros(L.dim, dtype=complex)
    cv = -0.5j * np.exp(2 * phi)
    v[L.phi] = -1.0
    v[L.phit] = cv
    v[L.a] = cv * p.b
    v[L.b] = -cv * p.a

    e = bg.e @ L.dz()

    cE = -0.5j * np.exp(phi - K / 2)
    Mx = bg.Pi.T @ bg.Ninv
    E = np.zeros((m, L.dim), dtype=complex)
    E[:, L.b] = cE * Mx
    E[:, L.a] = -cE * (Mx @ FAB.conj())
    return CoframeSample(u, v, e, E, bg)


def _sym_real(rows: np.ndarray) -> np.ndarray:
    rows = np.atleast_2d(rows)
    return np.real(rows.T @ rows.conj())


def metric(spec: Prepotential, p: ChartPoint, check: bool = True, cf: CoframeSample | None = None) -> np.ndarray:
    """``g = u ubar + v vbar + sum(e^b ebar^b + E^b Ebar^b)`` as a real matrix."""
    cf = coframe(spec, p) if cf is None else cf
    g = _sym_real(cf.rows())
    g = 0.5 * (g + g.T)
    if check:
        w = np.linalg.eigvalsh(g)
        if w[0] <= 0:
            raise SignatureError(f"metric has a non-positive eigenvalue {w[0]:.3e}")
    return g


def quaternionic_vielbein(cf: CoframeSample) -> np.ndarray:
    """Rows ``U^{Am}`` with shape ``(2, 2n, 4n)``.

    The slot usually labelled ``v`` is filled with ``vhat = -conj(v)``.  The
    metric is unchanged, and this is the only phase assignment (given ``u``,
    ``e``, ``E``) for which the span of the resulting ``J_alpha`` is parallel.
    The ``(1,0)``-forms of ``J_3`` are then ``u, v, e^b, conj(E^b)``.
    """
    s = 1.0 / np.sqrt(2.0)
    vh = -cf.v.conj()
    U1 = np.vstack([cf.u.conj(), cf.e.conj(), -vh, -cf.E]) * s
    U2 = np.vstack([vh.conj(), cf.E.conj(), cf.u, cf.e]) * s
    return np.stack([U1, U2])


def metric_from_vielbein(U: np.ndarray) -> np.ndarray:
    """``g = eps_AB eps_lm U^{Al} (x) U^{Bm}``, symmetrised."""
    k = U.shape[1] // 2
    eps2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    epsm = np.block([[np.zeros((k, k)), np.eye(k)], [-np.eye(k), np.zeros((k, k))]])
    g = np.einsum("AB,lm,Ali,Bmj->ij", eps2, epsm, U, U)
    g = 0.5 * (g + g.T)
    if np.max(np.abs(g.imag)) > 1e-9 * max(1.0, np.max(np.abs(g))):
        raise ValueError("vielbein metric is not real")
    return g.real


def complex_structures(spec: Prepotential, p: ChartPoint, cf: CoframeSample | None = None) -> QuaternionicTriple:
    """Solve ``U o J_alpha = -i sigma_alpha U`` for the three real endomorphisms."""
    cf = coframe(spec, p) if cf is None else cf
    U = quaternionic_vielbein(cf)
    k = U.shape[1]
    W = U.reshape(2 * k, -1)
    s = np.linalg.svd(W, compute_uv=False)
    if s[-1] < 1e-12 * s[0]:
        raise SingularFrame(f"stacked vielbein is rank deficient (cond {s[0] / max(s[-1], 1e-300):.2e})")
    out = []
    for sig in SIGMA:
        S = np.kron(-1j * sig, np.eye(k))
        J = np.linalg.solve(W, S @ W)
        if np.max(np.abs(J.imag)) > 1e-8 * max(1.0, np.max(np.abs(J))):
            raise SingularFrame("reconstructed complex structure is not real")
        out.append(J.real)
    return QuaternionicTriple(*out)


def su2_connection(spec: Prepotential, p: ChartPoint, cf: CoframeSample | None = None) -> np.ndarray:
    """Real rows ``(omega_1, omega_2, omega_3)``, shape ``(3, 4n)``."""
    cf = coframe(spec, p) if cf is None else cf
    bg = cf.base
    L = p.layout
    w1 = np.real(1j * (cf.u.conj() - cf.u))
    # sign fixed by nabla J_1 = omega_3 J_2 - omega_2 J_3 for the triple built above
    w2 = -np.real(cf.u + cf.u.conj())
    ZbN = (bg.Z.conj() @ bg.N)[1:]
    dZ = ZbN @ L.dz()  # Zbar^A N_AB dZ^B
    # omega_3 = (i/2)(v - vbar) - i e^K (Z N dZbar - Zbar N dZ)
    w3 = np.real(0.5j * (cf.v - cf.v.conj()) - 1j * np.exp(bg.K) * (dZ.conj() - dZ))
    return np.vstack([w1, w2, w3])


def fundamental_forms(g: np.ndarray, J: QuaternionicTriple) -> np.ndarray:
    """``phi_alpha = g(., J_alpha .)`` as antisymmetric matrices, shape ``(3, d, d)``."""
    return np.stack([g @ Ja for Ja in J])


def killing_fields(p: ChartPoint) -> dict[str, np.ndarray]:
    """Coordinate components of the ``2n+2`` right-invariant fields at ``p``."""
    L = p.layout
    out = {}
    k = np.zeros(L.dim)
    k[L.phi] = 0.5
    k[L.phit] = -p.phit
    k[L.a] = -0.5 * p.a
    k[L.b] = -0.5 * p.b
    out["k_phi"] = k
    k = np.zeros(L.dim)
    k[L.phit] = -2.0
    out["k_phit"] = k
    for A in range(L.n):
        k = np.zeros(L.dim)
        k[L.a.start + A] = 1.0
        k[L.phit] = p.b[A]
        out[f"k_{A}"] = k
    for A in range(L.n):
        k = np.zeros(L.dim)
        k[L.b.start + A] = 1.0
        k[L.phit] = -p.a[A]
        out[f"kt_{A}"] = k
    return out


def killing_basis(n: int) -> list[str]:
    return ["k_phi", "k_phit"] + [f"k_{A}" for A in range(n)] + [f"kt_{A}" for A in range(n)]


def killing_combination(p: ChartPoint, coeffs: dict[str, float]) -> np.ndarray:
    kf = killing_fields(p)
    return sum(c * kf[name] for name, c in coeffs.items())


def moment_map(spec: Prepotential, p: ChartPoint, kappa, cf: CoframeSample | None = None) -> np.ndarray:
    """``c_alpha = omega_alpha(kappa) / 2`` so that ``P = sum c_alpha J_alpha``.

    ``kappa`` is either a coordinate vector or a mapping of Killing-field names
    to real coefficients.
    """
    if isinstance(kappa, dict):
        kappa = killing_combination(p, kappa)
    om = su2_connection(spec, p, cf)
    return 0.5 * om @ np.asarray(kappa, dtype=float)


# --- group law on the fiber ----------------------------------------------


def group_multiply(x, y):
    """Product in the Iwasawa group, ``(phi, phit, a, b)`` tuples."""
    phi, phit, a, b = x
    phi2, phit2, a2, b2 = y
    a, b, a2, b2 = (np.asarray(t, dtype=float) for t in (a, b, a2, b2))
    return (
        phi + phi2,
        phit + np.exp(-2 * phi) * phit2 + np.exp(-phi) * (a @ b2 - a2 @ b),
        a + np.exp(-phi) * a2,
        b + np.exp(-phi) * b2,
    )


def group_inverse(x):
    phi, phit, a, b = x
    return (-phi, -np.exp(2 * phi) * phit, -np.exp(phi) * np.asarray(a), -np.exp(phi) * np.asarray(b))


def group_identity(n: int):
    return (0.0, 0.0, np.zeros(n), np.zeros(n))


# --- holomorphic fiber coordinates ---------------------------------------


def holo_coords(spec: Prepotential, p: ChartPoint) -> tuple[complex, np.ndarray]:
    """``J_3``-holomorphic fiber coordinates.

    ``w_A = b_A - F_AB a^B`` and ``w^0 = exp(-2 phi) - i (phit + a^A w_A)``, so
    that ``Re w^0 + Im w N^{-1} Im w = exp(-2 phi) > 0``.
    """
    jet = spec.jet(np.concatenate([[1.0 + 0j], p.z]))
    w = p.b - jet.F_AB @ p.a
    w0 = np.exp(-2 * p.phi) - 1j * (p.phit + p.a @ w)
    return complex(w0), w


def fiber_metric_w(bg: BaseGeometry, phi: float, w: np.ndarray) -> np.ndarray:
    """Hermitian matrix ``H`` of the fiber metric in the coordinates ``(w^0, w_A)``.

    Convention: ``|X|^2 = xi^H H xi`` where ``xi = (dw^0, dw_A)(X)``.
    """
    n = bg.Z.shape[0]
    Ninv = bg.Ninv
    theta = np.zeros(n + 1, dtype=complex)
    theta[0] = 1.0
    theta[1:] = -2j * (w.imag @ Ninv)
    zeta = np.zeros(n + 1, dtype=complex)
    zeta[1:] = bg.Z
    H = 0.25 * np.exp(4 * phi) * np.outer(theta.conj(), theta)
    H[1:, 1:] += -0.5 * np.exp(2 * phi) * Ninv
    H += 2 * np.exp(bg.K + 2 * phi) * np.outer(zeta.conj(), zeta)
    return H
