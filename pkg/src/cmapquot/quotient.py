"""Submanifold ``N``, the abelian action generated by ``xi_1, xi_2`` and the
Kaehler quotient ``M' = N / A``.

The action of ``lambda in C`` is a translation of the Heisenberg part of the
fiber group.  In holomorphic fiber coordinates it reads

    zeta_A = w_A + (lambda/2) Delta_A,          Delta = conj(C) - F conj(D)
    zeta^0 = w^0 - i lambda conj(D).w + i lambda conj(Ct) - i (lambda^2/4) conj(D).Delta

with ``Delta = -2i N conj(D)`` on ``N``.  The hypersurface ``Z.w = 0`` meets
every orbit exactly once; it is parameterised affinely by ``x = (x^0, x_a)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmap import ChartPoint, holo_coords, killing_fields, metric
from .errors import (
    DegenerateQuotient,
    DomainError,
    NullConditionError,
    PivotError,
    RankInstabilityWarning,
    SignatureError,
)
from .prepotential import Prepotential
from .special_kahler import base_geometry, lift

__all__ = [
    "QuotientSpec",
    "FiberQuotientChart",
    "null_vector_sample",
    "make_quotient_spec",
    "numerical_rank",
    "membership",
    "xi_fields",
    "point_on_N",
    "act",
    "act_w",
    "canonical_lambda",
    "canonical_representative",
    "fiber_chart",
    "fiber_from_w",
    "fiber_tangent_from_w",
    "fiber_quotient_metric",
    "n_tilde",
    "pullback_quotient_metric",
    "hermitian_to_real",
    "kernel_pairing",
    "base_tangent_check",
    "QuotientChart",
    "solve_null_component",
]

RANK_RTOL = 1e-8


def _N(spec: Prepotential, Z) -> tuple[np.ndarray, np.ndarray]:
    jet = spec.jet(np.asarray(Z, dtype=complex))
    return jet.F_AB, jet.F_AB.imag


# --- null vectors and quotient data ----------------------------------------


def null_vector_sample(spec: Prepotential, Z0, seed: int | None = None, phase: bool = False) -> np.ndarray:
    """A nonzero ``D`` with ``conj(D) N(Z0) D = 0``.

    ``N`` is congruence-diagonalised as ``S^T diag(+1, -1, ..., -1) S``.  With
    ``seed=None`` the unit vector in the negative block is the first basis
    vector, so the result is canonical; otherwise it is drawn at random and,
    if ``phase`` is set, ``D`` is multiplied by a random unit complex number.
    """
    _, N = _N(spec, Z0)
    lam, V = np.linalg.eigh(N)
    order = np.argsort(-lam)
    lam, V = lam[order], V[:, order]
    n = lam.shape[0]
    if not (lam[0] > 0 and np.all(lam[1:] < 0)):
        raise SignatureError(f"N(Z0) has eigenvalues {lam}, expected signature (1, {n - 1})")
    for j in range(n):
        k = np.argmax(np.abs(V[:, j]))
        V[:, j] *= np.sign(V[k, j])
    Sinv = V / np.sqrt(np.abs(lam))
    e = np.zeros(n)
    e[0] = 1.0
    rng = None if seed is None else np.random.default_rng(seed)
    if rng is None:
        e[1] = 1.0
    else:
        t = rng.normal(size=n - 1)
        e[1:] = t / np.linalg.norm(t)
    D = (Sinv @ e).astype(complex)
    if rng is not None and phase:
        D = D * np.exp(2j * np.pi * rng.random())
    return D


def numerical_rank(G: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, np.ndarray, bool]:
    """SVD rank with a relative threshold; also flags singular values near it."""
    s = np.linalg.svd(G, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0, s, False
    thr = rtol * s[0]
    r = int(np.sum(s > thr))
    unstable = bool(np.any((s > thr * 1e-2) & (s < thr * 1e2)))
    return r, s, unstable


@dataclass(frozen=True)
class QuotientSpec:
    """Data ``(Z0, D, C, Ct, r)`` defining ``N`` and the action of ``C``."""

    Z0: np.ndarray
    D: np.ndarray
    C: np.ndarray
    Ct: complex
    r: int
    singular_values: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.D.shape[0]

    @property
    def dim_M(self) -> int:
        return 4 * self.n

    @property
    def dim_N_real(self) -> int:
        return 4 * self.n - 2 * (self.r + 1)

    @property
    def dim_Mprime_real(self) -> int:
        return 4 * (self.n - 1) - 2 * self.r

    @property
    def dim_Mprime_complex(self) -> int:
        return self.dim_Mprime_real // 2

    @property
    def dim_base_complex(self) -> int:
        """Complex dimension of the base locus ``D F(Z) = C``."""
        return self.n - 1 - self.r

    def dims(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "dim_M": self.dim_M,
            "dim_N_real": self.dim_N_real,
            "dim_Mprime_real": self.dim_Mprime_real,
            "dim_Mprime_complex": self.dim_Mprime_complex,
            "dim_base_complex": self.dim_base_complex,
        }


def make_quotient_spec(
    spec: Prepotential,
    Z0,
    D,
    Ct: complex = 0.0,
    rank_samples: int = 20,
    seed: int = 0,
    locus: Callable | None = None,
) -> QuotientSpec:
    """Build the quotient data after checking the null condition.

    ``rank_samples`` nearby lifts are used to test that the rank of
    ``G_AB = F_ABC D^C`` is locally constant; disagreement or a singular value
    close to the threshold raises :class:`RankInstabilityWarning`.  When the
    base locus is known, ``locus(rng)`` should return a nearby lift on it and
    constancy is tested there; otherwise generic perturbations of ``Z0`` are
    used, which flags every locus of positive codimension.
    """
    Z0 = np.asarray(Z0, dtype=complex)
    D = np.asarray(D, dtype=complex)
    jet = spec.jet(Z0)
    N = jet.F_AB.imag
    null = abs(D.conj() @ N @ D)
    scale = np.linalg.norm(D) ** 2 * np.linalg.norm(N, 2)
    if np.linalg.norm(D) == 0 or null > 1e-10 * scale:
        raise NullConditionError(f"conj(D) N D = {null:.3e} is not zero")
    C = D @ jet.F_AB
    G = np.einsum("abc,c->ab", jet.F_ABC, D)
    r, s, unstable = numerical_rank(G)
    if unstable:
        warnings.warn(f"singular values {s} cluster at the rank threshold", RankInstabilityWarning, stacklevel=2)
    if rank_samples:
        rng = np.random.default_rng(seed)
        ranks = set()
        for _ in range(rank_samples):
            if locus is None:
                dZ = rng.normal(size=Z0.shape) + 1j * rng.normal(size=Z0.shape)
                Zs = Z0 + 1e-3 * np.linalg.norm(Z0) * dZ
            else:
                Zs = locus(rng)
            Gs = np.einsum("abc,c->ab", spec.jet(Zs).F_ABC, D)
            ranks.add(numerical_rank(Gs)[0])
        if ranks != {r}:
            warnings.warn(f"rank of G varies near Z0: {sorted(ranks)} vs {r}", RankInstabilityWarning, stacklevel=2)
    return QuotientSpec(Z0, D, C, complex(Ct), r, s)


def membership(spec: Prepotential, qspec: QuotientSpec, p: ChartPoint) -> tuple[float, float]:
    """Residuals of the two equations cutting out ``N``."""
    F = spec.jet(lift(p.z)).F_AB
    r1 = float(np.linalg.norm(qspec.D @ F - qspec.C))
    r2 = float(abs(qspec.D @ (p.b - F @ p.a) - qspec.Ct))
    return r1, r2


def xi_fields(qspec: QuotientSpec, p: ChartPoint) -> tuple[np.ndarray, np.ndarray]:
    """``xi_1`` (real parts) and ``xi_2`` (imaginary parts) at ``p``."""
    kf = killing_fields(p)
    out = []
    for part in (np.real, np.imag):
        D, C, Ct = part(qspec.D), part(qspec.C), part(qspec.Ct)
        v = Ct * kf["k_phit"]
        for A in range(p.n):
            v = v + D[A] * kf[f"k_{A}"] + C[A] * kf[f"kt_{A}"]
        out.append(v)
    return out[0], out[1]


def point_on_N(spec: Prepotential, qspec: QuotientSpec, z, phi: float, phit: float, a, b) -> ChartPoint:
    """Project fiber data ``(a, b)`` onto ``D (b - F a) = Ct`` by a least-norm shift.

    ``z`` must already satisfy ``D F(Z) = C``.
    """
    F = spec.jet(lift(z)).F_AB
    D, n = qspec.D, qspec.n
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    DF = D @ F
    M = np.vstack([np.r_[-DF.real, D.real], np.r_[-DF.imag, D.imag]])
    res = qspec.Ct - (D @ b - DF @ a)
    d = np.linalg.lstsq(M, np.array([res.real, res.imag]), rcond=None)[0]
    return ChartPoint(z, phi, phit, a + d[:n], b + d[n:])


# --- the action -------------------------------------------------------------


def act(qspec: QuotientSpec, lam: complex, p: ChartPoint) -> ChartPoint:
    """Time-one flow of ``Re(lam) xi_1 + Im(lam) xi_2`` in real coordinates.

    On ``N`` this reduces to ``a += Re(conj(lam) D)``, ``b += Re(conj(lam) C)``,
    ``phit -= Re(conj(lam) Ct)``.
    """
    lc = complex(lam).conjugate()
    t = np.real(lc * qspec.D)
    s = np.real(lc * qspec.C)
    # exact flow; on N the first two terms sum to Re(conj(lam) Ct)
    phit = p.phit + p.b @ t - p.a @ s - 2.0 * np.real(lc * qspec.Ct)
    a, b = p.a + t, p.b + s
    return ChartPoint(p.z, p.phi, phit, a, b)


def act_w(spec: Prepotential, qspec: QuotientSpec, lam: complex, z, w0: complex, w: np.ndarray):
    """The same action written in the holomorphic coordinates ``(w^0, w)``."""
    F = spec.jet(lift(z)).F_AB
    Db = qspec.D.conj()
    Delta = qspec.C.conj() - F @ Db
    zeta = w + 0.5 * lam * Delta
    zeta0 = w0 - 1j * lam * (Db @ w) + 1j * lam * np.conj(qspec.Ct) - 0.25j * lam**2 * (Db @ Delta)
    return complex(zeta0), zeta


def canonical_lambda(spec: Prepotential, qspec: QuotientSpec, p: ChartPoint, Z=None) -> complex:
    """Unique ``lam`` with ``Z.w(act(lam, p)) = 0``; ``Z`` defaults to ``(1, z)``."""
    Zp = lift(p.z) if Z is None else np.asarray(Z, dtype=complex)
    N = spec.jet(lift(p.z)).F_AB.imag
    den = Zp @ N @ qspec.D.conj()
    if abs(den) < 1e-12 * np.linalg.norm(Zp) * np.linalg.norm(qspec.D) * np.linalg.norm(N):
        raise DegenerateQuotient("Z N conj(D) vanishes; the orbit does not cross Z.w = 0")
    _, w = holo_coords(spec, p)
    return complex(-1j * (Zp @ w) / den)


# --- affine parameterisation of Z.w = 0, D.w = Ct ---------------------------


@dataclass(frozen=True)
class FiberQuotientChart:
    """Affine chart ``x -> (w^0, w)`` of ``{Z.w = 0, D.w = Ct}``.

    ``x = (x^0, x_free)`` where ``x_free`` are the ``w_A`` with ``A`` not the
    slot or the pivot, in increasing order.
    """

    z: np.ndarray
    Z: np.ndarray
    slot: int
    pivot: int
    alpha: complex
    T: np.ndarray  # n x (n-2) linear part on x_free
    wc: np.ndarray  # constant part of w

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def free(self) -> list[int]:
        return [A for A in range(self.n) if A not in (self.slot, self.pivot)]

    def to_w(self, x) -> tuple[complex, np.ndarray]:
        x = np.asarray(x, dtype=complex)
        return complex(x[0]), self.wc + self.T @ x[1:]

    def from_w(self, w0: complex, w: np.ndarray) -> np.ndarray:
        return np.concatenate([[w0], np.asarray(w, dtype=complex)[self.free]])


def fiber_chart(qspec: QuotientSpec, z, Z=None) -> FiberQuotientChart:
    """Slot = largest ``|Z^A|``; pivot maximises ``|D^A - D^s Zhat^A|``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    Z = lift(z) if Z is None else np.asarray(Z, dtype=complex)
    D, Ct, n = qspec.D, qspec.Ct, qspec.n
    s = int(np.argmax(np.abs(Z)))
    Zh = Z / Z[s]
    den = D - D[s] * Zh
    den[s] = 0.0
    p = int(np.argmax(np.abs(den)))
    if abs(den[p]) < 1e-8 * np.linalg.norm(D):
        raise PivotError("D is proportional to Z; no admissible pivot")
    alpha = 1.0 / den[p]
    free = [A for A in range(n) if A not in (s, p)]
    T = np.zeros((n, len(free)), dtype=complex)
    wc = np.zeros(n, dtype=complex)
    for j, A in enumerate(free):
        T[A, j] = 1.0
        T[s, j] = alpha * (Zh[p] * D[A] - Zh[A] * D[p])
        T[p, j] = -alpha * (D[A] - D[s] * Zh[A])
    wc[s] = -alpha * Zh[p] * Ct
    wc[p] = alpha * Ct
    return FiberQuotientChart(z, Z, s, p, complex(alpha), T, wc)


def canonical_representative(spec: Prepotential, qspec: QuotientSpec, p: ChartPoint):
    """Return ``(lam*, representative point, chart, x)``."""
    lam = canonical_lambda(spec, qspec, p)
    q = act(qspec, lam, p)
    chart = fiber_chart(qspec, p.z)
    w0, w = holo_coords(spec, q)
    return lam, q, chart, chart.from_w(w0, w)


# --- inverse of the holomorphic coordinates ---------------------------------


def fiber_from_w(spec: Prepotential, z, w0: complex, w: np.ndarray) -> ChartPoint:
    """Chart point with prescribed ``(w^0, w)`` over ``z``."""
    F = spec.jet(lift(z)).F_AB
    Ninv = np.linalg.inv(F.imag)
    a = -Ninv @ w.imag
    b = w.real + F.real @ a
    e2 = w0.real + w.imag @ Ninv @ w.imag
    if e2 <= 0:
        raise DomainError("(w0, w) lies outside the fiber domain")
    phi = -0.5 * np.log(e2)
    phit = -w0.imag - a @ w.real
    return ChartPoint(z, phi, phit, a, b)


def fiber_tangent_from_w(spec: Prepotential, p: ChartPoint, dw0: complex, dw: np.ndarray) -> np.ndarray:
    """Real tangent vector at ``p`` (no base part) with ``(dw^0, dw)`` prescribed."""
    F = spec.jet(lift(p.z)).F_AB
    Ninv = np.linalg.inv(F.imag)
    L = p.layout
    w = p.b - F @ p.a
    da = -Ninv @ dw.imag
    db = dw.real + F.real @ da
    dphit = -dw0.imag - da @ w.real - p.a @ dw.real
    dphi = -0.5 * np.exp(2 * p.phi) * (dw0.real - da @ w.imag - p.a @ dw.imag)
    X = np.zeros(L.dim)
    X[L.phi], X[L.phit], X[L.a], X[L.b] = dphi, dphit, da, db
    return X


def base_tangent_at_fixed_w(spec: Prepotential, p: ChartPoint, dz) -> np.ndarray:
    """Real tangent at ``p`` moving ``z`` by ``dz`` with ``(w^0, w)`` held fixed."""
    dz = np.asarray(dz, dtype=complex)
    jet = spec.jet(lift(p.z))
    dF = np.einsum("abc,c->ab", jet.F_ABC[:, :, 1:], dz)
    N, dN = jet.F_AB.imag, dF.imag
    w = p.b - jet.F_AB @ p.a
    da = -np.linalg.solve(N, dN @ p.a)
    db = dF.real @ p.a + jet.F_AB.real @ da
    L = p.layout
    X = np.zeros(L.dim)
    X[L.zr], X[L.zi] = dz.real, dz.imag
    X[L.phi] = 0.5 * np.exp(2 * p.phi) * (p.a @ dN @ p.a)
    X[L.phit] = -da @ w.real
    X[L.a], X[L.b] = da, db
    return X


def _cauchy_derivative(f: Callable, t: np.ndarray, j: int, r: float, m: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(m) / m)
    e = np.zeros_like(t)
    e[j] = 1.0
    return sum(np.asarray(f(t + r * w * e)) / w for w in roots) / (m * r)


def _holo_derivative(f: Callable, t: np.ndarray, r: float = 1e-2, m: int = 16, rtol: float = 1e-12) -> np.ndarray:
    """Columns ``df/dt_j`` of a holomorphic map.

    Trapezoid rule for the Cauchy integral on a circle of radius ``r``.  The
    error decays like ``(r / rho)^m`` with ``rho`` the distance to the nearest
    singularity, so the radius is halved until two successive radii agree.
    """
    cols = []
    for j in range(t.shape[0]):
        rad = r
        prev = _cauchy_derivative(f, t, j, rad, m)
        while rad > 1e-6:
            rad /= 2
            cur = _cauchy_derivative(f, t, j, rad, m)
            if np.max(np.abs(cur - prev)) <= rtol * max(1.0, np.max(np.abs(cur))) + 1e-15 / rad:
                break
            prev = cur
        cols.append(cur)
    return np.array(cols).T


# --- metrics on the quotient fiber ------------------------------------------


def n_tilde(spec: Prepotential, chart: FiberQuotientChart, x):
    """``(Nt, Nt0, Nt1, Nt2)`` for the chart at the point ``x``."""
    N = spec.jet(lift(chart.z)).F_AB.imag
    Ninv = np.linalg.inv(N)
    T = chart.T
    Nt = T.conj().T @ Ninv @ T
    Nt0 = chart.wc.imag @ Ninv @ T
    Nt1 = T.imag.T @ Ninv @ T
    Nt2 = T.real.T @ Ninv @ T
    return Nt, Nt0, Nt1, Nt2


def hermitian_to_real(H: np.ndarray) -> np.ndarray:
    """Real symmetric form of ``xi^H H xi`` in the coordinates ``(Re xi, Im xi)``."""
    k = H.shape[0]
    L = np.hstack([np.eye(k), 1j * np.eye(k)])
    return np.real(L.conj().T @ H @ L)


def fiber_quotient_metric(spec: Prepotential, qspec: QuotientSpec, z, x, chart: FiberQuotientChart | None = None) -> np.ndarray:
    """Hermitian matrix of the quotient fiber metric in the coordinates ``x``.

    The point ``x`` sits on ``Z.w = 0`` where the ``|Z dw|^2`` term of the fiber
    metric drops out, leaving

        1/4 e^{4 phi} |dx^0 - 2i (Nt0 + Re x Nt1 + Im x Nt2) dx|^2 - 1/2 e^{2 phi} dx^H Nt dx.
    """
    chart = fiber_chart(qspec, z) if chart is None else chart
    x = np.asarray(x, dtype=complex)
    w0, w = chart.to_w(x)
    N = spec.jet(lift(chart.z)).F_AB.imag
    e2 = w0.real + w.imag @ np.linalg.solve(N, w.imag)
    if e2 <= 0:
        raise DomainError("x lies outside the fiber domain")
    Nt, Nt0, Nt1, Nt2 = n_tilde(spec, chart, x)
    xf = x[1:]
    k = x.shape[0]
    theta = np.zeros(k, dtype=complex)
    theta[0] = 1.0
    theta[1:] = -2j * (Nt0 + xf.real @ Nt1 + xf.imag @ Nt2)
    H = 0.25 / e2**2 * np.outer(theta.conj(), theta)
    H[1:, 1:] += -0.5 / e2 * Nt
    return H


def _real_tangents(spec: Prepotential, chart: FiberQuotientChart, p: ChartPoint) -> np.ndarray:
    """Columns: real tangent vectors for ``d(Re x)``, then ``d(Im x)``."""
    k = chart.n - 1
    cols = []
    for unit in (1.0, 1j):
        for j in range(k):
            dx = np.zeros(k, dtype=complex)
            dx[j] = unit
            dw0 = dx[0]
            dw = chart.T @ dx[1:]
            cols.append(fiber_tangent_from_w(spec, p, dw0, dw))
    return np.array(cols).T


def pullback_quotient_metric(spec: Prepotential, qspec: QuotientSpec, z, x, chart: FiberQuotientChart | None = None) -> np.ndarray:
    """Real form of the quotient fiber metric from ``metric()`` and the kernel ``k``.

    Evaluates ``g - (g(k,.) g(conj k,.) + c.c.) / g(k, conj k)`` with
    ``k = xi_2 + i xi_1`` on the tangent vectors of the chart.
    """
    chart = fiber_chart(qspec, z) if chart is None else chart
    w0, w = chart.to_w(x)
    p = fiber_from_w(spec, chart.z, w0, w)
    g = metric(spec, p)
    x1, x2 = xi_fields(qspec, p)
    k = x2 + 1j * x1
    gkk = float(np.real(k.conj() @ g @ k))
    if gkk < 1e-10:
        raise DegenerateQuotient(f"g(k, conj k) = {gkk:.3e}")
    V = _real_tangents(spec, chart, p)
    gk = k @ g @ V
    h = V.T @ g @ V - 2 * np.real(np.outer(gk, gk.conj())) / gkk
    return 0.5 * (h + h.T)


def kernel_pairing(spec: Prepotential, qspec: QuotientSpec, z, x, chart: FiberQuotientChart | None = None) -> float:
    """``max |g(k, X)|`` over chart tangent vectors ``X`` of the hypersurface."""
    chart = fiber_chart(qspec, z) if chart is None else chart
    w0, w = chart.to_w(x)
    p = fiber_from_w(spec, chart.z, w0, w)
    g = metric(spec, p)
    x1, x2 = xi_fields(qspec, p)
    V = _real_tangents(spec, chart, p)
    return float(np.abs((x2 + 1j * x1) @ g @ V).max())


# --- tangency test for cubic prepotentials ----------------------------------


def base_tangent_check(d, D, z0, alpha) -> tuple[float, float]:
    """Residuals of ``d_ijk (D^j - D^0 z0^j) alpha^k = 0`` and ``d(alpha, alpha, alpha) = 0``."""
    d = np.asarray(d)
    D = np.asarray(D, dtype=complex)
    z0 = np.asarray(z0, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    m = np.einsum("ijk,j->ik", d, D[1:] - D[0] * z0)
    lin = float(np.linalg.norm(m @ alpha))
    cub = float(abs(np.einsum("ijk,i,j,k->", d, alpha, alpha, alpha)))
    return lin, cub


# --- chart on M' ------------------------------------------------------------


class QuotientChart:
    """Holomorphic chart ``(t, x)`` on ``M'``.

    ``zmap(t)`` is a holomorphic parameterisation of the base locus and the
    fiber part is the fixed affine section built at ``t0``.  Real coordinates
    are ``(Re t, Im t, Re x, Im x)``; the complex structure is the standard one.
    """

    def __init__(self, spec: Prepotential, qspec: QuotientSpec, zmap: Callable, t0):
        self.spec = spec
        self.qspec = qspec
        self.zmap = zmap
        self.t0 = np.atleast_1d(np.asarray(t0, dtype=complex))
        self.chart = fiber_chart(qspec, zmap(self.t0))

    @property
    def kt(self) -> int:
        return self.t0.shape[0]

    @property
    def kx(self) -> int:
        return self.qspec.n - 1

    @property
    def dim(self) -> int:
        return 2 * (self.kt + self.kx)

    def split(self, y):
        y = np.asarray(y, dtype=float)
        kt, kx = self.kt, self.kx
        t = y[:kt] + 1j * y[kt : 2 * kt]
        x = y[2 * kt : 2 * kt + kx] + 1j * y[2 * kt + kx :]
        return t, x

    def join(self, t, x) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        x = np.asarray(x, dtype=complex)
        return np.concatenate([t.real, t.imag, x.real, x.imag])

    def J(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for k, off in ((self.kt, 0), (self.kx, 2 * self.kt)):
            I = np.eye(k)
            out[off : off + k, off + k : off + 2 * k] = -I
            out[off + k : off + 2 * k, off : off + k] = I
        return out

    def point(self, y) -> ChartPoint:
        t, x = self.split(y)
        w0, w = self.chart.to_w(x)
        return fiber_from_w(self.spec, self.zmap(t), w0, w)

    def coordinates(self, p: ChartPoint, t=None) -> np.ndarray:
        """Chart coordinates of the orbit through ``p`` (``t`` with ``zmap(t) = p.z``)."""
        t = self.t0 if t is None else np.atleast_1d(np.asarray(t, dtype=complex))
        lam = canonical_lambda(self.spec, self.qspec, p, Z=self.chart.Z)
        q = act(self.qspec, lam, p)
        return self.join(t, self.chart.from_w(*holo_coords(self.spec, q)))

    def embedding(self, y) -> np.ndarray:
        return self.point(y).to_vector()

    def tangents(self, y) -> np.ndarray:
        """Real ``4n x dim`` Jacobian of ``y -> point(y)``.

        Exact except for ``dzmap/dt``, which is a high-order difference
        quotient of a holomorphic map.
        """
        t, x = self.split(y)
        p = self.point(y)
        dz = _holo_derivative(self.zmap, t)
        cols = [base_tangent_at_fixed_w(self.spec, p, unit * dz[:, j]) for unit in (1.0, 1j) for j in range(self.kt)]
        w00, w0v = self.chart.to_w(np.zeros(self.kx, dtype=complex))
        for unit in (1.0, 1j):
            for j in range(self.kx):
                e = np.zeros(self.kx, dtype=complex)
                e[j] = unit
                dw0, dw = self.chart.to_w(e)
                cols.append(fiber_tangent_from_w(self.spec, p, dw0 - w00, dw - w0v))
        return np.array(cols).T

    def metric(self, y) -> np.ndarray:
        """Quotient metric: ``g`` on the ``g``-orthogonal complement of the orbit."""
        p = self.point(y)
        g = metric(self.spec, p)
        x1, x2 = xi_fields(self.qspec, p)
        K = np.array([x1, x2]).T
        V = self.tangents(y)
        G = K.T @ g @ K
        P = V - K @ np.linalg.solve(G, K.T @ g @ V)
        h = P.T @ g @ P
        return 0.5 * (h + h.T)

    def horizontal(self, y) -> tuple[ChartPoint, np.ndarray]:
        """Point and horizontal lifts of the chart vectors."""
        p = self.point(y)
        g = metric(self.spec, p)
        x1, x2 = xi_fields(self.qspec, p)
        K = np.array([x1, x2]).T
        V = self.tangents(y)
        return p, V - K @ np.linalg.solve(K.T @ g @ K, K.T @ g @ V)


def solve_null_component(spec: Prepotential, Z0, D, index: int) -> np.ndarray:
    """Adjust ``D[index]`` (closest solution along the gradient line) so that ``D`` is null.

    ``conj(D) N D`` restricted to the line ``D[index] = x0 + s u`` is a real
    quadratic in ``s``; the root of smallest modulus is taken.
    """
    _, N = _N(spec, Z0)
    D = np.array(D, dtype=complex)

    def q(x):
        E = D.copy()
        E[index] = x
        return float(np.real(E.conj() @ N @ E))

    x0 = D[index]
    grad = (N @ D)[index]
    u = grad / abs(grad) if abs(grad) > 1e-12 else 1.0
    c0 = q(x0)
    b = 0.5 * (q(x0 + u) - q(x0 - u))
    a = 0.5 * (q(x0 + u) + q(x0 - u)) - c0
    if abs(a) < 1e-10 * (abs(b) + abs(c0)):
        if b == 0:
            raise NullConditionError("null condition does not depend on this component")
        s = -c0 / b
    else:
        roots = np.roots([a, b, c0])
        roots = roots[np.abs(roots.imag) < 1e-9].real
        if roots.size == 0:
            raise NullConditionError("no null vector along this component")
        s = roots[np.argmin(np.abs(roots))]
    D[index] = x0 + s * u
    return D
