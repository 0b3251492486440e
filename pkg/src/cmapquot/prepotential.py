"""Holomorphic prepotentials and their exact derivative jets.

Index convention: homogeneous special coordinates are ``Z = (Z^0, ..., Z^{n-1})``
with ``Z^0`` the projective slot, so inhomogeneous coordinates are
``z^i = Z^i / Z^0`` for ``i = 1..n-1``.  Families that are naturally written
with the projective coordinate last are re-indexed to put it first.

Every prepotential is homogeneous of degree two.  Derivatives are hand-coded
per family, never obtained by numerical differentiation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, SignatureError

__all__ = [
    "Jet3",
    "Prepotential",
    "QuadraticPrepotential",
    "CubicPrepotential",
    "HomogeneousPrepotential",
    "MonomialPrepotential",
    "Monomial",
    "eval_jet",
    "n_matrix",
    "clifford_gammas",
    "check_clifford",
]


@dataclass(frozen=True)
class Jet3:
    """Value and first three derivatives of ``F`` at ``Z``."""

    Z: np.ndarray
    F: complex
    F_A: np.ndarray
    F_AB: np.ndarray
    F_ABC: np.ndarray

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    def homogeneity_residuals(self) -> tuple[float, float, float]:
        """Relative residuals of the Euler identities for degree-2 homogeneity.

        Returns the residuals of ``Z.F_A = 2F``, ``Z.F_AB = F_A`` and
        ``Z.F_ABC = 0`` scaled by the size of the terms involved.
        """
        Z = self.Z
        zn = max(np.linalg.norm(Z), 1.0)
        r0 = abs(Z @ self.F_A - 2 * self.F) / max(zn * np.linalg.norm(self.F_A), abs(self.F), 1e-300)
        r1 = np.linalg.norm(Z @ self.F_AB - self.F_A) / max(zn * np.linalg.norm(self.F_AB), 1e-300)
        r2 = np.linalg.norm(np.einsum("c,abc->ab", Z, self.F_ABC)) / max(
            zn * np.linalg.norm(self.F_ABC), 1e-300
        )
        # an identically vanishing third derivative gives 0/tiny -> 0
        return float(r0), float(r1), float(r2)


class Prepotential:
    """Base class.  Subclasses implement :meth:`jet`."""

    kind: str = "abstract"
    n: int

    def jet(self, Z: np.ndarray) -> Jet3:
        raise NotImplementedError

    def __add__(self, other: "Prepotential") -> "SumPrepotential":
        return SumPrepotential((self, other))

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n}


def _as_Z(Z, n: int) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    if Z.shape != (n,):
        raise ValueError(f"expected a complex {n}-vector, got shape {Z.shape}")
    if not np.any(Z):
        raise DomainError("Z = 0 is not a point of the affine special Kaehler cone")
    return Z


class QuadraticPrepotential(Prepotential):
    """``F = 1/2 Q_AB Z^A Z^B`` with complex symmetric ``Q``.

    ``Im Q`` must have signature ``(1, n-1)``.
    """

    kind = "quadratic"

    def __init__(self, Q):
        Q = np.array(Q, dtype=complex)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        if not np.allclose(Q, Q.T, atol=1e-14):
            raise ValueError("Q must be symmetric")
        ev = np.linalg.eigvalsh(Q.imag)
        pos = int(np.sum(ev > 0))
        neg = int(np.sum(ev < 0))
        if pos != 1 or neg != Q.shape[0] - 1:
            raise SignatureError(f"Im Q has signature ({pos}, {neg}); need (1, {Q.shape[0] - 1})")
        self.Q = Q
        self.Q.setflags(write=False)
        self.n = Q.shape[0]

    @classmethod
    def standard(cls, n: int) -> "QuadraticPrepotential":
        """``F = (i/2)((Z^0)^2 - sum_i (Z^i)^2)``, the model of complex hyperbolic space."""
        return cls(1j * np.diag([1.0] + [-1.0] * (n - 1)))

    def jet(self, Z) -> Jet3:
        Z = _as_Z(Z, self.n)
        F_A = self.Q @ Z
        return Jet3(Z, 0.5 * Z @ F_A, F_A, self.Q.copy(), np.zeros((self.n,) * 3, dtype=complex))

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "Q_real": self.Q.real.tolist(), "Q_imag": self.Q.imag.tolist()}


def _symmetrize3(d: np.ndarray) -> np.ndarray:
    perms = itertools.permutations(range(3))
    return sum(np.transpose(d, p) for p in perms) / 6.0


class CubicPrepotential(Prepotential):
    """``F = (1/6) d_ijk Z^i Z^j Z^k / Z^0`` with real totally symmetric ``d``.

    ``extra`` records additional cubic monomials (``CubicPlus`` variant); they
    are folded into ``d`` so the jet stays a single closed form.
    """

    kind = "cubic"

    def __init__(self, d, extra: Sequence["Monomial"] = ()):
        d = np.array(d, dtype=float)
        if d.ndim != 3 or len(set(d.shape)) != 1:
            raise ValueError("d must be an (n-1)^3 array")
        if not np.allclose(d, _symmetrize3(d), atol=1e-14):
            raise ValueError("d_ijk must be totally symmetric")
        self.base_d = d.copy()
        self.extra = tuple(extra)
        if self.extra:
            self.kind = "cubic_plus"
            d = d + cubic_tensor_from_monomials(self.extra, d.shape[0])
        self.d = d
        self.d.setflags(write=False)
        self.n = d.shape[0] + 1

    @classmethod
    def from_monomials(cls, terms: Sequence["Monomial"], m: int) -> "CubicPrepotential":
        return cls(cubic_tensor_from_monomials(terms, m))

    def jet(self, Z) -> Jet3:
        Z = _as_Z(Z, self.n)
        if Z[0] == 0:
            raise DomainError("Z^0 = 0 is a pole of a cubic prepotential")
        t = 1.0 / Z[0]
        X = Z[1:]
        d = self.d
        h_ij = np.einsum("ijk,k->ij", d, X)
        h_i = 0.5 * h_ij @ X
        h = h_i @ X / 3.0
        n = self.n
        F_A = np.empty(n, dtype=complex)
        F_A[0] = -h * t * t
        F_A[1:] = h_i * t
        F_AB = np.empty((n, n), dtype=complex)
        F_AB[0, 0] = 2 * h * t**3
        F_AB[0, 1:] = F_AB[1:, 0] = -h_i * t * t
        F_AB[1:, 1:] = h_ij * t
        F_ABC = np.empty((n, n, n), dtype=complex)
        F_ABC[0, 0, 0] = -6 * h * t**4
        F_ABC[0, 0, 1:] = F_ABC[0, 1:, 0] = F_ABC[1:, 0, 0] = 2 * h_i * t**3
        F_ABC[0, 1:, 1:] = F_ABC[1:, 0, 1:] = F_ABC[1:, 1:, 0] = -h_ij * t * t
        F_ABC[1:, 1:, 1:] = d * t
        return Jet3(Z, h * t, F_A, F_AB, F_ABC)

    def describe(self) -> dict:
        out = {"kind": self.kind, "n": self.n, "nonzero_d": _sparse_d(self.base_d)}
        if self.extra:
            out["extra"] = [m.as_dict() for m in self.extra]
        return out


def _sparse_d(d: np.ndarray) -> list:
    out = []
    for idx in zip(*np.nonzero(d)):
        if idx[0] <= idx[1] <= idx[2]:
            out.append([int(i) + 1 for i in idx] + [float(d[idx])])
    return out


@dataclass(frozen=True)
class Monomial:
    """``coef * (Z^0)^z0_power * prod_i (Z^i)^degrees[i-1]``."""

    coef: complex
    degrees: tuple[int, ...]
    z0_power: int = 0

    @property
    def total_degree(self) -> int:
        return sum(self.degrees) + self.z0_power

    def exponents(self) -> tuple[int, ...]:
        return (self.z0_power,) + tuple(self.degrees)

    def as_dict(self) -> dict:
        c = complex(self.coef)
        return {"coef": [c.real, c.imag], "degrees": list(self.degrees), "z0_power": self.z0_power}


def cubic_tensor_from_monomials(terms: Sequence[Monomial], m: int) -> np.ndarray:
    """Third-derivative tensor of ``sum terms`` for cubic monomials over ``Z^1..Z^m``."""
    d = np.zeros((m, m, m))
    for t in terms:
        if len(t.degrees) != m or sum(t.degrees) != 3 or t.z0_power != -1:
            raise ValueError(f"{t} is not of the form (cubic in Z^i) / Z^0")
        if abs(complex(t.coef).imag) > 0:
            raise ValueError("cubic coefficients must be real")
        for i, j, k in itertools.product(range(m), repeat=3):
            e = list(t.degrees)
            coef = complex(t.coef).real
            for idx in (i, j, k):
                coef *= e[idx]
                e[idx] -= 1
            if coef and min(e) >= 0:
                d[i, j, k] += coef
    return d


def _mono_value(coef: complex, exps: np.ndarray, Z: np.ndarray) -> complex:
    val = complex(coef)
    for e, z in zip(exps, Z):
        if e:
            val *= z ** int(e)
    return val


class MonomialPrepotential(Prepotential):
    """User supplied sum of monomials, checked for degree-2 homogeneity."""

    kind = "monomial"

    def __init__(self, terms: Sequence[Monomial], n: int | None = None):
        terms = tuple(terms)
        if not terms:
            raise ValueError("need at least one monomial")
        m = len(terms[0].degrees)
        if any(len(t.degrees) != m for t in terms):
            raise ValueError("inconsistent monomial lengths")
        if n is not None and n != m + 1:
            raise ValueError("n does not match monomial length")
        for t in terms:
            if t.total_degree != 2:
                raise ValueError(f"monomial {t} has degree {t.total_degree}, need 2")
            if any(k < 0 for k in t.degrees):
                raise ValueError("only Z^0 may carry negative powers")
        self.terms = terms
        self.n = m + 1

    def jet(self, Z) -> Jet3:
        Z = _as_Z(Z, self.n)
        n = self.n
        if Z[0] == 0 and any(t.z0_power < 0 for t in self.terms):
            raise DomainError("Z^0 = 0 is a pole of this prepotential")
        F = 0j
        F_A = np.zeros(n, dtype=complex)
        F_AB = np.zeros((n, n), dtype=complex)
        F_ABC = np.zeros((n, n, n), dtype=complex)
        for t in self.terms:
            e0 = np.array(t.exponents())
            F += _mono_value(t.coef, e0, Z)
            for A in range(n):
                c1, e1 = e0[A], e0.copy()
                if c1 == 0:
                    continue
                e1[A] -= 1
                F_A[A] += _mono_value(t.coef * c1, e1, Z)
                for B in range(n):
                    c2, e2 = e1[B], e1.copy()
                    if c2 == 0:
                        continue
                    e2[B] -= 1
                    F_AB[A, B] += _mono_value(t.coef * c1 * c2, e2, Z)
                    for C in range(n):
                        c3, e3 = e2[C], e2.copy()
                        if c3 == 0:
                            continue
                        e3[C] -= 1
                        F_ABC[A, B, C] += _mono_value(t.coef * c1 * c2 * c3, e3, Z)
        return Jet3(Z, F, F_A, F_AB, F_ABC)

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "terms": [t.as_dict() for t in self.terms]}


class SumPrepotential(Prepotential):
    """Pointwise sum; jets add."""

    kind = "sum"

    def __init__(self, parts: Sequence[Prepotential]):
        parts = tuple(parts)
        if len({p.n for p in parts}) != 1:
            raise ValueError("summands must share n")
        self.parts = parts
        self.n = parts[0].n

    def jet(self, Z) -> Jet3:
        jets = [p.jet(Z) for p in self.parts]
        return Jet3(
            jets[0].Z,
            sum(j.F for j in jets),
            sum(j.F_A for j in jets),
            sum(j.F_AB for j in jets),
            sum(j.F_ABC for j in jets),
        )

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "parts": [p.describe() for p in self.parts]}


# --- homogeneous (Clifford) family ---------------------------------------


def clifford_gammas(k: int) -> list[np.ndarray]:
    """Real symmetric generators of the Clifford algebra ``Cl(k, 0)``.

    Built recursively: from ``gamma_1..gamma_j`` on ``R^m`` the set
    ``gamma_i (x) sigma_1`` together with ``1 (x) sigma_3`` acts on ``R^{2m}``.
    The representation dimension is ``2^(k-1)``.
    """
    if k < 1:
        raise ValueError("need at least one generator")
    s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    s3 = np.array([[1.0, 0.0], [0.0, -1.0]])
    gam = [np.ones((1, 1))]
    for _ in range(k - 1):
        m = gam[0].shape[0]
        gam = [np.kron(g, s1) for g in gam] + [np.kron(np.eye(m), s3)]
    return gam


def check_clifford(gammas: Sequence[np.ndarray], tol: float = 1e-12) -> float:
    """Max residual of ``g_a g_b + g_b g_a - 2 delta_ab`` (raises if above ``tol``)."""
    r = gammas[0].shape[0]
    worst = 0.0
    for a, ga in enumerate(gammas):
        if not np.allclose(ga, ga.T, atol=tol):
            raise ValueError(f"gamma_{a} is not symmetric")
        for b, gb in enumerate(gammas):
            target = 2.0 * np.eye(r) * (a == b)
            worst = max(worst, float(np.max(np.abs(ga @ gb + gb @ ga - target))))
    if worst > tol:
        raise ValueError(f"Clifford relations violated (residual {worst:.2e})")
    return worst


class HomogeneousPrepotential(CubicPrepotential):
    """General homogeneous cubic family with Clifford data.

    ``h = h1 ((h2)^2 - h_mu h_mu) - h2 h_l h_l + gamma_{mu l m} h^mu h^l h^m``
    in the variables ``(h1, h2, h^mu [q+1], h^l [r])``.
    """

    kind = "homogeneous"

    def __init__(self, q: int, r: int, gammas: Sequence[np.ndarray] | None = None):
        if q < 0:
            raise ValueError("q must be non-negative")
        if gammas is None:
            base = clifford_gammas(q + 1)
            irr = base[0].shape[0]
            if r % irr:
                raise ValueError(f"r must be a multiple of {irr} for q = {q}")
            gammas = [np.kron(np.eye(r // irr), g) for g in base]
        gammas = [np.asarray(g, dtype=float) for g in gammas]
        if len(gammas) != q + 1 or any(g.shape != (r, r) for g in gammas):
            raise ValueError("need q+1 gamma matrices of size r x r")
        check_clifford(gammas)
        self.q, self.r, self.gammas = q, r, tuple(gammas)
        m = 3 + q + r
        d = np.zeros((m, m, m))
        i1, i2 = 0, 1
        mus = range(2, 3 + q)
        ells = range(3 + q, m)

        def put(i, j, k, val):
            for p in set(itertools.permutations((i, j, k))):
                d[p] += val

        put(i1, i2, i2, 2.0)
        for mu in mus:
            put(i1, mu, mu, -2.0)
        for l in ells:
            put(i2, l, l, -2.0)
        for a, mu in enumerate(mus):
            g = self.gammas[a]
            for x, l in enumerate(ells):
                for y, mm in enumerate(ells):
                    if y < x or g[x, y] == 0:
                        continue
                    # d_{mu l m} = 2 gamma_{mu l m}; each unordered (l,m) is visited once
                    put(mu, l, mm, 2.0 * g[x, y])
        super().__init__(d)
        self.kind = "homogeneous"

    def describe(self) -> dict:
        out = super().describe()
        out.update({"kind": "homogeneous", "q": self.q, "r": self.r})
        return out


def eval_jet(spec: Prepotential, Z) -> Jet3:
    """Exact jet ``(F, F_A, F_AB, F_ABC)`` of ``spec`` at ``Z``."""
    return spec.jet(Z)


def n_matrix(jet: Jet3) -> np.ndarray:
    """``N_AB = Im F_AB`` (symmetric by construction)."""
    N = jet.F_AB.imag.copy()
    return 0.5 * (N + N.T)
