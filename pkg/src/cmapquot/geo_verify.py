"""Finite-difference differential geometry on point-evaluated fields.

Fields are plain callables ``x -> array`` on ``R^m``.  Conventions:

* a 1-form is a length-``m`` row ``omega_i``;
* a 2-form is an antisymmetric matrix with ``alpha(X, Y) = X^i alpha_ij Y^j``;
* ``(a ^ b)_ij = a_i b_j - a_j b_i`` and ``(d omega)_ij = d_i omega_j - d_j omega_i``;
* an endomorphism ``J`` acts on columns, ``(J X)^i = J^i_j X^j``;
* ``R_ijkl`` is lowered so that the sectional curvature of ``X ^ Y`` is
  ``R_ijkl X^i Y^j X^k Y^l / |X ^ Y|^2``.

Every derivative is a central difference evaluated at ``h`` and ``h/2``;
the Richardson combination is returned together with the step
disagreement, which callers use to tell FD noise from genuine failures.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import StepUnderflow

__all__ = [
    "Verdict",
    "CheckResult",
    "FDPolicy",
    "FDValue",
    "FieldHandle",
    "CurvatureSample",
    "verdict",
    "partials",
    "second_partials",
    "exterior_derivative",
    "exterior_derivative_2form",
    "wedge",
    "lie_bracket",
    "lie_derivative_metric",
    "nijenhuis",
    "christoffel",
    "riemann",
    "sectional_curvature",
    "holomorphic_sectional_curvature",
    "kahler_closedness",
    "fit_structure_constant",
    "covariant_derivative_endo",
    "curvature_symmetry_residuals",
    "complex_structure_from_curvature",
    "StructureFit",
    "structure_equation",
    "moment_derivative_residual",
    "nabla_moment_residual",
]

Field = Callable[[np.ndarray], np.ndarray]


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class CheckResult:
    name: str
    anchor: str
    residual: float
    tolerance: float
    verdict: Verdict
    points: int = 1
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "points": self.points,
            "max_residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "verdict": self.verdict.value,
            **({"detail": self.detail} if self.detail else {}),
        }


def verdict(residual: float, tol: float, fd_error: float = 0.0, lower: bool = False) -> Verdict:
    """Classify a residual.

    With ``lower=False`` the check passes when ``residual <= tol``; with
    ``lower=True`` when ``residual >= tol`` (used for "bounded away from 0").
    A failing check whose FD step disagreement could account for the miss is
    INCONCLUSIVE rather than FAIL.
    """
    if not np.isfinite(residual):
        return Verdict.FAIL
    ok = residual >= tol if lower else residual <= tol
    if ok:
        return Verdict.PASS
    margin = abs(residual - tol)
    if fd_error > 0 and fd_error >= margin:
        return Verdict.INCONCLUSIVE
    return Verdict.FAIL


@dataclass(frozen=True)
class FDPolicy:
    """Step rule ``h_i = max(rel * max(|x_i|, 1), floor)``."""

    rel: float = 1e-5
    floor: float = 1e-7
    richardson: bool = True

    def steps(self, x: np.ndarray) -> np.ndarray:
        h = np.maximum(self.rel * np.maximum(np.abs(x), 1.0), self.floor)
        moved = (x + h) - x
        if np.any(moved == 0) or np.any(np.abs(moved - h) > 0.5 * h):
            raise StepUnderflow("finite-difference step is not resolvable at this point")
        return h


FIRST = FDPolicy(1e-5, 1e-7)
SECOND = FDPolicy(1e-4, 1e-6)


@dataclass(frozen=True)
class FDValue:
    """A finite-difference estimate with its step-halving disagreement."""

    value: np.ndarray
    error: float


@dataclass(frozen=True)
class FieldHandle:
    """An evaluation closure bundled with its differentiation policy."""

    fn: Field
    policy: FDPolicy = FIRST

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)))


def _fn(f) -> Field:
    return f.fn if isinstance(f, FieldHandle) else f


def _pol(f, default: FDPolicy) -> FDPolicy:
    return f.policy if isinstance(f, FieldHandle) else default


def _central(f: Field, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    out = []
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h[i]
        out.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h[i]))
    return np.stack(out)


def partials(f, x, policy: FDPolicy | None = None) -> FDValue:
    """``D[i, ...] = d f / d x^i`` by central differences."""
    x = np.asarray(x, dtype=float)
    policy = policy or _pol(f, FIRST)
    f = _fn(f)
    h = policy.steps(x)
    d1 = _central(f, x, h)
    if not policy.richardson:
        return FDValue(d1, 0.0)
    d2 = _central(f, x, h / 2)
    return FDValue((4 * d2 - d1) / 3, float(np.max(np.abs(d2 - d1), initial=0.0)))


def _second(f: Field, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    m = x.shape[0]
    f0 = np.asarray(f(x))
    out = np.empty((m, m) + f0.shape, dtype=f0.dtype)
    E = np.diag(h)
    plus = [np.asarray(f(x + E[i])) for i in range(m)]
    minus = [np.asarray(f(x - E[i])) for i in range(m)]
    for i in range(m):
        out[i, i] = (plus[i] - 2 * f0 + minus[i]) / h[i] ** 2
        for j in range(i + 1, m):
            v = (
                np.asarray(f(x + E[i] + E[j]))
                - np.asarray(f(x + E[i] - E[j]))
                - np.asarray(f(x - E[i] + E[j]))
                + np.asarray(f(x - E[i] - E[j]))
            ) / (4 * h[i] * h[j])
            out[i, j] = out[j, i] = v
    return out


def second_partials(f, x, policy: FDPolicy | None = None) -> FDValue:
    """``H[i, j, ...] = d^2 f / d x^i d x^j``."""
    x = np.asarray(x, dtype=float)
    policy = policy or _pol(f, SECOND)
    f = _fn(f)
    h = policy.steps(x)
    s1 = _second(f, x, h)
    if not policy.richardson:
        return FDValue(s1, 0.0)
    s2 = _second(f, x, h / 2)
    return FDValue((4 * s2 - s1) / 3, float(np.max(np.abs(s2 - s1), initial=0.0)))


# --- forms ---------------------------------------------------------------


def wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.outer(a, b) - np.outer(b, a)


def exterior_derivative(omega, x, policy: FDPolicy | None = None) -> FDValue:
    """``(d omega)_ij = d_i omega_j - d_j omega_i`` for a 1-form field."""
    D = partials(omega, x, policy)
    return FDValue(D.value - D.value.T, 2 * D.error)


def exterior_derivative_2form(alpha, x, policy: FDPolicy | None = None) -> FDValue:
    """``(d alpha)_ijk = d_i alpha_jk + d_j alpha_ki + d_k alpha_ij``."""
    Dv = partials(alpha, x, policy)
    D = Dv.value
    out = D + np.transpose(D, (1, 2, 0)) + np.transpose(D, (2, 0, 1))
    return FDValue(out, 3 * Dv.error)


# --- vector fields -------------------------------------------------------


def lie_bracket(X, Y, x, policy: FDPolicy | None = None) -> FDValue:
    """``[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i``."""
    x = np.asarray(x, dtype=float)
    DX = partials(X, x, policy)
    DY = partials(Y, x, policy)
    Xv, Yv = np.asarray(_fn(X)(x)), np.asarray(_fn(Y)(x))
    val = Xv @ DY.value - Yv @ DX.value
    err = np.max(np.abs(Xv)) * DY.error + np.max(np.abs(Yv)) * DX.error
    return FDValue(val, float(err))


def lie_derivative_metric(g, X, x, policy: FDPolicy | None = None) -> FDValue:
    """``(L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k``."""
    x = np.asarray(x, dtype=float)
    Dg = partials(g, x, policy)
    DX = partials(X, x, policy)
    gv, Xv = np.asarray(_fn(g)(x)), np.asarray(_fn(X)(x))
    A = DX.value  # A[i, k] = d_i X^k
    val = np.einsum("k,kij->ij", Xv, Dg.value) + A @ gv + (A @ gv).T
    return FDValue(val, float(Dg.error * np.max(np.abs(Xv)) + 2 * DX.error * np.max(np.abs(gv))))


def nijenhuis(J, x, policy: FDPolicy | None = None) -> FDValue:
    """Max-norm of the Nijenhuis tensor of an endomorphism field.

    ``N^i_jk = J^l_j d_l J^i_k - J^l_k d_l J^i_j - J^i_l (d_j J^l_k - d_k J^l_j)``.
    """
    x = np.asarray(x, dtype=float)
    D = partials(J, x, policy)
    Jv = np.asarray(_fn(J)(x))
    dJ = D.value  # dJ[l, i, k] = d_l J^i_k
    t1 = np.einsum("lj,lik->ijk", Jv, dJ)
    t2 = np.einsum("il,jlk->ijk", Jv, dJ)
    N = t1 - np.transpose(t1, (0, 2, 1)) - (t2 - np.transpose(t2, (0, 2, 1)))
    return FDValue(N, float(4 * D.error * max(1.0, np.max(np.abs(Jv)))))


def kahler_closedness(g, J, x, policy: FDPolicy | None = None) -> FDValue:
    """``d`` of the fundamental form ``phi_ij = g_il J^l_j``."""
    gf, Jf = _fn(g), _fn(J)

    def phi(y):
        return np.asarray(gf(y)) @ np.asarray(Jf(y))

    return exterior_derivative_2form(phi, x, policy or _pol(g, FIRST))


# --- curvature -----------------------------------------------------------


@dataclass(frozen=True)
class CurvatureSample:
    point: np.ndarray
    g: np.ndarray
    Gamma: np.ndarray
    R: np.ndarray
    ric: np.ndarray
    scal: float
    error: float

    def sectional(self, X, Y) -> float:
        return sectional_curvature(self, X, Y)


def _lowered_christoffel(dg: np.ndarray) -> np.ndarray:
    """``low[i, j, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)`` from ``dg[l, i, j] = d_l g_ij``."""
    return 0.5 * (dg + dg.transpose(1, 0, 2) - np.einsum("lij->ijl", dg))


def christoffel(g, x, policy: FDPolicy | None = None) -> FDValue:
    """``Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)`` as ``G[k, i, j]``."""
    x = np.asarray(x, dtype=float)
    gv = np.asarray(_fn(g)(x))
    D = partials(g, x, policy)
    G = np.einsum("kl,ijl->kij", np.linalg.inv(gv), _lowered_christoffel(D.value))
    return FDValue(G, D.error * float(np.max(np.abs(np.linalg.inv(gv)))))


def riemann(g, x, policy: FDPolicy | None = None) -> CurvatureSample:
    """Riemann tensor from first and second FD derivatives of the metric."""
    x = np.asarray(x, dtype=float)
    policy = policy or _pol(g, SECOND)
    gf = _fn(g)
    gv = np.asarray(gf(x))
    ginv = np.linalg.inv(gv)
    D1 = partials(gf, x, policy)
    D2 = second_partials(gf, x, policy)
    Gam = np.einsum("kl,ijl->kij", ginv, _lowered_christoffel(D1.value))
    h = D2.value  # h[a, b, i, j] = d_a d_b g_ij
    # R_iklm = 1/2 (g_im,kl + g_kl,im - g_il,km - g_km,il) + g_np (G^n_kl G^p_im - G^n_km G^p_il)
    t = (
        np.einsum("klim->iklm", h)
        + np.einsum("imkl->iklm", h)
        - np.einsum("kmil->iklm", h)
        - np.einsum("ilkm->iklm", h)
    )
    GG = np.einsum("np,nkl,pim->iklm", gv, Gam, Gam) - np.einsum("np,nkm,pil->iklm", gv, Gam, Gam)
    R = 0.5 * t + GG
    ric = np.einsum("il,iklm->km", ginv, R)
    scal = float(np.einsum("km,km->", ginv, ric))
    err = float(D2.error + D1.error * np.max(np.abs(Gam)))
    return CurvatureSample(x, gv, Gam, R, ric, scal, err)


def sectional_curvature(cs: CurvatureSample, X, Y) -> float:
    X, Y = np.asarray(X, float), np.asarray(Y, float)
    g = cs.g
    num = np.einsum("iklm,i,k,l,m->", cs.R, X, Y, X, Y)
    den = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(num / den)


def holomorphic_sectional_curvature(cs: CurvatureSample, J: np.ndarray, X) -> float:
    """Sectional curvature of the plane ``span(X, JX)``."""
    X = np.asarray(X, float)
    return sectional_curvature(cs, X, J @ X)


def complex_structure_from_curvature(cs: CurvatureSample) -> tuple[np.ndarray, float]:
    """Recover the Kaehler complex structure of a complex hyperbolic metric.

    On ``CH^m`` the curvature operator on 2-forms has the Kaehler form as its
    unique most negative eigenvector.  The eigenvector, expressed in a
    ``g``-orthonormal frame and scaled to ``J^2 = -1``, is mapped back to
    coordinates.  Returns ``(J, max|J^2 + Id|)``.
    """
    m = cs.g.shape[0]
    E = np.linalg.inv(np.linalg.cholesky(cs.g)).T
    Ro = np.einsum("iklm,ia,kb,lc,md->abcd", cs.R, E, E, E, E)
    iu = np.triu_indices(m, 1)
    op = Ro[iu[0], iu[1]][:, iu[0], iu[1]]
    _, vecs = np.linalg.eigh(0.5 * (op + op.T))
    W = np.zeros((m, m))
    W[iu] = vecs[:, 0]
    W = W - W.T
    W *= np.sqrt(m) / np.linalg.norm(W)
    J = E @ W @ np.linalg.inv(E)
    return J, float(np.max(np.abs(W @ W + np.eye(m))))


def curvature_symmetry_residuals(cs: CurvatureSample) -> dict:
    """Antisymmetries, pair symmetry and first Bianchi, scaled by ``max|R|``."""
    R = cs.R
    s = max(float(np.max(np.abs(R))), 1.0)
    return {
        "antisym_12": float(np.max(np.abs(R + R.transpose(1, 0, 2, 3)))) / s,
        "antisym_34": float(np.max(np.abs(R + R.transpose(0, 1, 3, 2)))) / s,
        "pair": float(np.max(np.abs(R - R.transpose(2, 3, 0, 1)))) / s,
        "bianchi": float(np.max(np.abs(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)))) / s,
    }


def covariant_derivative_endo(E, Gamma: np.ndarray, x, policy: FDPolicy | None = None) -> FDValue:
    """``(nabla_k E)^i_j = d_k E^i_j + Gamma^i_kl E^l_j - Gamma^l_kj E^i_l`` as ``[k, i, j]``."""
    x = np.asarray(x, dtype=float)
    D = partials(E, x, policy)
    Ev = np.asarray(_fn(E)(x))
    val = D.value + np.einsum("ikl,lj->kij", Gamma, Ev) - np.einsum("lkj,il->kij", Gamma, Ev)
    return FDValue(val, D.error)


def fit_structure_constant(phis: np.ndarray, rhs: np.ndarray) -> tuple[float, np.ndarray]:
    """Least-squares ``nu`` with ``nu * phi_alpha ~ rhs_alpha``; returns ``(nu, residual norms)``."""
    phis = np.asarray(phis, float)
    rhs = np.asarray(rhs, float)
    nu = float(np.sum(phis * rhs) / np.sum(phis * phis))
    res = np.array([np.max(np.abs(nu * p - r)) for p, r in zip(phis, rhs)])
    return nu, res


# --- checks tied to the c-map structure ----------------------------------


@dataclass(frozen=True)
class StructureFit:
    nu: float
    residuals: np.ndarray
    scale: float
    error: float


def _cmap_fields(spec, n: int):
    from .cmap import ChartPoint, complex_structures, metric, su2_connection

    def at(y):
        return ChartPoint.from_vector(y, n)

    return at, metric, complex_structures, su2_connection


def structure_equation(spec, p, policy: FDPolicy | None = None) -> StructureFit:
    """Least-squares ``nu`` in ``nu phi_a = d omega_a + omega_b ^ omega_c`` (cyclic).

    Residuals are max-norms at the fitted ``nu``, relative to ``max |phi_a|``.
    """
    from .cmap import fundamental_forms

    n = p.n
    at, metric, cs, su2 = _cmap_fields(spec, n)
    x = p.to_vector()
    om = su2(spec, p)
    dom = partials(lambda y: su2(spec, at(y)), x, policy or FIRST)
    d = dom.value.transpose(1, 0, 2)  # d[a, i, j] = d_i omega_a_j
    g = metric(spec, p)
    phis = fundamental_forms(g, cs(spec, p))
    rhs = []
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        rhs.append(d[a] - d[a].T + wedge(om[b], om[c]))
    nu, res = fit_structure_constant(phis, np.array(rhs))
    scale = float(np.max(np.abs(phis)))
    return StructureFit(nu, res / scale, scale, 2 * dom.error / scale)


def nabla_moment_residual(g, J, coeffs, kappa, nu: float, x, policy: FDPolicy | None = None) -> FDValue:
    """Residual of ``nabla P = (nu/2) sum_a phi_a(., kappa) J_a`` for generic fields.

    ``g(y)`` is the metric, ``J(y)`` the stacked triple ``(3, d, d)``,
    ``coeffs(y)`` the three coefficients of ``P = sum_a c_a J_a`` and
    ``kappa(y)`` the Killing field.  The max-norm is relative to ``max(1, |rhs|)``.
    """
    policy = policy or FIRST
    x = np.asarray(x, dtype=float)

    def P(y):
        return np.einsum("a,aij->ij", coeffs(y), J(y))

    Gam = christoffel(g, x, policy)
    nab = covariant_derivative_endo(P, Gam.value, x, policy)
    Jv = np.asarray(J(x))
    phis = np.einsum("il,alj->aij", g(x), Jv)
    rhs = 0.5 * nu * np.einsum("aij,j,akl->ikl", phis, kappa(x), Jv)
    scale = max(1.0, float(np.max(np.abs(rhs))))
    return FDValue(np.max(np.abs(nab.value - rhs)) / scale, (nab.error + Gam.error) / scale)


def moment_derivative_residual(spec, p, kappa, nu: float, policy: FDPolicy | None = None) -> FDValue:
    """``nabla P`` identity for the c-map metric at ``p``.

    ``kappa`` maps a chart point to the coordinate components of a Killing
    field; ``P = sum_a (omega_a(kappa)/2) J_a``.
    """
    from .cmap import moment_map

    n = p.n
    at, metric, cs, _ = _cmap_fields(spec, n)
    return nabla_moment_residual(
        lambda y: metric(spec, at(y)),
        lambda y: np.array(list(cs(spec, at(y)))),
        lambda y: moment_map(spec, at(y), kappa(at(y))),
        lambda y: kappa(at(y)),
        nu,
        p.to_vector(),
        policy,
    )
