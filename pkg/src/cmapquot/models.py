"""Catalog of example geometries, their fixed-locus analyses and model checks.

Model identifiers are ``family`` or ``family:key=value,...``:

==================  ==============================================  ==========
identifier          prepotential ``F(1, z)``                        ``n``
==================  ==============================================  ==========
``quadratic:n=N``   ``(i/2)(1 - sum z_i^2)``                        ``N``
``stu``             ``S T U``                                       4
``quantum_stu``     ``S T U + T^3/3`` (branch value ``T=<T>``)      4
``st2:n=N``         ``S T U + S y.y``, ``y`` in ``C^{N-4}``         ``N``
``t_series:p=P``    ``S (S T - x.x)``, ``x`` in ``C^P``             ``P+3``
``w:p=P,q=Q``       ``S T U + T x.x + S y.y``                       ``P+Q+4``
``homogeneous:q,r`` ``h1(h2^2 - h_mu h_mu) - h2 h_l h_l + gamma..``  ``q+r+4``
``h4``              real hyperbolic 4-space, no prepotential        n/a
==================  ==============================================  ==========

Every cubic family uses ``Z^0`` as the projective slot, so coordinate ``i``
of ``z`` is homogeneous index ``i + 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BranchError, DomainError, ModelError
from .geo_verify import (
    FIRST,
    holomorphic_sectional_curvature,
    lie_bracket,
    lie_derivative_metric,
    nabla_moment_residual,
    riemann,
)
from .prepotential import CubicPrepotential, HomogeneousPrepotential, Monomial, Prepotential, QuadraticPrepotential
from .quotient import (
    QuotientChart,
    QuotientSpec,
    canonical_representative,
    fiber_quotient_metric,
    hermitian_to_real,
    make_quotient_spec,
    null_vector_sample,
    numerical_rank,
    point_on_N,
    solve_null_component,
)
from .special_kahler import base_geometry, in_domain, kahler_potential, lift

__all__ = [
    "ModelDescriptor",
    "FixedLocusResult",
    "Recipe",
    "H4Geometry",
    "CATALOG",
    "get_model",
    "list_models",
    "fixed_locus_analysis",
    "numeric_locus",
    "custom_model",
    "recipe",
    "sample_base_point",
    "quadratic_product_check",
    "quantum_stu_conformal_check",
    "h4_moment_check",
]


def _sym(m: int, entries) -> np.ndarray:
    d = np.zeros((m, m, m))
    for (i, j, k), v in entries:
        for p in set(itertools.permutations((i, j, k))):
            d[p] = v
    return d


# --- descriptors --------------------------------------------------------------


@dataclass(frozen=True)
class ModelDescriptor:
    """A catalog entry.

    ``expected`` holds the dimensions produced by the recommended recipe;
    ``claimed`` holds the closed-form counts stated for the family where
    they differ in form (e.g. a statement relative to ``dim M``).
    """

    name: str
    family: str
    params: dict
    spec: Prepotential | None
    coords: tuple
    proposal: tuple
    expected: dict
    claimed: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return 0 if self.spec is None else self.spec.n

    def summary(self) -> dict:
        return {
            "name": self.name,
            "family": self.family,
            "params": dict(self.params),
            "n": self.n,
            "coords": list(self.coords),
            "expected": dict(self.expected),
            **({"claimed": dict(self.claimed)} if self.claimed else {}),
        }


def _dims(n: int, r: int) -> dict:
    return {
        "n": n,
        "r": r,
        "dim_M": 4 * n,
        "dim_base_complex": n - 1 - r,
        "dim_Mprime_real": 4 * (n - 1) - 2 * r,
        "dim_Mprime_complex": 2 * (n - 1) - r,
    }


def _quadratic(n: int = 3) -> ModelDescriptor:
    if n < 2:
        raise ModelError("quadratic needs n >= 2")
    return ModelDescriptor(
        f"quadratic:n={n}",
        "quadratic",
        {"n": n},
        QuadraticPrepotential.standard(n),
        tuple(f"z{i}" for i in range(1, n)),
        ("disc",) * (n - 1),
        _dims(n, 0),
        {"dim_Mprime_real": 4 * (n - 1)},
    )


def _stu_d() -> np.ndarray:
    return _sym(3, [((0, 1, 2), 1.0)])


def _stu() -> ModelDescriptor:
    return ModelDescriptor(
        "stu", "stu", {}, CubicPrepotential(_stu_d()), ("S", "T", "U"), (1, 1, 1), _dims(4, 2), {"dim_Mprime_complex": 4}
    )


def _quantum_stu(T: complex = 0.2 + 0.5j) -> ModelDescriptor:
    T = complex(T)
    spec = CubicPrepotential(_stu_d(), extra=(Monomial(1.0 / 3.0, (0, 3, 0), -1),))
    return ModelDescriptor(
        f"quantum_stu:T={_fmt_c(T)}",
        "quantum_stu",
        {"T": T},
        spec,
        ("S", "T", "U"),
        (1, 1, 1),
        _dims(4, 2),
        {"dim_Mprime_complex": 4},
    )


def _st2(n: int = 6) -> ModelDescriptor:
    if n < 4:
        raise ModelError("st2 needs n >= 4")
    k = n - 4
    d = _sym(3 + k, [((0, 1, 2), 1.0)] + [((0, 3 + l, 3 + l), 2.0) for l in range(k)])
    return ModelDescriptor(
        f"st2:n={n}",
        "st2",
        {"n": n},
        CubicPrepotential(d),
        ("S", "T", "U") + tuple(f"y{l + 1}" for l in range(k)),
        (-1, 1, -1) + (0,) * k,
        _dims(n, 2),
        {"dim_base_complex": n - 3, "dim_Mprime_real": 4 * (n - 2)},
    )


def _t_series(p: int = 2) -> ModelDescriptor:
    if p < 1:
        raise ModelError("t_series needs p >= 1")
    d = _sym(2 + p, [((0, 0, 1), 2.0)] + [((0, 2 + l, 2 + l), -2.0) for l in range(p)])
    n = p + 3
    return ModelDescriptor(
        f"t_series:p={p}",
        "t_series",
        {"p": p},
        CubicPrepotential(d),
        ("S", "T") + tuple(f"x{l + 1}" for l in range(p)),
        (1, 1) + (0,) * p,
        _dims(n, 2),
        {"dim_Mprime_complex": 2 * n - 4},
    )


def _w(p: int = 1, q: int = 1) -> ModelDescriptor:
    if p < 1 or q < 1:
        raise ModelError("w needs p, q >= 1")
    m = 3 + p + q
    entries = [((0, 1, 2), 1.0)]
    entries += [((1, 3 + a, 3 + a), 2.0) for a in range(p)]
    entries += [((0, 3 + p + l, 3 + p + l), 2.0) for l in range(q)]
    n = p + q + 4
    return ModelDescriptor(
        f"w:p={p},q={q}",
        "w",
        {"p": p, "q": q},
        CubicPrepotential(_sym(m, entries)),
        ("S", "T", "U") + tuple(f"x{a + 1}" for a in range(p)) + tuple(f"y{l + 1}" for l in range(q)),
        (-1, -1, 1) + (0,) * (p + q),
        _dims(n, 4),
        {"dim_Mprime_real": 4 * n - 8},
    )


def _homogeneous(q: int = 1, r: int = 2) -> ModelDescriptor:
    spec = HomogeneousPrepotential(q, r)
    n = q + r + 4
    coords = ("h1", "h2") + tuple(f"hmu{a}" for a in range(q + 1)) + tuple(f"hl{l + 1}" for l in range(r))
    return ModelDescriptor(
        f"homogeneous:q={q},r={r}",
        "homogeneous",
        {"q": q, "r": r},
        spec,
        coords,
        (1, 1) + (0,) * (q + 1 + r),
        _dims(n, 2 * q + 2),
        {"dim_Mprime_complex": 2 * r + 4},
    )


def _h4() -> ModelDescriptor:
    return ModelDescriptor("h4", "h4", {}, None, ("x0", "x1", "x2", "x3"), (), {"dim_M": 4, "dim_Mprime_real": 2})


def custom_model(d: np.ndarray, proposal=None, name: str = "custom") -> ModelDescriptor:
    """Descriptor for an inline cubic prepotential ``d_ijk z^i z^j z^k / (6 z^0)``.

    The recipe for such a model draws a generic null vector and analyses the
    locus numerically.
    """
    spec = CubicPrepotential(np.asarray(d, dtype=float))
    m = spec.n - 1
    proposal = tuple(proposal) if proposal is not None else (1,) * m
    if len(proposal) != m:
        raise ModelError(f"proposal needs {m} entries")
    return ModelDescriptor(name, "custom", {}, spec, tuple(f"z{i + 1}" for i in range(m)), proposal, {})


CATALOG: dict[str, Callable[..., ModelDescriptor]] = {
    "quadratic": _quadratic,
    "stu": _stu,
    "quantum_stu": _quantum_stu,
    "st2": _st2,
    "t_series": _t_series,
    "w": _w,
    "homogeneous": _homogeneous,
    "h4": _h4,
}

_DEFAULTS = ["quadratic:n=3", "stu", "quantum_stu", "st2:n=6", "t_series:p=2", "w:p=1,q=2", "homogeneous:q=1,r=2", "h4"]


def _fmt_c(z: complex) -> str:
    return f"{z.real:g}{z.imag:+g}j"


def _parse_value(v: str):
    v = v.strip()
    for cast in (int, float, complex):
        try:
            return cast(v)
        except ValueError:
            continue
    raise ModelError(f"cannot parse model parameter {v!r}")


def get_model(ident: str) -> ModelDescriptor:
    """Look up ``family`` or ``family:key=value,...``."""
    family, _, rest = ident.strip().partition(":")
    if family not in CATALOG:
        raise ModelError(f"unknown model {family!r}; known: {sorted(CATALOG)}")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, eq, val = item.partition("=")
            if not eq:
                raise ModelError(f"malformed model parameter {item!r}")
            kwargs[key.strip()] = _parse_value(val)
    try:
        return CATALOG[family](**kwargs)
    except TypeError as exc:
        raise ModelError(f"bad parameters for {family}: {exc}") from exc


def list_models() -> list[ModelDescriptor]:
    return [get_model(i) for i in _DEFAULTS]


# --- base point sampling ------------------------------------------------------


def sample_base_point(model: ModelDescriptor, rng: np.random.Generator, fixed: dict | None = None, tries: int = 2000):
    """Rejection sampling in the model's proposal box.

    Box: for a sign ``s`` in ``proposal``, ``Re z`` uniform in ``[-1, 1]`` and
    ``Im z`` uniform in ``s [0.5, 2]``; ``0`` means both parts in ``[-0.3, 0.3]``;
    ``"disc"`` means both parts in ``[-0.3, 0.3]`` (quadratic ball).
    ``fixed`` pins selected coordinates by index.
    """
    fixed = fixed or {}
    m = len(model.coords)
    for _ in range(tries):
        z = np.empty(m, dtype=complex)
        for i, s in enumerate(model.proposal):
            if s in ("disc", 0):
                z[i] = rng.uniform(-0.3, 0.3) + 1j * rng.uniform(-0.3, 0.3)
            else:
                z[i] = rng.uniform(-1, 1) + 1j * s * rng.uniform(0.5, 2.0)
        for i, v in fixed.items():
            z[i] = v
        if in_domain(model.spec, z):
            return z
    raise DomainError(f"no domain point found for {model.name}")


# --- fixed-locus analyses -----------------------------------------------------


@dataclass
class FixedLocusResult:
    """Outcome of the case analysis for one model and null vector ``D``.

    ``zmap`` parameterises the base locus holomorphically by ``t`` with
    ``zmap(t0) = z0``; it is ``None`` when no closed form is used.
    """

    model: str
    fixed: dict
    free: tuple
    quadratic_constraints: int
    dim_base_complex: int
    dim_Mprime_complex: int
    C: np.ndarray
    z0: np.ndarray
    t0: np.ndarray | None
    zmap: Callable | None = field(default=None, repr=False)
    membership_residual: float = float("nan")
    grid_points: int = 0
    notes: str = ""
    project: Callable | None = field(default=None, repr=False)

    @property
    def dim_Mprime_real(self) -> int:
        return 2 * self.dim_Mprime_complex

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "fixed": {k: [complex(v).real, complex(v).imag] for k, v in self.fixed.items()},
            "free": list(self.free),
            "quadratic_constraints": self.quadratic_constraints,
            "dim_base_complex": self.dim_base_complex,
            "dim_Mprime_complex": self.dim_Mprime_complex,
            "dim_Mprime_real": self.dim_Mprime_real,
            "membership_residual": self.membership_residual,
            "grid_points": self.grid_points,
            **({"notes": self.notes} if self.notes else {}),
        }


def _need_d0(D):
    if abs(D[0]) < 1e-12:
        raise BranchError("this branch requires D^0 != 0")


def _check_fixed(z0, idx_vals: dict, what: str):
    for i, v in idx_vals.items():
        if abs(z0[i] - v) > 1e-9 * max(1.0, abs(v)):
            raise BranchError(f"{what}: coordinate {i} must equal {v}, got {z0[i]}")


def _continued_sqrt(root0: complex) -> Callable:
    """Square root continued holomorphically from ``root0`` at ``root0**2``.

    The branch cut sits on the ray opposite to ``root0**2``, well away from a
    neighbourhood of the base point.
    """
    root0 = complex(root0)
    if abs(root0) < 1e-12:
        raise BranchError("base point sits on a branch point of the locus")
    rad0 = root0 * root0
    return lambda rad: root0 * np.sqrt(rad / rad0 + 0j)


def _grid(t0: np.ndarray, rng: np.random.Generator, count: int, scale: float = 0.05) -> list:
    pts = [t0]
    for _ in range(count - 1):
        pts.append(t0 + scale * (rng.normal(size=t0.shape) + 1j * rng.normal(size=t0.shape)))
    return pts


def _membership_on(spec: Prepotential, D, C, zs) -> float:
    worst = 0.0
    for z in zs:
        FAB = spec.jet(lift(z)).F_AB
        worst = max(worst, float(np.max(np.abs(D @ FAB - C))) / max(1.0, float(np.max(np.abs(C)))))
    return worst


def numeric_locus(model: ModelDescriptor, D, z0, grid: int = 9, rng=None) -> FixedLocusResult:
    """The component through ``z0`` of ``D F(1, z) = C``, found numerically.

    The codimension is the rank of ``D.F_ABC`` on the ``z`` directions;
    coordinates untouched by the kernel are reported as fixed.  The result
    carries a Newton projector onto the locus instead of a parameterisation.
    """
    spec = model.spec
    D = np.asarray(D, dtype=complex)
    z0 = np.asarray(z0, dtype=complex)
    m = z0.shape[0]
    rng = np.random.default_rng(0) if rng is None else rng
    C = D @ spec.jet(lift(z0)).F_AB

    def resid(z):
        return D @ spec.jet(lift(z)).F_AB - C

    def jac(z):
        # d/dz^i of D^A F_AB(1, z) is G_{B i} with G = D.F_ABC
        return np.einsum("a,abc->bc", D, spec.jet(lift(z)).F_ABC)[:, 1:]

    _, sv, vh = np.linalg.svd(jac(z0))
    codim = int(np.sum(sv > 1e-8 * max(1.0, sv[0])))
    kern = vh[codim:]
    still = [i for i in range(m) if np.all(np.abs(kern[:, i]) < 1e-10)]
    base = m - codim
    res = FixedLocusResult(
        model.name,
        {model.coords[i]: z0[i] for i in still},
        tuple(model.coords[i] for i in range(m) if i not in still),
        codim,
        base,
        base + m,
        C,
        z0,
        None,
        None,
    )

    def project(z):
        z = np.array(z, dtype=complex)
        for _ in range(60):
            f = resid(z)
            if np.max(np.abs(f)) < 1e-14 * max(1.0, np.abs(C).max()):
                break
            z -= np.linalg.lstsq(jac(z), f, rcond=None)[0]
        return z

    res.project = project
    pts = [project(z0 + 0.02 * (rng.normal(size=m) + 1j * rng.normal(size=m))) for _ in range(grid)]
    res.membership_residual = _membership_on(spec, D, C, pts)
    res.grid_points = grid
    return res


def fixed_locus_analysis(model: ModelDescriptor, D, z0=None, grid: int = 9, seed: int = 0) -> FixedLocusResult:
    """Case analysis of ``D F(Z) = C`` for a catalog model.

    ``D`` fixes the branch (for cubic families ``D^0 != 0``).  ``z0`` is the
    base point through which the locus passes; it must be consistent with the
    branch.  ``C`` is assembled from the closed-form expressions of the case
    analysis and then checked against ``D F(Z)`` on a grid of the free
    directions (``membership_residual``).
    """
    if model.spec is None:
        raise BranchError("model has no prepotential")
    spec = model.spec
    D = np.asarray(D, dtype=complex)
    n = spec.n
    if D.shape != (n,):
        raise BranchError(f"D must have {n} components")
    rng = np.random.default_rng(seed)
    fam = model.family
    z0 = None if z0 is None else np.asarray(z0, dtype=complex)

    if fam == "quadratic":
        z0 = np.zeros(n - 1, dtype=complex) if z0 is None else z0
        C = D @ spec.jet(lift(z0)).F_AB
        res = FixedLocusResult(model.name, {}, model.coords, 0, n - 1, 2 * (n - 1), C, z0, z0.copy(), lambda t: np.asarray(t, complex))

    elif fam in ("stu", "quantum_stu"):
        _need_d0(D)
        S, T = D[1] / D[0], D[2] / D[0]
        if fam == "quantum_stu" and abs(T - model.params["T"]) > 1e-12 * max(1, abs(T)):
            raise BranchError("quantum_stu branch requires D^T / D^0 = <T>")
        if z0 is None:
            z0 = None
            for U in [x + 1j * y for y in np.linspace(0.25, 4, 16) for x in np.linspace(-2, 2, 9)] + [
                x - 1j * y for y in np.linspace(0.25, 4, 16) for x in np.linspace(-2, 2, 9)
            ]:
                if in_domain(spec, [S, T, U]):
                    z0 = np.array([S, T, U])
                    break
            if z0 is None:
                raise BranchError("(1, <S>, <T>, U) is not time-like for any sampled U")
        _check_fixed(z0, {0: S, 1: T}, fam)
        DU = D[3]
        C = np.array([-DU * S * T, DU * T, DU * S, D[0] * S * T])
        if fam == "quantum_stu":
            C[0] -= D[2] * T**2 / 3.0
            C[2] += D[2] * T
        res = FixedLocusResult(
            model.name, {"S": S, "T": T}, ("U",), 0, 1, 4, C, z0, z0[2:3].copy(), lambda t: np.array([S, T, np.atleast_1d(t)[0]])
        )

    elif fam == "st2":
        _need_d0(D)
        k = n - 4
        D0, DS, DT, DU, Dy = D[0], D[1], D[2], D[3], D[4:]
        S = DS / D0

        def Tof(U, y):
            return DT / D0 - (D0 * y - 2 * Dy) @ y / (D0 * U - DU)

        if z0 is None:
            raise BranchError("st2 needs a base point z0")
        U0, y0 = z0[2], z0[3:]
        if abs(D0 * U0 - DU) < 1e-10:
            raise BranchError("st2 branch requires D^0 U - D^U != 0")
        _check_fixed(z0, {0: S, 1: Tof(U0, y0)}, "st2")
        C = np.zeros(n, dtype=complex)
        C[0] = -DT * DU / D0 * S
        C[1] = DT * DU / D0
        C[2] = DU * S
        C[3] = S * DT
        C[4:] = 2 * S * Dy

        def zmap(t):
            t = np.atleast_1d(np.asarray(t, complex))
            return np.concatenate([[S, Tof(t[0], t[1:]), t[0]], t[1:]])

        res = FixedLocusResult(
            model.name, {"S": S}, ("U",) + model.coords[3:], 1, n - 3, 2 * n - 4 - 0 * k, C, z0, np.concatenate([[U0], y0]), zmap
        )
        res.dim_Mprime_complex = (n - 3) + (n - 1)
        res.notes = "T is solved from the quadratic constraint"

    elif fam == "t_series":
        _need_d0(D)
        p = model.params["p"]
        D0, DS, DT, Dx = D[0], D[1], D[2], D[3:]
        S = DS / D0
        if z0 is None:
            raise BranchError("t_series needs a base point z0")
        _check_fixed(z0, {0: S}, "t_series")
        T0, x0 = z0[1], z0[2:]
        v0 = D0 * x0 - Dx
        kappa = v0 @ v0
        root = _continued_sqrt(v0[0])
        # closed-form C from the case analysis, evaluated at z0
        C = np.zeros(n, dtype=complex)
        a, b = D0 * S - DS, D0 * S - 2 * DS
        C[0] = 2 * a * S * T0 - DT * S**2 - S * (D0 * x0 - 2 * Dx) @ x0 - a * x0 @ x0
        C[1] = -b * T0 - (D0 * T0 - 2 * DT) * S + (D0 * x0 - 2 * Dx) @ x0
        C[2] = -b * S
        C[3:] = b * x0 + (D0 * x0 - 2 * Dx) * S

        def zmap(t):
            t = np.atleast_1d(np.asarray(t, complex))
            rest = t[1:]
            v_rest = D0 * rest - Dx[1:]
            v1 = root(kappa - v_rest @ v_rest)
            x = np.concatenate([[(v1 + Dx[0]) / D0], rest])
            return np.concatenate([[S, t[0]], x])

        res = FixedLocusResult(
            model.name,
            {"S": S},
            ("T",) + model.coords[3:],
            1,
            p,
            p + (n - 1),
            C,
            z0,
            np.concatenate([[T0], x0[1:]]),
            zmap,
            notes="x1 is solved from the quadratic constraint",
        )

    elif fam == "w":
        _need_d0(D)
        p, q = model.params["p"], model.params["q"]
        D0, DS, DT, DU = D[0], D[1], D[2], D[3]
        Dx, Dy = D[4 : 4 + p], D[4 + p :]
        S, T = DS / D0, DT / D0
        if z0 is None:
            raise BranchError("w needs a base point z0")
        _check_fixed(z0, {0: S, 1: T}, "w")
        U0, x0, y0 = z0[2], z0[3 : 3 + p], z0[3 + p :]
        vx, vy = D0 * x0 - Dx, D0 * y0 - Dy
        kx, ky = vx @ vx, vy @ vy
        rootx, rooty = _continued_sqrt(vx[0]), _continued_sqrt(vy[0])
        # case-analysis expressions (multiplied through by D^0), evaluated at z0
        C = np.zeros(n, dtype=complex)
        aS, aT, aU = D0 * S - DS, D0 * T - DT, D0 * U0 - DU
        C[0] = (
            D0 * aS * T * U0 + D0 * S * aT * U0 - D0 * DU * S * T - S * Dy @ Dy
            + D0 * aS * y0 @ y0 + S * vy @ vy + D0 * aT * x0 @ x0 + T * vx @ vx - T * Dx @ Dx
        )
        C[1] = Dy @ Dy + DT * DU - aT * aU - vy @ vy
        C[2] = Dx @ Dx + DS * DU - aS * aU - vx @ vx
        C[3] = -aS * aT + DS * DT
        C[4 : 4 + p] = -2 * aT * vx + 2 * DT * Dx
        C[4 + p :] = -2 * aS * vy + 2 * DS * Dy
        C = C / D0

        def zmap(t):
            t = np.atleast_1d(np.asarray(t, complex))
            U, xr, yr = t[0], t[1:p], t[p:]
            wx = D0 * xr - Dx[1:]
            wy = D0 * yr - Dy[1:]
            x1 = (rootx(kx - wx @ wx) + Dx[0]) / D0
            y1 = (rooty(ky - wy @ wy) + Dy[0]) / D0
            return np.concatenate([[S, T, U, x1], xr, [y1], yr])

        res = FixedLocusResult(
            model.name,
            {"S": S, "T": T},
            ("U",) + model.coords[4 : 3 + p] + model.coords[4 + p :],
            2,
            p + q - 1,
            (p + q - 1) + (n - 1),
            C,
            z0,
            np.concatenate([[U0], x0[1:], y0[1:]]),
            zmap,
            notes="x1 and y1 are solved from the two quadratic constraints",
        )

    elif fam == "homogeneous":
        _need_d0(D)
        if z0 is None:
            raise BranchError("homogeneous needs a base point z0")
        q = model.params["q"]
        res = numeric_locus(model, D, z0, grid, rng)
        res.notes = f"{res.quadratic_constraints} fixed complex directions; {q + 2} quadratic relations among the h_l"
        return res

    elif fam == "custom":
        if z0 is None:
            raise BranchError("custom models need a base point z0")
        return numeric_locus(model, D, z0, grid, rng)

    else:
        raise BranchError(f"no fixed-locus analysis for {fam}")

    zs = [res.zmap(t) for t in _grid(np.atleast_1d(res.t0), rng, grid)]
    res.membership_residual = _membership_on(spec, D, res.C, zs)
    res.grid_points = grid
    return res


# --- recipes ------------------------------------------------------------------


@dataclass
class Recipe:
    """Recommended quotient data for a model: base point, null vector, locus."""

    model: ModelDescriptor
    z0: np.ndarray
    D: np.ndarray
    Ct: complex
    locus: FixedLocusResult
    qspec: QuotientSpec

    @property
    def spec(self) -> Prepotential:
        return self.model.spec

    def chart(self) -> QuotientChart:
        if self.locus.zmap is None:
            raise BranchError(f"{self.model.name} has no closed-form base parameterisation")
        return QuotientChart(self.spec, self.qspec, self.locus.zmap, self.locus.t0)

    def sample_t(self, rng: np.random.Generator, scale: float = 0.05, tries: int = 200) -> np.ndarray:
        """A nearby base parameter whose image lies in the domain."""
        t0 = np.atleast_1d(self.locus.t0)
        for _ in range(tries):
            t = t0 + scale * (rng.normal(size=t0.shape) + 1j * rng.normal(size=t0.shape))
            if in_domain(self.spec, self.locus.zmap(t)):
                return t
        raise DomainError("no nearby base point in the domain")

    def sample_N(self, rng: np.random.Generator, t=None):
        """A point of ``N`` over ``zmap(t)`` with random fiber data."""
        z = self.z0 if t is None else self.locus.zmap(t)
        n = self.spec.n
        return point_on_N(
            self.spec, self.qspec, z, rng.uniform(-0.5, 0.5), rng.normal(), rng.normal(size=n), rng.normal(size=n)
        )


def _random_c(rng, size=None):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def recipe(model: ModelDescriptor | str, seed: int = 0, rank_samples: int = 20) -> Recipe:
    """Base point, null vector and locus following the model's branch.

    The branch constraints (fixed coordinates equal ``D^i / D^0``) are imposed
    first; one unconstrained component of ``D`` is then adjusted so that
    ``D`` is null at the base point.
    """
    if isinstance(model, str):
        model = get_model(model)
    if model.spec is None:
        raise BranchError("h4 has no quotient recipe; use h4_moment_check")
    spec, n, fam = model.spec, model.spec.n, model.family
    rng = np.random.default_rng(seed)
    for _ in range(200):
        try:
            if fam == "quadratic":
                z0 = sample_base_point(model, rng)
                D = null_vector_sample(spec, lift(z0), seed=seed, phase=True)
            elif fam in ("stu", "quantum_stu"):
                fixed = {1: model.params["T"]} if fam == "quantum_stu" else {}
                z0 = sample_base_point(model, rng, fixed)
                D = np.array([1.0, z0[0], z0[1], _random_c(rng)], dtype=complex)
                D = solve_null_component(spec, lift(z0), D, 3)
            elif fam == "st2":
                k = n - 4
                z0 = sample_base_point(model, rng, {3 + l: 0.0 for l in range(k)})
                D = np.concatenate([[1.0, z0[0], z0[1], _random_c(rng)], 0.3 * _random_c(rng, k)])
                D = solve_null_component(spec, lift(z0), D, 3)
            elif fam == "t_series":
                z0 = sample_base_point(model, rng)
                D = np.concatenate([[1.0, z0[0], _random_c(rng)], 0.3 * _random_c(rng, n - 3)])
                D = solve_null_component(spec, lift(z0), D, 2)
            elif fam == "w":
                z0 = sample_base_point(model, rng)
                D = np.concatenate([[1.0, z0[0], z0[1], _random_c(rng)], 0.3 * _random_c(rng, n - 4)])
                D = solve_null_component(spec, lift(z0), D, 3)
            elif fam == "custom":
                z0 = sample_base_point(model, rng)
                D = null_vector_sample(spec, lift(z0), seed=seed, phase=True)
            elif fam == "homogeneous":
                q = model.params["q"]
                z0 = sample_base_point(model, rng)
                D = np.concatenate([[1.0, _random_c(rng)], z0[1 : 3 + q], 0.3 * _random_c(rng, n - 4 - q)])
                D = solve_null_component(spec, lift(z0), D, 1)
            else:
                raise BranchError(f"no recipe for {fam}")
        except Exception as exc:  # retry on degenerate draws
            if isinstance(exc, (BranchError, ModelError)):
                raise
            continue
        locus = fixed_locus_analysis(model, D, z0, seed=seed)
        Ct = complex(0.2 * rng.normal() + 0.2j * rng.normal())
        sampler = None
        if locus.zmap is not None:
            t0 = np.atleast_1d(locus.t0)

            def sampler(r, zmap=locus.zmap, t0=t0):
                return lift(zmap(t0 + 1e-2 * (r.normal(size=t0.shape) + 1j * r.normal(size=t0.shape))))

        elif locus.project is not None:

            def sampler(r, proj=locus.project, z0=z0):
                return lift(proj(z0 + 1e-2 * (r.normal(size=z0.shape) + 1j * r.normal(size=z0.shape))))

        qspec = make_quotient_spec(spec, lift(z0), D, Ct, rank_samples=rank_samples, seed=seed, locus=sampler)
        return Recipe(model, z0, D, Ct, locus, qspec)
    raise DomainError(f"could not build a recipe for {model.name}")


# --- model checks -------------------------------------------------------------


def _standard_J(k: int) -> np.ndarray:
    J = np.zeros((2 * k, 2 * k))
    J[:k, k:] = -np.eye(k)
    J[k:, :k] = np.eye(k)
    return J


def quadratic_product_check(rec: Recipe, samples: int = 4, seed: int = 0) -> dict:
    """Product structure of ``M'`` for a quadratic prepotential.

    In the chart ``(t, x)`` returns the maximal cross-block entry, the spread
    of the fiber block over base points, the deviation of the base block from
    the special Kaehler metric and holomorphic sectional curvatures of both
    factors.
    """
    if rec.model.family != "quadratic":
        raise BranchError("quadratic_product_check needs a quadratic model")
    rng = np.random.default_rng(seed)
    QC = rec.chart()
    kt = QC.kt
    p = rec.sample_N(rng)
    _, _, chart, x = canonical_representative(rec.spec, rec.qspec, p)
    cross = fiber_spread = base_dev = 0.0
    ref = None
    for _ in range(samples):
        t = rec.sample_t(rng, scale=0.1)
        h = QC.metric(QC.join(t, x))
        cross = max(cross, float(np.abs(h[: 2 * kt, 2 * kt :]).max()))
        fib = h[2 * kt :, 2 * kt :]
        ref = fib if ref is None else ref
        fiber_spread = max(fiber_spread, float(np.abs(fib - ref).max()))
        g = hermitian_to_real(base_geometry(rec.spec, rec.locus.zmap(t)).g)
        base_dev = max(base_dev, float(np.abs(h[: 2 * kt, : 2 * kt] - g).max()))
    k = QC.kx

    def hf(y):
        return hermitian_to_real(fiber_quotient_metric(rec.spec, rec.qspec, QC.chart.z, y[:k] + 1j * y[k:], QC.chart))

    y = np.concatenate([x.real, x.imag])
    cs = riemann(hf, y)
    Jf = _standard_J(k)
    Hf = [holomorphic_sectional_curvature(cs, Jf, rng.normal(size=2 * k)) for _ in range(samples)]
    t = np.atleast_1d(rec.locus.t0)

    def gb(u):
        return hermitian_to_real(base_geometry(rec.spec, u[:kt] + 1j * u[kt:]).g)

    csb = riemann(gb, np.concatenate([t.real, t.imag]))
    Jb = _standard_J(kt)
    Hb = [holomorphic_sectional_curvature(csb, Jb, rng.normal(size=2 * kt)) for _ in range(samples)]
    return {
        "cross_block": cross,
        "fiber_spread": fiber_spread,
        "base_deviation": base_dev,
        "fiber_holomorphic_sectional": Hf,
        "base_holomorphic_sectional": Hb,
        "fd_error": float(max(cs.error, csb.error)),
    }


def quantum_stu_conformal_check(T: complex, samples: int = 5, seed: int = 0) -> dict:
    """Compare base metrics of the quantum and plain STU models on ``S, T`` fixed.

    For ``Im <T> != 0`` both metrics are evaluated along ``U`` at matched
    points and the ratio is compared with ``(e^{-K0} / (e^{-K0} + c))^2``,
    ``c = (8/3) (Im <T>)^3``.  For real ``<T>`` the slice lies on the boundary
    ``e^{-K} = 0`` of the domain, so only the vanishing of the correction to
    ``N`` and ``e^{-K}`` is tested.
    """
    T = complex(T)
    plain = _stu()
    quant = _quantum_stu(T)
    rng = np.random.default_rng(seed)
    c = 8.0 / 3.0 * T.imag**3
    out = {"T": [T.real, T.imag], "c": c}
    if T.imag == 0:
        worst = 0.0
        for _ in range(samples):
            S = rng.uniform(-1, 1) + 1j * rng.uniform(0.5, 2)
            U = rng.uniform(-1, 1) + 1j * rng.uniform(0.5, 2)
            Z = lift([S, T, U])
            N0, N1 = plain.spec.jet(Z).F_AB.imag, quant.spec.jet(Z).F_AB.imag
            y0 = np.real(Z @ N0 @ Z.conj())
            y1 = np.real(Z @ N1 @ Z.conj())
            worst = max(worst, float(np.abs(N1 - N0).max()), abs(y1 - y0))
        out.update({"mode": "real", "ratio_deviation": worst, "anisotropy": 0.0})
        return out
    S = None
    for _ in range(2000):
        S = rng.uniform(-1, 1) + 1j * rng.uniform(0.5, 2)
        U = rng.uniform(-1, 1) + 1j * rng.uniform(0.5, 2)
        if in_domain(quant.spec, [S, T, U]) and in_domain(plain.spec, [S, T, U]):
            break
    else:
        raise DomainError("no common domain point")
    dev = aniso = 0.0
    ratios = []
    done = 0
    while done < samples:
        U = rng.uniform(-1, 1) + 1j * rng.uniform(0.5, 2)
        z = np.array([S, T, U])
        if not (in_domain(quant.spec, z) and in_domain(plain.spec, z)):
            continue
        g0 = hermitian_to_real(base_geometry(plain.spec, z).g[2:, 2:])
        g1 = hermitian_to_real(base_geometry(quant.spec, z).g[2:, 2:])
        R = g1 @ np.linalg.inv(g0)
        rho = float(np.trace(R) / 2)
        aniso = max(aniso, float(np.abs(R - rho * np.eye(2)).max()))
        eK0 = np.exp(-kahler_potential(plain.spec, z))
        target = (eK0 / (eK0 + c)) ** 2
        dev = max(dev, abs(rho - target) / target)
        ratios.append(rho)
        done += 1
    out.update({"mode": "complex", "ratio_deviation": dev, "anisotropy": aniso, "ratios": ratios})
    return out


# --- real hyperbolic 4-space ----------------------------------------------------


_EPS = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _EPS[_a, _b, _c], _EPS[_b, _a, _c] = 1.0, -1.0


class H4Geometry:
    """``H^4`` as the group ``L = R x| R^3`` with ``ad_{X0}|_n = Id``.

    Chart ``p = exp(sum x^a X_a) exp(x^0 X_0)``, i.e. the affine map
    ``u -> e^{x^0} u + x`` of ``R^3``.  Left-invariant frame ``X_0 = d_0``,
    ``X_a = e^{x^0} d_a``; right-invariant fields ``k_0 = d_0 + x^a d_a``,
    ``k_a = d_a = e^{-x^0} X_a``.
    """

    dim = 4

    @staticmethod
    def frame(x) -> np.ndarray:
        E = np.eye(4)
        E[1:, 1:] *= np.exp(x[0])
        return E

    def metric(self, x) -> np.ndarray:
        Ei = np.linalg.inv(self.frame(x))
        return Ei.T @ Ei

    @staticmethod
    def frame_J() -> np.ndarray:
        """``J_a X_0 = X_a``, ``J_a X_b = -delta_ab X_0 + eps_abc X_c``."""
        Js = np.zeros((3, 4, 4))
        for a in range(3):
            Js[a, 1 + a, 0] = 1.0
            Js[a, 0, 1 + a] = -1.0
            for b in range(3):
                for c in range(3):
                    Js[a, 1 + c, 1 + b] = _EPS[a, b, c]
        return Js

    def J(self, x) -> np.ndarray:
        E = self.frame(x)
        return np.einsum("ij,ajk,kl->ail", E, self.frame_J(), np.linalg.inv(E))

    def omega(self, x) -> np.ndarray:
        """``omega_a = -X_a^*`` as rows over ``dx``."""
        Ei = np.linalg.inv(self.frame(x))
        return -Ei[1:, :]

    @staticmethod
    def killing(x) -> dict:
        x = np.asarray(x, dtype=float)
        k0 = np.array([1.0, x[1], x[2], x[3]])
        out = {"k0": k0}
        for a in range(3):
            e = np.zeros(4)
            e[1 + a] = 1.0
            out[f"k{a + 1}"] = e
        return out

    def moment(self, x, k) -> np.ndarray:
        return 0.5 * self.omega(x) @ np.asarray(k, dtype=float)


def h4_moment_check(x) -> dict:
    """Moment maps of the translations of ``H^4`` and the quotient hypotheses for ``k_1, k_2``."""
    H = H4Geometry()
    x = np.asarray(x, dtype=float)
    g, J = H.metric(x), H.J(x)
    kf = H.killing(x)
    quat = max(
        float(np.abs(J[0] @ J[1] - J[2]).max()),
        max(float(np.abs(Ja @ Ja + np.eye(4)).max()) for Ja in J),
        max(float(np.abs(g @ Ja + (g @ Ja).T).max()) for Ja in J),
    )
    C = np.array([H.moment(x, kf[f"k{a}"]) for a in (1, 2, 3)])  # C[a, b]: coefficient of J_b in P_a
    target = -0.5 * np.exp(-x[0]) * np.eye(3)
    P = [np.einsum("b,bij->ij", C[a], J) for a in range(3)]
    k1, k2 = kf["k1"], kf["k2"]
    f = 0.25 * np.exp(-2 * x[0])
    ff = float(-np.trace(P[0] @ P[1] @ J[2]) / 4)
    return {
        "point": x.tolist(),
        "quaternion_residual": quat,
        "pattern_residual": float(np.abs(C - target).max()),
        "f": ff,
        "P1P2k1_minus_fk2": float(np.abs(P[0] @ P[1] @ k1 - ff * k2).max()),
        "4f_minus_k1sq": abs(4 * ff - k1 @ g @ k1),
        "k1sq_minus_exp": abs(k1 @ g @ k1 - np.exp(-2 * x[0])),
        "k2sq_minus_exp": abs(k2 @ g @ k2 - np.exp(-2 * x[0])),
        "f_expected": f,
        "bracket_k1_k2": float(np.abs(lie_bracket(lambda y: H.killing(y)["k1"], lambda y: H.killing(y)["k2"], x).value).max()),
        "killing_residual": max(
            float(np.abs(lie_derivative_metric(H.metric, lambda y, nm=nm: H.killing(y)[nm], x).value).max()) for nm in kf
        ),
        "nabla_P_residual": max(
            float(
                nabla_moment_residual(
                    H.metric, H.J, lambda y, nm=nm: H.moment(y, H.killing(y)[nm]), lambda y, nm=nm: H.killing(y)[nm], -1.0, x, FIRST
                ).value
            )
            for nm in kf
        ),
        "chart": "p = exp(sum x^a X_a) exp(x^0 X_0)",
    }
