"""Projective special Kaehler geometry of the base.

Conventions
-----------
* Lift ``Z = (1, z)``; the projective slot is index 0.
* ``Y = Z^A N_AB conj(Z^B)`` so that ``K = -ln(2Y)``.
* ``g`` is the Hermitian matrix with ``|X|^2 = v^H g v`` for ``v = dz(X)``,
  i.e. ``g[a, b] = d^2 K / (d conj(z^a) d z^b)``.
* ``e`` is upper triangular with positive diagonal and ``e^H e = g``; row ``b``
  of ``e`` holds the one-form ``e^b = sum_a e[b, a] dz^a``.
* ``Pi[A, b]`` is the projection ``T M_ask -> T M_sk``: ``Pi[a, b] = e[b, a]``
  for ``a >= 1`` and ``Pi[0, b] = -sum_a z^a e[b, a]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .prepotential import Jet3, Prepotential, n_matrix

__all__ = [
    "BaseGeometry",
    "lift",
    "kahler_potential",
    "base_geometry",
    "pi_identity_residuals",
    "in_domain",
]


def lift(z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.concatenate([[1.0 + 0j], z])


@dataclass(frozen=True)
class BaseGeometry:
    z: np.ndarray
    Z: np.ndarray
    jet: Jet3
    N: np.ndarray
    Ninv: np.ndarray
    Y: float
    K: float
    g: np.ndarray
    e: np.ndarray
    Pi: np.ndarray

    @property
    def NZbar(self) -> np.ndarray:
        return self.N @ self.Z.conj()


def _zn(spec: Prepotential, z):
    Z = lift(z)
    if Z.shape[0] != spec.n:
        raise ValueError(f"z must have {spec.n - 1} components")
    jet = spec.jet(Z)
    N = n_matrix(jet)
    Y = float(np.real(Z @ N @ Z.conj()))
    return Z, jet, N, Y


def kahler_potential(spec: Prepotential, z) -> float:
    """``K = -ln(2 Z N conj(Z))`` at ``Z = (1, z)``."""
    _, _, _, Y = _zn(spec, z)
    if not Y > 0:
        raise DomainError(f"2 Z N Zbar = {2 * Y:.3e} <= 0")
    return float(-np.log(2 * Y))


def base_geometry(spec: Prepotential, z) -> BaseGeometry:
    """Kaehler potential, metric, vielbein and projector at ``z``.

    Raises
    ------
    DomainError
        If ``Z N Zbar <= 0`` or the metric is not positive definite.
    """
    Z, jet, N, Y = _zn(spec, z)
    if not Y > 0:
        raise DomainError(f"2 Z N Zbar = {2 * Y:.3e} <= 0")
    z = Z[1:]
    NZb = N @ Z.conj()
    # d_a d_bbar K = -N_ab / Y + (N Zbar)_a (N Z)_b / Y^2 ; g is its conjugate
    G = -N[1:, 1:] / Y + np.outer(NZb[1:], NZb[1:].conj()) / Y**2
    g = G.conj()
    g = 0.5 * (g + g.conj().T)
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DomainError("special Kaehler metric is not positive definite") from exc
    e = L.conj().T
    m = spec.n - 1
    Pi = np.empty((spec.n, m), dtype=complex)
    Pi[1:, :] = e.T
    Pi[0, :] = -(e @ z)
    return BaseGeometry(z, Z, jet, N, np.linalg.inv(N), Y, float(-np.log(2 * Y)), g, e, Pi)


def in_domain(spec: Prepotential, z) -> bool:
    try:
        base_geometry(spec, z)
    except (DomainError, np.linalg.LinAlgError):
        return False
    return True


def pi_identity_residuals(bg: BaseGeometry) -> tuple[float, float]:
    """Residuals of the two projector identities relating ``N``, ``Pi`` and ``Z``.

    First: ``N/Y = -Pi Pi^H + (N Zbar)(N Z)^T / Y^2``.
    Second: ``1 = -Y Pi Pi^H N^{-1} + (N Zbar) Z^T / Y``.
    """
    Y, N, Z = bg.Y, bg.N, bg.Z
    PP = bg.Pi @ bg.Pi.conj().T
    NZb = N @ Z.conj()
    lhs1 = N / Y
    rhs1 = -PP + np.outer(NZb, NZb.conj()) / Y**2
    r1 = np.max(np.abs(lhs1 - rhs1)) / max(np.max(np.abs(lhs1)), 1.0)
    rhs2 = -Y * PP @ bg.Ninv + np.outer(NZb, Z) / Y
    r2 = np.max(np.abs(np.eye(len(Z)) - rhs2))
    return float(r1), float(r2)
