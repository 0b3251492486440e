"""Shared fixtures and independent oracles for the test-suite."""

import itertools

import numpy as np

from cmapquot.cmap import ChartPoint
from cmapquot.prepotential import CubicPrepotential, QuadraticPrepotential
from cmapquot.special_kahler import in_domain


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def line(k: int, ok: bool, msg: str) -> str:
    return f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {msg}"


def sym3(m, entries):
    d = np.zeros((m, m, m))
    for idx, v in entries:
        for p in set(itertools.permutations(idx)):
            d[p] = v
    return d


def stu():
    return CubicPrepotential(sym3(3, [((0, 1, 2), 1.0)]))


def quad(n=3):
    return QuadraticPrepotential.standard(n)


def random_base(spec, rng, upper=True):
    m = spec.n - 1
    for _ in range(1000):
        if spec.kind == "quadratic":
            z = 0.3 * (rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m))
        else:
            z = rng.uniform(-1, 1, m) + 1j * rng.uniform(0.5, 2.0, m)
        if in_domain(spec, z):
            return z
    raise RuntimeError("no domain point")


def random_point(spec, rng):
    z = random_base(spec, rng)
    n = spec.n
    return ChartPoint.at(z, rng.uniform(-0.5, 0.5), rng.normal(), rng.normal(size=n), rng.normal(size=n))


def fd_jacobian(f, x, h=1e-6):
    """Plain central differences, independent of the package FD machinery."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.array(cols)
