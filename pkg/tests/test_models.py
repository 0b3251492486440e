import numpy as np
import pytest

from cmapquot.errors import BranchError, ModelError
from cmapquot.models import (
    custom_model,
    fixed_locus_analysis,
    get_model,
    h4_moment_check,
    list_models,
    quadratic_product_check,
    quantum_stu_conformal_check,
    recipe,
)
from cmapquot.special_kahler import lift

from helpers import sym3

CUBIC_MODELS = ["stu", "quantum_stu", "st2:n=6", "t_series:p=2", "w:p=1,q=1", "homogeneous:q=1,r=2"]


def test_parse_identifiers():
    assert get_model("quadratic:n=5").n == 5
    assert get_model("quantum_stu:T=0.1+0.7j").params["T"] == 0.1 + 0.7j
    assert get_model("homogeneous:q=2,r=4").n == 10
    assert len(list_models()) == 8


@pytest.mark.parametrize("ident", ["nope", "quadratic:n", "quadratic:m=3", "st2:n=3", "w:p=0,q=1", "quadratic:n=abc"])
def test_bad_identifiers(ident):
    with pytest.raises(ModelError):
        get_model(ident)


# (n, r, dim_base_complex, dim_Mprime_complex) for the recommended recipe at seed 0
DIMS = {
    "quadratic:n=3": (3, 0, 2, 4),
    "stu": (4, 2, 1, 4),
    "quantum_stu": (4, 2, 1, 4),
    "st2:n=6": (6, 2, 3, 8),
    "t_series:p=2": (5, 2, 2, 6),
    "w:p=1,q=1": (6, 4, 1, 6),
    "homogeneous:q=1,r=2": (7, 4, 2, 8),
    "homogeneous:q=0,r=3": (7, 2, 4, 10),
    "homogeneous:q=2,r=4": (10, 6, 3, 12),
}


@pytest.mark.parametrize("ident", DIMS)
def test_dimension_table(ident):
    rec = recipe(ident, seed=0)
    d = rec.qspec.dims()
    assert (d["n"], d["r"], d["dim_base_complex"], d["dim_Mprime_complex"]) == DIMS[ident]
    assert rec.locus.dim_base_complex == d["dim_base_complex"]
    assert rec.locus.membership_residual < 1e-10
    for key, exp in rec.model.expected.items():
        assert d[key] == exp, key


@pytest.mark.parametrize("ident", ["quadratic:n=3", "stu", "st2:n=6", "t_series:p=2", "homogeneous:q=1,r=2"])
def test_claimed_counts(ident):
    rec = recipe(ident, seed=0)
    d = rec.qspec.dims()
    for key, claim in rec.model.claimed.items():
        assert d[key] == claim


@pytest.mark.xfail(strict=True, reason="four fixed moduli remove twelve real dimensions, not eight")
def test_w_claimed_count():
    rec = recipe("w:p=1,q=1", seed=0)
    assert rec.qspec.dim_Mprime_real == rec.model.claimed["dim_Mprime_real"]


@pytest.mark.xfail(strict=True, reason="rank of D.F_ABC is 2q+4 for a reducible Clifford module")
def test_homogeneous_reducible_claimed_count():
    rec = recipe("homogeneous:q=1,r=4", seed=0)
    assert rec.qspec.dim_Mprime_complex == rec.model.claimed["dim_Mprime_complex"]


def test_stu_locus_fixes_s_and_t():
    rec = recipe("stu", seed=3)
    assert set(rec.locus.fixed) == {"S", "T"}
    assert rec.locus.free == ("U",)
    z0 = rec.z0
    assert np.allclose(rec.D[1:3] / rec.D[0], z0[:2])
    # moving U keeps D F = C
    z = z0.copy()
    z[2] += 0.05 + 0.02j
    assert np.abs(rec.D @ rec.spec.jet(lift(z)).F_AB - rec.locus.C).max() < 1e-12


def test_stu_branch_needs_d0():
    model = get_model("stu")
    with pytest.raises(BranchError):
        fixed_locus_analysis(model, np.array([0, 1, 1j, 1]), np.array([1j, 1j, 1j]))


def test_stu_branch_requires_consistent_point():
    model = get_model("stu")
    with pytest.raises(BranchError):
        fixed_locus_analysis(model, np.array([1, 1j, 2j, 1]), np.array([1j, 1j, 1j]))


def test_t_series_fixes_s():
    rec = recipe("t_series:p=2", seed=1)
    assert set(rec.locus.fixed) == {"S"}
    z = rec.z0.copy()
    z[0] += 1e-3
    assert np.abs(rec.D @ rec.spec.jet(lift(z)).F_AB - rec.locus.C).max() > 1e-6


def test_h4_moment_pattern():
    r = h4_moment_check([0.3, -0.4, 0.2, 1.1])
    for key in ("quaternion_residual", "pattern_residual", "P1P2k1_minus_fk2", "4f_minus_k1sq", "k1sq_minus_exp", "k2sq_minus_exp", "bracket_k1_k2"):
        assert r[key] < 1e-10, key
    assert r["f"] == pytest.approx(r["f_expected"])
    assert r["killing_residual"] < 1e-6
    assert r["nabla_P_residual"] < 1e-6


@pytest.mark.parametrize("T", [1j, 0.2 + 0.5j, -0.4 + 1.3j])
def test_quantum_stu_conformal(T):
    r = quantum_stu_conformal_check(T, samples=6, seed=2)
    assert r["ratio_deviation"] < 1e-10
    assert r["anisotropy"] < 1e-12
    assert all(0 < x < 1 for x in r["ratios"])


def test_quantum_stu_real_modulus():
    r = quantum_stu_conformal_check(0.7, samples=6, seed=2)
    assert r["mode"] == "real" and r["c"] == 0
    assert r["ratio_deviation"] < 1e-14


def test_quadratic_product():
    r = quadratic_product_check(recipe("quadratic:n=3", seed=0), samples=4, seed=0)
    assert r["cross_block"] < 1e-10
    assert r["fiber_spread"] < 1e-10
    assert r["base_deviation"] < 1e-10
    assert np.allclose(r["fiber_holomorphic_sectional"], -4, atol=1e-3)
    assert np.ptp(r["base_holomorphic_sectional"]) < 1e-3


def test_custom_model_recipe():
    d = sym3(3, [((0, 1, 2), 1.0)])
    m = custom_model(d, name="mine")
    assert m.family == "custom" and m.n == 4
    rec = recipe(m, seed=0)
    assert rec.locus.membership_residual < 1e-10
    assert rec.locus.dim_base_complex == rec.qspec.dim_base_complex
    with pytest.raises(ModelError):
        custom_model(d, proposal=(1, 1))
