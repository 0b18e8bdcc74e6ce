import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from rg2flow.flows import (SOL_TIME_SCALE, ConstCurvatureParams, LrsFamily, ReducedState,
                           const_curvature_field, const_curvature_rhs, embed, nil_xi_rate,
                           product_factor_rhs, product_field, project, reduced_field, reduced_rhs,
                           trajectory_rhs)
from rg2flow.geometry import rg2_rhs

pos = st.floats(min_value=0.05, max_value=20.0)
alphas = st.floats(min_value=0.0, max_value=5.0)
families = st.sampled_from(list(LrsFamily))


def test_family_lookup():
    assert LrsFamily.from_name("sl(2,r)") is LrsFamily.SL2R_AeqB
    assert LrsFamily.from_name("SU2_BeqC") is LrsFamily.SU2_BeqC
    assert LrsFamily.SL2R_AeqB.axes == ("C", "A")
    with pytest.raises(ValueError):
        LrsFamily.from_name("R3")


def test_reduced_state_validation():
    with pytest.raises(ValueError):
        ReducedState(0.0, 1.0)


@given(families, pos, pos, alphas)
def test_reduced_matches_assembly(fam, x, y, alpha):
    g = embed(fam, (x, y))
    full = project(fam, *rg2_rhs(fam.structure_constants, g, alpha))
    red = reduced_rhs(fam, (x, y), alpha)
    scale = SOL_TIME_SCALE if fam is LrsFamily.SOL_AeqC else 1.0
    for f, r in zip(full, red):
        assert f == pytest.approx(scale * r, rel=1e-10, abs=1e-10)


def test_reference_values():
    assert reduced_rhs(LrsFamily.SOL_AeqC, (1, 1), 0.0) == (0.0, 8.0)
    assert reduced_rhs(LrsFamily.NIL_BeqC, (1, 1), 0.0) == pytest.approx((-4.0, 4.0))
    assert reduced_rhs(LrsFamily.SU2_BeqC, (1, 1), 0.0) == pytest.approx((-4.0, -4.0))
    f = reduced_field(LrsFamily.SOL_AeqC, 1.0)
    assert f([1.0, 4.0]) == reduced_rhs(LrsFamily.SOL_AeqC, (1, 4), 1.0)


@given(st.sampled_from([LrsFamily.SU2_BeqC, LrsFamily.NIL_BeqC, LrsFamily.SL2R_AeqB]), pos, pos, alphas)
def test_trajectory_slope_is_ratio(fam, x, y, alpha):
    dx, dy = reduced_rhs(fam, (x, y), alpha)
    assume(abs(dx) > 1e-6)
    assert trajectory_rhs(fam, (x, y), alpha) == pytest.approx(dy / dx, rel=1e-9, abs=1e-9)


def test_sol_has_no_trajectory_ode():
    with pytest.raises(ValueError):
        trajectory_rhs(LrsFamily.SOL_AeqC, (1, 1), 1.0)


@given(pos, pos, alphas)
def test_sign_structure(x, y, alpha):
    # A decreases for SU2, Nil and Sol; C decreases for SL2R
    assert reduced_rhs(LrsFamily.SU2_BeqC, (x, y), alpha)[0] < 0
    assert reduced_rhs(LrsFamily.NIL_BeqC, (x, y), alpha)[0] < 0
    assert reduced_rhs(LrsFamily.SL2R_AeqB, (x, y), alpha)[0] < 0
    assert reduced_rhs(LrsFamily.SOL_AeqC, (x, y), alpha)[0] <= 0


@given(pos, pos, st.floats(min_value=0.05, max_value=5.0))
def test_nil_xi_rate_negative_above_threshold(A, B, alpha):
    assume(A / B ** 2 > 2 / (3 * alpha))
    assert nil_xi_rate(A, B, alpha) < 0


def test_const_curvature():
    p = ConstCurvatureParams(K=1.0, n=3, alpha=1.0)
    assert const_curvature_rhs(p, 1.0) == pytest.approx(-6.0)
    assert const_curvature_field(p)([1.0])[0] == pytest.approx(-6.0)
    # alpha |K| = 2 balances the two terms for K < 0 at phi = 1
    assert const_curvature_rhs(ConstCurvatureParams(K=-1.0, n=2, alpha=2.0), 1.0) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        ConstCurvatureParams(K=1.0, n=4)
    with pytest.raises(ValueError):
        const_curvature_rhs(p, 0.0)


def test_product_factor():
    assert product_factor_rhs(1.0, 0.5, 2.0) == pytest.approx(-2.0 - 0.25)
    assert product_field(-1.0, 1.0)([3.0, 1.0]) == (0.0, pytest.approx(1.0))
