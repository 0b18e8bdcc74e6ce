import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rg2flow.geometry import (DiagonalMetric, StructureConstants, curvature_summary,
                              orthonormal_sectional_curvatures, rg2_field, rg2_rhs,
                              ricci_diagonal, rm2_diagonal, sectional_curvatures)

pos = st.floats(min_value=0.05, max_value=20.0)
coef = st.floats(min_value=-3.0, max_value=3.0)
alphas = st.floats(min_value=0.0, max_value=5.0)
presets = st.sampled_from(sorted(StructureConstants.PRESETS))


def metrics():
    return st.builds(DiagonalMetric, pos, pos, pos)


def structures():
    return st.one_of(presets.map(StructureConstants.preset), st.builds(StructureConstants, coef, coef, coef))


def test_presets():
    assert StructureConstants.sol().as_tuple() == (-2.0, 0.0, 2.0)
    assert StructureConstants.preset("sl2r") == StructureConstants.sl2r()
    with pytest.raises(ValueError):
        StructureConstants.preset("E(2)")


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_metric_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        DiagonalMetric(1.0, bad, 1.0)


def test_negative_alpha_rejected():
    with pytest.raises(ValueError):
        rg2_rhs(StructureConstants.su2(), DiagonalMetric(1, 1, 1), -0.1)


def test_round_su2_ricci():
    # unit round metric in this frame: Ric = (1/2) g at A = B = C = 1
    r = ricci_diagonal(StructureConstants.su2(), DiagonalMetric(1, 1, 1))
    assert r == pytest.approx((2.0, 2.0, 2.0))
    k = orthonormal_sectional_curvatures(StructureConstants.su2(), DiagonalMetric(1, 1, 1))
    assert k == pytest.approx((1.0, 1.0, 1.0))


def test_sol_reference_values():
    sc, g = StructureConstants.sol(), DiagonalMetric(1, 1, 1)
    assert ricci_diagonal(sc, g) == pytest.approx((0.0, -8.0, 0.0))
    assert sectional_curvatures(sc, g) == pytest.approx((-4.0, 4.0, -4.0))


def test_nil_reference_values():
    sc, g = StructureConstants.nil(), DiagonalMetric(1, 1, 1)
    assert ricci_diagonal(sc, g) == pytest.approx((2.0, -2.0, -2.0))
    d = rg2_rhs(sc, g, 1.0)
    assert d[1] == pytest.approx(d[2])


def test_flat_is_fixed():
    for alpha in (0.0, 1.0, 3.0):
        assert rg2_rhs(StructureConstants.r3(), DiagonalMetric(1, 2, 3), alpha) == (0.0, 0.0, 0.0)


def test_summary_matches_parts():
    sc, g = StructureConstants.sl2r(), DiagonalMetric(1.3, 0.7, 2.1)
    s = curvature_summary(sc, g)
    assert (s.k23, s.k31, s.k12) == sectional_curvatures(sc, g)
    assert (s.r11, s.r22, s.r33) == ricci_diagonal(sc, g)
    assert (s.rm2_11, s.rm2_22, s.rm2_33) == rm2_diagonal(sc, g)


def test_field_matches_rhs():
    sc = StructureConstants.sl2r()
    f = rg2_field(sc, 0.6)
    assert f([1.0, 2.0, 0.5]) == rg2_rhs(sc, DiagonalMetric(1.0, 2.0, 0.5), 0.6)


@given(structures(), metrics(), alphas)
def test_assembly_identity(sc, g, alpha):
    d = rg2_rhs(sc, g, alpha)
    r, q = ricci_diagonal(sc, g), rm2_diagonal(sc, g)
    for di, ri, qi in zip(d, r, q):
        assert di == pytest.approx(-2 * ri - 0.5 * alpha * qi, rel=1e-12, abs=1e-12)


@given(structures(), metrics(), st.floats(min_value=0.1, max_value=10.0))
def test_scaling_laws(sc, g, c):
    gs = g.scaled(c)
    np.testing.assert_allclose(ricci_diagonal(sc, gs), ricci_diagonal(sc, g), rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(sectional_curvatures(sc, gs), np.multiply(c, sectional_curvatures(sc, g)),
                               rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(rm2_diagonal(sc, gs), np.divide(rm2_diagonal(sc, g), c),
                               rtol=1e-10, atol=1e-10)


@given(structures(), metrics())
def test_ricci_trace_is_twice_sectional_sum(sc, g):
    k = orthonormal_sectional_curvatures(sc, g)
    r = ricci_diagonal(sc, g)
    scal = r[0] / g.A + r[1] / g.B + r[2] / g.C
    assert scal == pytest.approx(2 * sum(k), rel=1e-10, abs=1e-10)


@given(pos, pos, alphas)
def test_lrs_planes_preserved(x, y, alpha):
    d = rg2_rhs(StructureConstants.su2(), DiagonalMetric(x, y, y), alpha)
    assert d[1] == pytest.approx(d[2], rel=1e-12, abs=1e-12)
    d = rg2_rhs(StructureConstants.nil(), DiagonalMetric(x, y, y), alpha)
    assert d[1] == pytest.approx(d[2], rel=1e-12, abs=1e-12)
    d = rg2_rhs(StructureConstants.sol(), DiagonalMetric(x, y, x), alpha)
    assert d[0] == pytest.approx(d[2], rel=1e-12, abs=1e-12)
    d = rg2_rhs(StructureConstants.sl2r(), DiagonalMetric(y, y, x), alpha)
    assert d[0] == pytest.approx(d[1], rel=1e-12, abs=1e-12)


@given(pos, pos, pos, alphas)
def test_nil_ratio_b_over_c_constant(A, B, C, alpha):
    dA, dB, dC = rg2_rhs(StructureConstants.nil(), DiagonalMetric(A, B, C), alpha)
    # d/dt (B/C) = (dB C - B dC) / C^2
    assert dB * C - B * dC == pytest.approx(0.0, abs=1e-9 * (abs(dB * C) + abs(B * dC) + 1))
