import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from rg2flow import oracles as orc
from rg2flow.flows import (ConstCurvatureParams, LrsFamily, const_curvature_field, reduced_field,
                           reduced_rhs, trajectory_rhs)
from rg2flow.integrate import IntegratorConfig, TerminationKind, integrate

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)
pos = st.floats(min_value=0.2, max_value=5.0)


def test_extinction_time_reference():
    assert orc.const_curv_extinction_time(1.0, 0.0) == pytest.approx(0.25)
    assert orc.const_curv_extinction_time(1.0, 1.0) == pytest.approx(0.11267346391648628, rel=1e-14)
    assert orc.const_curv_extinction_time(1.0, 1.0) == pytest.approx(0.25 + 0.125 * math.log(1 / 3))
    with pytest.raises(orc.OracleDomainError):
        orc.const_curv_extinction_time(-1.0, 1.0)


@pytest.mark.parametrize("K,alpha,n", [(1.0, 0.0, 3), (1.0, 1.0, 3), (0.5, 2.0, 2), (2.0, 0.3, 3)])
def test_extinction_time_vs_integration(K, alpha, n):
    f = const_curvature_field(ConstCurvatureParams(K=K, n=n, alpha=alpha))
    tr = integrate(f, [1.0], IntegratorConfig.singular(t_max=10.0, rel_tol=1e-12, abs_tol=1e-14))
    assert tr.termination.kind is TerminationKind.EXTINCTION
    assert tr.termination.singular_time == pytest.approx(orc.const_curv_extinction_time(K, alpha, n),
                                                         abs=1e-7)


@given(st.floats(min_value=-2.0, max_value=2.0), st.floats(min_value=0.0, max_value=3.0),
       st.floats(min_value=0.0, max_value=0.05))
def test_const_curv_implicit_relation_along_integration(K, alpha, t):
    assume(abs(2 + alpha * K) > 0.2 and abs(K) > 1e-3)
    f = const_curvature_field(ConstCurvatureParams(K=K, n=3, alpha=alpha))
    tr = integrate(f, [1.0], TIGHT.replace(t_max=0.05))
    assume(tr.termination.kind is TerminationKind.REACHED_T_MAX)
    phi = tr.at(t)[0]
    assert orc.const_curv_implicit_residual(K, alpha, t, phi) == pytest.approx(0.0, abs=1e-8)


def test_nil_ricci_explicit():
    A, B = orc.nil_ricci_explicit(1.0, 1.0, 1.0)
    assert A == pytest.approx(13 ** (-1 / 3), rel=1e-14)
    assert B == pytest.approx(13 ** (1 / 3), rel=1e-14)
    assert orc.nil_ricci_explicit(2.0, 3.0, 0.0) == pytest.approx((2.0, 3.0))


@given(pos, pos, st.floats(min_value=0.0, max_value=3.0))
def test_nil_ricci_explicit_solves_ode(A0, B0, t):
    h = 1e-7 / (A0 * B0 / min(A0, B0) ** 2 + A0 ** 2 / B0 ** 2)
    A, B = orc.nil_ricci_explicit(A0, B0, t)
    Ap, Bp = orc.nil_ricci_explicit(A0, B0, t + h)
    Am, Bm = orc.nil_ricci_explicit(A0, B0, t + 2 * h)
    dA, dB = reduced_rhs(LrsFamily.NIL_BeqC, (Ap, Bp), 0.0)
    assert (Am - A) / (2 * h) == pytest.approx(dA, rel=1e-6, abs=1e-8)
    assert (Bm - B) / (2 * h) == pytest.approx(dB, rel=1e-6, abs=1e-8)


def test_nil_separatrix_vs_integration():
    alpha = 1.0
    B0 = orc.nil_separatrix_B(1.0, alpha)
    tr = integrate(reduced_field(LrsFamily.NIL_BeqC, alpha), [1.0, B0],
                   IntegratorConfig(t_max=3.0, log_coords=True))
    for t in np.linspace(0, 3, 7):
        A, B = tr.at(t)
        assert A == pytest.approx(orc.nil_separatrix_A(1.0, alpha, t), rel=1e-6)
        assert B == pytest.approx(orc.nil_separatrix_B(A, alpha), rel=1e-6)


def test_su2_ricci_trajectory():
    A0, mu0 = 1.0, 0.5
    tr = integrate(reduced_field(LrsFamily.SU2_BeqC, 0.0), [A0, A0 + mu0],
                   IntegratorConfig.singular(t_max=10.0, rel_tol=1e-12, abs_tol=1e-14))
    for A, B in tr.y[:: max(1, len(tr.y) // 20)]:
        assert B == pytest.approx(A + orc.su2_ricci_trajectory_mu(A, A0, mu0), rel=1e-7)
    assert orc.su2_ricci_trajectory_mu(0.3, 1.0, 0.0) == 0.0
    assert math.isinf(orc.su2_ricci_k(1.0, 0.0))


def test_su2_pole_and_domain():
    k = orc.su2_ricci_k(1.0, -0.5)  # 1 - 2 = -1 < 0, no pole
    assert k == pytest.approx(-1.0)
    A0, mu0 = 1.0, 2.0
    k = orc.su2_ricci_k(A0, mu0)
    with pytest.raises(orc.OracleDomainError):
        orc.su2_ricci_trajectory_mu(math.sqrt(k), A0, mu0)
    with pytest.raises(orc.OracleDomainError):
        orc.su2_ricci_trajectory_mu(1.0, 1.0, -1.5)


def test_sol_invariant_and_time():
    alpha = 1.0
    f = reduced_field(LrsFamily.SOL_AeqC, alpha)
    tr = integrate(f, [1.0, 4.0], TIGHT.replace(t_max=20.0, blowup_cap=100.0))
    assert tr.termination.kind is TerminationKind.BLOWUP
    inv0 = orc.sol_rg2_invariant(1.0, 4.0, alpha)
    drift = max(abs(orc.sol_rg2_invariant(A, B, alpha) / inv0 - 1) for A, B in tr.y)
    assert drift < 1e-8
    assert tr.first_crossing(1, 6.0) == pytest.approx(orc.sol_rg2_time_of_B(6.0, 4.0, alpha), abs=1e-9)


def test_sol_time_domain_errors():
    assert orc.sol_rg2_time_of_B(9.0, 1.0, 0.0) == pytest.approx(1.0)
    with pytest.raises(orc.OracleDomainError):
        orc.sol_rg2_time_of_B(3.0, 1.0, 1.0)
    with pytest.raises(orc.OracleDomainError):
        orc.sol_rg2_time_of_B(3.0, 2.0, 1.0)
    with pytest.raises(orc.OracleDomainError):
        orc.sol_rg2_invariant(1.0, 0.0, 1.0)


def test_sol_boundary_solution():
    alpha = 0.7
    tr = integrate(reduced_field(LrsFamily.SOL_AeqC, alpha), [1.0, 2 * alpha], TIGHT.replace(t_max=1.0))
    assert tuple(tr.final_state) == pytest.approx(orc.sol_boundary_solution(1.0, alpha, 1.0), rel=1e-9)


@given(pos, pos)
def test_sl2r_ricci_orbit_slope(C0, A0):
    cbar = orc.sl2r_ricci_climit(C0, A0)
    assert 0 < cbar < C0
    assert orc.sl2r_ricci_trajectory(C0, C0, A0) == pytest.approx(A0, rel=1e-12)
    C = 0.5 * (cbar + C0)
    h = 1e-6 * C
    A = orc.sl2r_ricci_trajectory(C, C0, A0)
    slope = (orc.sl2r_ricci_trajectory(C + h, C0, A0) - orc.sl2r_ricci_trajectory(C - h, C0, A0)) / (2 * h)
    assert slope == pytest.approx(trajectory_rhs(LrsFamily.SL2R_AeqB, (C, A), 0.0), rel=1e-5)


def test_sl2r_ricci_domain():
    cbar = orc.sl2r_ricci_climit(1.0, 1.0)
    assert cbar == pytest.approx(math.sqrt(0.5))
    with pytest.raises(orc.OracleDomainError):
        orc.sl2r_ricci_trajectory(cbar * 0.99, 1.0, 1.0)
    with pytest.raises(orc.OracleDomainError):
        orc.sl2r_ricci_climit(0.0, 1.0)


def test_sl2r_ricci_vs_integration():
    C0, A0 = 1.0, 1.0
    tr = integrate(reduced_field(LrsFamily.SL2R_AeqB, 0.0), [C0, A0],
                   IntegratorConfig.singular(t_max=2.0, rel_tol=1e-12, abs_tol=1e-14))
    for C, A in tr.y[:: max(1, len(tr.y) // 20)]:
        assert A == pytest.approx(orc.sl2r_ricci_trajectory(C, C0, A0), rel=1e-6)
    # C decreases to the limit value while A grows
    assert tr.final_state[0] > orc.sl2r_ricci_climit(C0, A0)
    assert tr.final_state[1] > A0


def test_const_curv_residual_domain():
    with pytest.raises(orc.OracleDomainError):
        orc.const_curv_implicit_residual(-1.0, 2.0, 0.1, 1.0)
    with pytest.raises(orc.OracleDomainError):
        orc.const_curv_implicit_residual(1.0, 1.0, 0.1, 0.0)
    assert orc.const_curv_implicit_residual(1.0, 0.0, 0.1, 0.6) == pytest.approx(0.0)
    # the extinction time solves the implicit relation in the phi -> 0 limit
    T = orc.const_curv_extinction_time(1.0, 1.0)
    phi = brentq(lambda p: orc.const_curv_implicit_residual(1.0, 1.0, T * (1 - 1e-9), p), 1e-12, 1.0)
    assert phi < 1e-3
