"""Registry of numerical checks shared by ``rg2flow validate`` and the test suite.

Every check returns a :class:`CheckResult` with the measured error and the
threshold it is held to.  Checks receive a :class:`Context`; with
``perturb=True`` the RG-2 right-hand side under test has the sign of its
quadratic curvature term flipped, which the assembly checks must catch.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import oracles as orc
from .classify import (Regime, classify_constant_curvature, classify_sol, sol_cigar_limit,
                       verify_classification)
from .flows import (SOL_TIME_SCALE, ConstCurvatureParams, LrsFamily, const_curvature_field,
                    const_curvature_rhs, embed, nil_xi_rate, project, reduced_field, reduced_rhs,
                    trajectory_rhs)
from .geometry import (DiagonalMetric, StructureConstants, rg2_field, rg2_rhs, ricci_diagonal,
                       rm2_diagonal, sectional_curvatures)
from .integrate import IntegratorConfig, TerminationKind, integrate
from .separatrix import build_sl2r_separatrix, sl2r_g, sl2r_h
from .systems import FlowProblem

__all__ = ["CheckResult", "Context", "CHECKS", "ACCEPTANCE", "run_checks"]

_SEED = 20240611


@dataclass
class CheckResult:
    name: str
    group: str
    passed: bool
    measured: Optional[float]
    threshold: Optional[float]
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        m = "" if self.measured is None else f" measured={self.measured:.3g}"
        th = "" if self.threshold is None else f" threshold={self.threshold:.3g}"
        return f"[{status}] {self.name}:{m}{th} {self.detail}".rstrip()


@dataclass
class Context:
    perturb: bool = False
    _sep: dict = field(default_factory=dict)

    def rg2(self, sc, g, alpha):
        d = rg2_rhs(sc, g, alpha)
        if not self.perturb:
            return d
        q = rm2_diagonal(sc, g)
        return tuple(di + alpha * qi for di, qi in zip(d, q))  # flips the sign of the alpha term

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng(_SEED + salt)

    def separatrix(self, alpha: float = 1.0, c_max: float = 10.0):
        key = (alpha, c_max)
        if key not in self._sep:
            self._sep[key] = build_sl2r_separatrix(alpha, c_max)
        return self._sep[key]


_Check = Callable[[Context], tuple]
CHECKS: dict = {}
ACCEPTANCE: dict = {}


def _register(name: str, group: str, table: Optional[dict] = None):
    def deco(fn: _Check) -> _Check:
        (CHECKS if table is None else table)[name] = (group, fn)
        return fn
    return deco


def _result(ok, measured=None, threshold=None, detail=""):
    return bool(ok), (None if measured is None else float(measured)), threshold, detail


def _rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def _random_metrics(rng, n):
    return [DiagonalMetric(*v) for v in np.exp(rng.uniform(-2, 2, size=(n, 3)))]


def _random_sc(rng, n):
    presets = [StructureConstants.preset(k) for k in StructureConstants.PRESETS]
    extra = [StructureConstants(*v) for v in rng.uniform(-3, 3, size=(n, 3))]
    return presets + extra


# ---------------------------------------------------------------- geometry

@_register("geometry.assembly_identity", "geometry")
def _assembly(ctx):
    rng = ctx.rng(1)
    worst = 0.0
    for sc in _random_sc(rng, 20):
        for g in _random_metrics(rng, 25):
            for a in (0.0, 0.1, 1.0, 10.0):
                r, q = ricci_diagonal(sc, g), rm2_diagonal(sc, g)
                want = [-2 * ri - 0.5 * a * qi for ri, qi in zip(r, q)]
                got = ctx.rg2(sc, g, a)
                scale = max(1.0, max(abs(w) for w in want))
                worst = max(worst, max(abs(x - y) for x, y in zip(got, want)) / scale)
    return _result(worst < 1e-12, worst, 1e-12)


@_register("geometry.ricci_scale_invariance", "geometry")
def _ricci_scale(ctx):
    rng = ctx.rng(2)
    worst = 0.0
    for sc in _random_sc(rng, 10):
        for g in _random_metrics(rng, 20):
            for c in (0.5, 2.0, 7.3):
                a, b = ricci_diagonal(sc, g.scaled(c)), ricci_diagonal(sc, g)
                worst = max(worst, max(abs(x - y) for x, y in zip(a, b)) / max(1, max(map(abs, b))))
    return _result(worst < 1e-12, worst, 1e-12)


@_register("geometry.rm2_scaling", "geometry")
def _rm2_scale(ctx):
    rng = ctx.rng(3)
    worst = 0.0
    for sc in _random_sc(rng, 10):
        for g in _random_metrics(rng, 20):
            for c in (0.5, 2.0, 7.3):
                a = rm2_diagonal(sc, g.scaled(c))
                b = [v / c for v in rm2_diagonal(sc, g)]
                worst = max(worst, max(abs(x - y) for x, y in zip(a, b)) / max(1, max(map(abs, b))))
    return _result(worst < 1e-12, worst, 1e-12)


@_register("geometry.sectional_scaling", "geometry")
def _sec_scale(ctx):
    rng = ctx.rng(4)
    worst = 0.0
    for sc in _random_sc(rng, 10):
        for g in _random_metrics(rng, 20):
            for c in (0.5, 2.0, 7.3):
                a = sectional_curvatures(sc, g.scaled(c))
                b = [c * v for v in sectional_curvatures(sc, g)]
                worst = max(worst, max(abs(x - y) for x, y in zip(a, b)) / max(1, max(map(abs, b))))
    return _result(worst < 1e-12, worst, 1e-12)


@_register("geometry.flat_fixed_point", "geometry")
def _flat(ctx):
    rng = ctx.rng(5)
    worst = max(max(map(abs, ctx.rg2(StructureConstants.r3(), g, a)))
                for g in _random_metrics(rng, 50) for a in (0.0, 1.0, 10.0))
    return _result(worst == 0.0, worst, 0.0)


@_register("geometry.reference_values", "geometry")
def _geom_values(ctx):
    one = DiagonalMetric(1, 1, 1)
    got = [
        (sectional_curvatures(StructureConstants.su2(), one), (1, 1, 1)),
        (ricci_diagonal(StructureConstants.su2(), one), (2, 2, 2)),
        (rm2_diagonal(StructureConstants.su2(), one), (4, 4, 4)),
        (ctx.rg2(StructureConstants.su2(), one, 0.0), (-4, -4, -4)),
        (ctx.rg2(StructureConstants.nil(), one, 1.0), (-6, -6, -6)),
    ]
    err = max(abs(x - y) for a, b in got for x, y in zip(a, b))
    return _result(err < 1e-14, err, 1e-14)


@_register("geometry.lrs_preservation", "geometry")
def _lrs(ctx):
    rng = ctx.rng(6)
    worst = 0.0
    pairs = {"SU2": (1, 2), "NIL": (1, 2), "SOL": (0, 2), "SL2R": (0, 1)}
    for name, (i, j) in pairs.items():
        sc = StructureConstants.preset(name)
        for x, y in np.exp(rng.uniform(-2, 2, size=(200, 2))):
            v = [x, y, y] if (i, j) == (1, 2) else ([x, y, x] if (i, j) == (0, 2) else [x, x, y])
            for a in (0.0, 0.1, 1.0, 10.0):
                d = ctx.rg2(sc, DiagonalMetric(*v), a)
                worst = max(worst, abs(d[i] - d[j]) / max(1, abs(d[i])))
    return _result(worst < 1e-12, worst, 1e-12)


@_register("geometry.nil_ratio_identity", "geometry")
def _nil_ratio(ctx):
    rng = ctx.rng(7)
    worst = 0.0
    for g in _random_metrics(rng, 500):
        for a in (0.0, 0.3, 1.0, 10.0):
            d = ctx.rg2(StructureConstants.nil(), g, a)
            worst = max(worst, abs(g.C * d[1] - g.B * d[2]) / max(1, abs(g.C * d[1])))
    return _result(worst < 1e-12, worst, 1e-12)


# ------------------------------------------------------------------ flows

@_register("flows.assembly_consistency", "flows")
def _consistency(ctx):
    rng = ctx.rng(8)
    worst = 0.0
    for fam in LrsFamily:
        scale = SOL_TIME_SCALE if fam is LrsFamily.SOL_AeqC else 1.0
        for x, y in np.exp(rng.uniform(-2, 2, size=(1000, 2))):
            for a in (0.0, 0.1, 1.0, 10.0):
                d = ctx.rg2(fam.structure_constants, embed(fam, (x, y)), a)
                want = project(fam, *d)
                got = [scale * v for v in reduced_rhs(fam, (x, y), a)]
                s = max(1.0, max(map(abs, want)))
                worst = max(worst, max(abs(p - q) for p, q in zip(got, want)) / s)
    return _result(worst < 1e-12, worst, 1e-12, "Sol compared at the factor-2 time scale")


@_register("flows.reference_values", "flows")
def _flow_values(ctx):
    got = [
        (reduced_rhs(LrsFamily.SOL_AeqC, (3.0, 5.0), 0.0), (0.0, 8.0)),
        (reduced_rhs(LrsFamily.NIL_BeqC, (1.0, 1.0), 1.0), (-6.0, -6.0)),
        (reduced_rhs(LrsFamily.SU2_BeqC, (1.0, 1.0), 0.0), (-4.0, -4.0)),
        ((const_curvature_rhs(ConstCurvatureParams(1, 3, 0), 1.0),), (-4.0,)),
        ((const_curvature_rhs(ConstCurvatureParams(-1, 3, 1), 1.0),), (2.0,)),
        ((trajectory_rhs(LrsFamily.NIL_BeqC, (1.0, 1.0), 2 / 3),), (0.5,)),
        ((trajectory_rhs(LrsFamily.NIL_BeqC, (1.0, 1.0), 0.0),), (-1.0,)),
    ]
    err = max(abs(x - y) for a, b in got for x, y in zip(a, b))
    return _result(err < 1e-14, err, 1e-14)


@_register("flows.sol_conservation_rhs", "flows")
def _sol_cons(ctx):
    rng = ctx.rng(9)
    worst = 0.0
    for A, B in np.exp(rng.uniform(-2, 2, size=(500, 2))):
        for a in (0.0, 0.5, 1.0, 5.0):
            dA, dB = reduced_rhs(LrsFamily.SOL_AeqC, (A, B), a)
            rate = dA * (1 - 2 * a / B) + A * 2 * a / B ** 2 * dB
            worst = max(worst, abs(rate) / max(1, abs(dA) + abs(A * 2 * a / B ** 2 * dB)))
    return _result(worst < 1e-13, worst, 1e-13)


@_register("flows.monotonicity", "flows")
def _monotone(ctx):
    rng = ctx.rng(10)
    bad = 0
    for x, y in np.exp(rng.uniform(-3, 3, size=(500, 2))):
        for a in (0.0, 0.1, 1.0, 10.0):
            bad += reduced_rhs(LrsFamily.SU2_BeqC, (x, y), a)[0] >= 0
            bad += reduced_rhs(LrsFamily.NIL_BeqC, (x, y), a)[0] >= 0
            bad += reduced_rhs(LrsFamily.SL2R_AeqB, (x, y), a)[0] >= 0
            s = reduced_rhs(LrsFamily.SOL_AeqC, (x, y), a)[0]
            bad += (s >= 0) if a > 0 else (s != 0)
    return _result(bad == 0, bad, 0, "sign violations")


@_register("flows.su2_isotropy_line", "flows")
def _iso(ctx):
    worst = 0.0
    for A in np.geomspace(0.01, 100, 60):
        for a in (0.0, 0.1, 1.0, 10.0):
            dA, dB = reduced_rhs(LrsFamily.SU2_BeqC, (A, A), a)
            worst = max(worst, abs(dA - dB) / max(1, abs(dA)))
    return _result(worst < 1e-12, worst, 1e-12)


@_register("flows.trajectory_ratio", "flows")
def _ratio(ctx):
    rng = ctx.rng(11)
    worst = 0.0
    for fam in (LrsFamily.SU2_BeqC, LrsFamily.NIL_BeqC, LrsFamily.SL2R_AeqB):
        for x, y in np.exp(rng.uniform(-2, 2, size=(500, 2))):
            for a in (0.0, 0.1, 1.0, 10.0):
                dx, dy = reduced_rhs(fam, (x, y), a)
                worst = max(worst, abs(trajectory_rhs(fam, (x, y), a) - dy / dx) / max(1, abs(dy / dx)))
    return _result(worst < 1e-12, worst, 1e-12)


@_register("flows.nil_xi_sign", "flows")
def _xi(ctx):
    rng = ctx.rng(12)
    bad = 0
    checked = 0
    for _ in range(2000):
        a = float(np.exp(rng.uniform(-2, 2)))
        B = float(np.exp(rng.uniform(-2, 2)))
        u = 2 / (3 * a) * float(np.exp(rng.uniform(1e-6, 3)))
        A = u * B * B
        checked += 1
        bad += nil_xi_rate(A, B, a) >= 0
    return _result(bad == 0, bad, 0, f"{checked} states above the separatrix")


# -------------------------------------------------------------- integrate

def _cc_reference(K, alpha, t, n=3):
    """phi(t) from the implicit relation, solved by bracketing on (0, 1]."""
    f = lambda p: orc.const_curv_implicit_residual(K, alpha, t, p, n)
    return brentq(f, 1e-12, 1.0, xtol=1e-15, rtol=1e-15)


@_register("integrate.convergence_order", "integrate")
def _order(ctx):
    # alpha = 0: constant right-hand side, the method is exact
    p0 = ConstCurvatureParams(1.0, 3, 0.0)
    tr = integrate(const_curvature_field(p0), [1.0], IntegratorConfig(t_max=0.2))
    exact_err = abs(tr.final_state[0] - (1 - 4 * 0.2))
    # alpha = 1: error reduction when tolerances tighten 100x
    p1 = ConstCurvatureParams(1.0, 3, 1.0)
    t_end = 0.1
    ref = _cc_reference(1.0, 1.0, t_end)
    errs = []
    for tol in (1e-5, 1e-7, 1e-9):
        cfg = IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-3, t_max=t_end)
        errs.append(abs(integrate(const_curvature_field(p1), [1.0], cfg).final_state[0] - ref))
    ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
    ok = exact_err < 1e-14 and min(ratios) >= 16
    return _result(ok, min(ratios), 16.0,
                   f"alpha=0 error {exact_err:.2g}; alpha=1 errors {[f'{e:.2g}' for e in errs]}")


@_register("integrate.positivity_determinism", "integrate")
def _pos(ctx):
    runs = [
        (reduced_field(LrsFamily.SU2_BeqC, 1.0), [1.0, 2.0]),
        (reduced_field(LrsFamily.NIL_BeqC, 1.0), [1.0, 1.0]),
        (reduced_field(LrsFamily.SOL_AeqC, 1.0), [1.0, 1.0]),
        (rg2_field(StructureConstants.sl2r(), 1.0), [1.0, 1.0, 0.3]),
    ]
    ok = True
    for rhs, y0 in runs:
        for cfg in (IntegratorConfig(t_max=50), IntegratorConfig.singular(t_max=50)):
            a, b = integrate(rhs, y0, cfg), integrate(rhs, y0, cfg)
            ok &= bool(np.all(a.y > 0)) and np.array_equal(a.y, b.y) and np.array_equal(a.t, b.t)
            ok &= bool(np.all(np.diff(a.t) > 0))
    return _result(ok, None, None, "positive, strictly increasing t, bitwise repeatable")


@_register("integrate.singular_time_su2", "integrate")
def _su2_t(ctx):
    tr = integrate(reduced_field(LrsFamily.SU2_BeqC, 0.0), [1.0, 1.0])
    est = tr.termination.singular_time
    err = abs(est - 0.25) if est is not None else math.inf
    return _result(tr.termination.kind is TerminationKind.EXTINCTION and err < 1e-4, err, 1e-4)


# ---------------------------------------------------------------- oracles

@_register("oracles.reference_values", "oracles")
def _orc_values(ctx):
    pairs = [
        (orc.const_curv_implicit_residual(1, 0, 0.1, 0.6), 0.0),
        (orc.const_curv_implicit_residual(2.5, 0.7, 0.0, 1.0), 0.0),
        (orc.const_curv_extinction_time(1, 0, 3), 0.25),
        (orc.nil_ricci_explicit(1, 1, 1)[0], 13 ** (-1 / 3)),
        (orc.nil_ricci_explicit(1, 1, 1)[1], 13 ** (1 / 3)),
        (orc.su2_ricci_trajectory_mu(0.5, 1, 1), -0.125 / (0.25 - 2)),
        (orc.sol_rg2_invariant(1, 4, 1), 0.5),
        (orc.sol_rg2_time_of_B(6, 4, 1), (2 + 2 * math.log(2)) / 8),
        (orc.sl2r_ricci_trajectory(0.8, 1, 1), 0.8 / (0.64 * 2 - 1)),
        (orc.sl2r_ricci_climit(1, 1), math.sqrt(0.5)),
        (sl2r_h(6, 1), 1.2 * math.sqrt(80)),
        (sl2r_g(1.2 * math.sqrt(80), 1), 6.0),
        (sl2r_h(2, 1), 0.0),
    ]
    err = max(abs(a - b) / max(1, abs(b)) for a, b in pairs)
    t1 = orc.const_curv_extinction_time(1, 1, 3)
    return _result(err < 1e-12 and t1 < 0.25, err, 1e-12)


@_register("oracles.extinction_time_vs_integration", "oracles")
def _orc_T(ctx):
    worst = 0.0
    for K, a, n in [(1, 1, 3), (1, 0, 3), (2, 0.3, 3), (1, 1, 2), (0.5, 4, 3)]:
        p = ConstCurvatureParams(K, n, a)
        tr = integrate(const_curvature_field(p), [1.0], IntegratorConfig.singular())
        worst = max(worst, abs(tr.termination.singular_time - orc.const_curv_extinction_time(K, a, n)))
    return _result(worst < 1e-5, worst, 1e-5)


def _fd(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


@_register("oracles.differentiated_along_curve", "oracles")
def _orc_fd(ctx):
    rng = ctx.rng(13)
    worst = {}

    def upd(k, v):
        worst[k] = max(worst.get(k, 0.0), v)

    for _ in range(100):
        # constant curvature: phi'(t) = -R_t / R_phi
        K, a = float(rng.uniform(0.2, 3)), float(rng.uniform(0, 3))
        T = orc.const_curv_extinction_time(K, a, 3)
        t = float(rng.uniform(0.05, 0.8)) * T
        phi = _cc_reference(K, a, t)
        Rt = _fd(lambda s: orc.const_curv_implicit_residual(K, a, s, phi), t, 1e-6 * T)
        Rp = _fd(lambda p: orc.const_curv_implicit_residual(K, a, t, p), phi, 1e-6 * phi)
        want = const_curvature_rhs(ConstCurvatureParams(K, 3, a), phi)
        upd("const_curv", abs(-Rt / Rp - want) / abs(want))
        # Nil Ricci explicit solution
        A0, B0, t = np.exp(rng.uniform(-1, 1, 3))
        h = 1e-5 * t
        d = [(p - m) / (2 * h) for p, m in zip(orc.nil_ricci_explicit(A0, B0, t + h),
                                                orc.nil_ricci_explicit(A0, B0, t - h))]
        want = reduced_rhs(LrsFamily.NIL_BeqC, orc.nil_ricci_explicit(A0, B0, t), 0.0)
        upd("nil_ricci", _rel(d, want))
        # SU(2) Ricci orbit mu(A)
        A0 = float(np.exp(rng.uniform(-1, 1)))
        mu0 = float(rng.uniform(-0.9, 2.0)) * A0
        if abs(mu0) > 1e-3:
            A = float(rng.uniform(0.05, 1.0)) * A0
            mu = orc.su2_ricci_trajectory_mu(A, A0, mu0)
            dmu = _fd(lambda x: orc.su2_ricci_trajectory_mu(x, A0, mu0), A, 1e-5 * A)
            want = trajectory_rhs(LrsFamily.SU2_BeqC, (A, A + mu), 0.0)
            upd("su2_mu", abs(1 + dmu - want) / abs(want))
        # Sol implicit time of B: dt/dB = 1/(dB/dt)
        a = float(rng.uniform(0.1, 3))
        B0 = 2 * a * float(np.exp(rng.uniform(0.05, 1.5)))
        B = B0 * float(np.exp(rng.uniform(0, 1)))
        dt = _fd(lambda b: orc.sol_rg2_time_of_B(b, B0, a), B, 1e-5 * B)
        upd("sol_time", abs(dt * reduced_rhs(LrsFamily.SOL_AeqC, (1.0, B), a)[1] - 1))
        # Sol invariant has zero derivative along the flow
        A = float(np.exp(rng.uniform(-1, 1)))
        dA, dB = reduced_rhs(LrsFamily.SOL_AeqC, (A, B), a)
        hA, hB = 1e-6 * A, 1e-6 * B
        gA = _fd(lambda x: orc.sol_rg2_invariant(x, B, a), A, hA)
        gB = _fd(lambda x: orc.sol_rg2_invariant(A, x, a), B, hB)
        upd("sol_invariant", abs(gA * dA + gB * dB) / (abs(gA * dA) + abs(gB * dB)))
        # SL(2,R) Ricci orbit A(C)
        C0, A0 = np.exp(rng.uniform(-1, 1, 2))
        cbar = orc.sl2r_ricci_climit(C0, A0)
        C = cbar + (C0 - cbar) * float(rng.uniform(0.05, 1.0))
        A = orc.sl2r_ricci_trajectory(C, C0, A0)
        dA = _fd(lambda c: orc.sl2r_ricci_trajectory(c, C0, A0), C, 1e-6 * (C - cbar))
        upd("sl2r_ricci", abs(dA - trajectory_rhs(LrsFamily.SL2R_AeqB, (C, A), 0.0)) / abs(dA))
    m = max(worst.values())
    return _result(m < 1e-6, m, 1e-6, " ".join(f"{k}={v:.1e}" for k, v in worst.items()))


@_register("oracles.vs_integrator", "oracles")
def _orc_int(ctx):
    cfg = IntegratorConfig()
    thr = cfg.rel_tol * 1e2
    worst = {}
    # Nil Ricci
    tr = integrate(reduced_field(LrsFamily.NIL_BeqC, 0.0), [1.3, 0.7], cfg.replace(t_max=5))
    worst["nil_ricci"] = max(_rel(tr.at(t), orc.nil_ricci_explicit(1.3, 0.7, t))
                             for t in np.linspace(0.25, 5, 20))
    # constant curvature with alpha = 1 (implicit residual)
    p = ConstCurvatureParams(1.0, 3, 1.0)
    tr = integrate(const_curvature_field(p), [1.0], cfg)
    ts = np.linspace(0, tr.t_end, 22)[1:-1]
    worst["const_curv"] = max(abs(orc.const_curv_implicit_residual(1, 1, t, tr.at(t)[0])) for t in ts)
    # Sol time of B
    tr = integrate(reduced_field(LrsFamily.SOL_AeqC, 1.0), [1.0, 4.0], cfg.replace(blowup_cap=100))
    levels = np.linspace(5, 95, 20)
    worst["sol_time"] = max(abs(tr.first_crossing(1, b) - orc.sol_rg2_time_of_B(b, 4.0, 1.0))
                            / orc.sol_rg2_time_of_B(b, 4.0, 1.0) for b in levels)
    # SU(2) Ricci orbit
    tr = integrate(reduced_field(LrsFamily.SU2_BeqC, 0.0), [1.0, 1.5], cfg)
    idx = np.linspace(0, len(tr.t) - 1, 20).astype(int)
    # compared as B = A + mu(A): mu itself loses digits to cancellation near A = B
    worst["su2_mu"] = max(abs(tr.y[i, 1] / (tr.y[i, 0] + orc.su2_ricci_trajectory_mu(tr.y[i, 0], 1.0, 0.5)) - 1)
                          for i in idx)
    # SL(2,R) Ricci orbit; A(C) has a pole at Cbar, so its relative error is the
    # error in C amplified by about A.  Checkpoints stay where A = O(10).
    tr = integrate(reduced_field(LrsFamily.SL2R_AeqB, 0.0), [1.0, 1.0], cfg.replace(t_max=2.0))
    idx = np.linspace(0, len(tr.t) - 1, 20).astype(int)
    worst["sl2r_ricci"] = max(_rel(tr.y[i, 1], orc.sl2r_ricci_trajectory(tr.y[i, 0], 1.0, 1.0)) for i in idx)
    m = max(worst.values())
    return _result(m < thr, m, thr, " ".join(f"{k}={v:.1e}" for k, v in worst.items()))


# --------------------------------------------------------------- classify

@_register("classify.reference_values", "classify")
def _cls_values(ctx):
    R = Regime
    from .classify import classify_nil, classify_su2
    cases = [
        (classify_constant_curvature(0, 1, 3), R.FixedPoint),
        (classify_constant_curvature(-1, 1, 3), R.ExpandImmortal),
        (classify_constant_curvature(-3, 1, 3), R.ContractFiniteTime),
        (classify_nil(1, 1, 1, 1), R.ShrinkerFiniteTime),
        (classify_nil(1, 1, 1, 0.1), R.PancakeImmortal),
        (classify_nil(1, 1, 1, 2 / 3), R.ShrinkerExponential),
        (classify_sol(1, 3, 1), R.CigarImmortal),
        (classify_sol(5, 2, 1), R.SolBoundary),
        (classify_sol(1, 1, 1), R.ShrinkerFiniteTime),
        (classify_su2(1, 1, 0), R.ShrinkerFiniteTime),
        (classify_su2(0.1, 10, 5), R.ShrinkerFiniteTime),
        (classify_su2(10, 0.1, 0), R.ShrinkerFiniteTime),
    ]
    bad = sum(a is not b for a, b in cases)
    return _result(bad == 0 and math.isclose(sol_cigar_limit(1, 3, 1), 1 / 3), bad, 0)


@_register("classify.nil_separatrix_invariance", "classify")
def _nil_sep(ctx):
    return _nil_separatrix_errors(1.0)


def _nil_separatrix_errors(alpha, t_max=3.0):
    B0 = math.sqrt(1.5 * alpha)
    tr = integrate(reduced_field(LrsFamily.NIL_BeqC, alpha), [1.0, B0],
                   IntegratorConfig(t_max=t_max, log_coords=True))
    ts = np.concatenate([tr.t, np.linspace(0, tr.t_end, 301)])
    ys = np.array([tr.at(t) for t in ts])
    e_rel = float(np.max(np.abs(ys[:, 1] ** 2 - 1.5 * alpha * ys[:, 0]) / ys[:, 1] ** 2))
    e_exp = float(np.max(np.abs(ys[:, 0] / np.exp(-32 * ts / (9 * alpha)) - 1)))
    m = max(e_rel, e_exp)
    return _result(m < 1e-6, m, 1e-6, f"parabola {e_rel:.2g}, exponential {e_exp:.2g}, "
                   f"t in [0, {tr.t_end:g}]")


@_register("classify.sol_threshold_sharpness", "classify")
def _sol_sharp(ctx):
    prob = FlowProblem("lrs", 1.0, geometry="SOL")
    reps = [verify_classification(prob, (1.0, b)) for b in (1.9, 1.95, 2.05, 2.1)]
    bad = sum(not r.agree for r in reps)
    return _result(bad == 0, bad, 0, ", ".join(f"{r.predicted.value}/{r.observed.value}" for r in reps))


@_register("classify.sol_alpha_scaling", "classify")
def _sol_scale(ctx):
    rng = ctx.rng(14)
    bad = 0
    for A0, r, a, c in zip(*(np.exp(rng.uniform(-2, 2, (4, 300))))):
        B0 = 2 * a * float(np.round(r, 1)) if r > 0 else 1.0
        bad += classify_sol(A0, B0, a) is not classify_sol(A0, c * B0 / c * c, c * a)
    return _result(bad == 0, bad, 0)


@_register("classify.separatrix_partition", "classify")
def _partition(ctx):
    sep = ctx.separatrix()
    rng = ctx.rng(15)
    prob = FlowProblem("lrs", 1.0, geometry="SL2R")
    crossings = 0
    for C0 in np.exp(rng.uniform(math.log(0.01), math.log(9.0), 20)):
        for f in (1.05, 0.95, 0.5):
            tr = integrate(prob.field(), [C0, f * sep(C0)], IntegratorConfig.singular(t_max=1e9))
            sides = {sep.side(c, a) for c, a in tr.y if c <= sep.c_max}
            crossings += len(sides - {0}) > 1
    return _result(crossings == 0, crossings, 0, "trajectories changing side")


@_register("classify.separatrix_properties", "classify")
def _sep_props(ctx):
    sep = ctx.separatrix()
    slope = float(np.max(sep.slope_residual()))
    anchor_err = abs(sep.samples[0, 1] - sl2r_g(sep.samples[0, 0], 1.0))
    lim = abs(sep.lower_limit - 2.0)
    mono = bool(np.all(np.diff(sep.samples[:, 1]) > 0))
    ok = slope < 1e-4 and anchor_err == 0 and lim < 10 * sep.tol and mono
    return _result(ok, slope, 1e-4, f"lower limit error {lim:.2g}, anchor error {anchor_err:.1g}, "
                   f"monotone {mono}, n={sep.n}, gap={sep.gap:.2g}")


# ------------------------------------------------------------- acceptance

def _acc(name):
    return _register(name, "acceptance", ACCEPTANCE)


@_acc("acceptance.01_sol_ricci")
def _acc1(ctx):
    t0 = time.perf_counter()
    tr = integrate(reduced_field(LrsFamily.SOL_AeqC, 0.0), [1.0, 1.0], IntegratorConfig(t_max=1.0))
    dt = time.perf_counter() - t0
    err = float(np.max(np.abs(tr.final_state - [1.0, 9.0])))
    return _result(err < 1e-8 and dt < 0.1 and tr.t_end == 1.0, err, 1e-8, f"runtime {dt * 1e3:.1f} ms")


@_acc("acceptance.02_nil_ricci")
def _acc2(ctx):
    tr = integrate(reduced_field(LrsFamily.NIL_BeqC, 0.0), [1.0, 1.0], IntegratorConfig(t_max=1.0))
    err = _rel(tr.final_state, orc.nil_ricci_explicit(1, 1, 1))
    drift = float(np.max(np.abs(tr.y[:, 0] * tr.y[:, 1] - 1)))
    return _result(err < 1e-7 and drift < 1e-9, err, 1e-7, f"A*B drift {drift:.2g} (threshold 1e-9)")


@_acc("acceptance.03_sol_conservation")
def _acc3(ctx):
    tr = integrate(reduced_field(LrsFamily.SOL_AeqC, 1.0), [1.0, 4.0], IntegratorConfig(blowup_cap=100.0))
    inv = np.array([orc.sol_rg2_invariant(A, B, 1.0) for A, B in tr.y])
    drift = float(np.max(np.abs(inv / inv[0] - 1)))
    t6 = tr.first_crossing(1, 6.0)
    terr = abs(t6 - orc.sol_rg2_time_of_B(6.0, 4.0, 1.0))
    reached = tr.termination.kind is TerminationKind.BLOWUP and abs(tr.final_state[1] - 100) < 1e-9
    return _result(drift < 1e-8 and terr < 1e-6 and reached, drift, 1e-8,
                   f"time of B=6 error {terr:.2g} (threshold 1e-6)")


@_acc("acceptance.04_nil_separatrix")
def _acc4(ctx):
    return _nil_separatrix_errors(1.0)


def _log_grid(lo, hi, n):
    return np.geomspace(lo, hi, n)


@_acc("acceptance.05_nil_theorem")
def _acc5(ctx):
    t0 = time.perf_counter()
    grid = _log_grid(0.1, 3.0, 20)
    total = agree = 0
    for a in (0.1, 2 / 3, 1.0):
        prob = FlowProblem("lrs", a, geometry="NIL")
        for A0 in grid:
            for B0 in grid:
                total += 1
                agree += verify_classification(prob, (A0, B0)).agree
    dt = time.perf_counter() - t0
    frac = agree / total
    return _result(frac == 1.0 and dt < 30, frac, 1.0, f"{agree}/{total} agree, runtime {dt:.1f} s")


@_acc("acceptance.06_sol_theorem")
def _acc6(ctx):
    prob = FlowProblem("lrs", 1.0, geometry="SOL")
    reps = {b: verify_classification(prob, (1.0, b)) for b in (1.0, 1.9, 2.0, 2.1, 3.0)}
    ok = all(r.agree for r in reps.values())
    err = abs(reps[3.0].terminal_state[0] - 1 / 3)
    return _result(ok and err < 1e-4, err, 1e-4,
                   "; ".join(f"B0={b}: {r.observed.value if r.observed else None}" for b, r in reps.items()))


@_acc("acceptance.07_su2_theorem")
def _acc7(ctx):
    rng = ctx.rng(16)
    data = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=(100, 2)))
    worst_iso = worst_mu = 0.0
    not_ext = 0
    anisotropic = {}
    for a in (0.0, 1.0):
        prob = FlowProblem("lrs", a, geometry="SU2")
        anisotropic[a] = 0
        for A0, B0 in data:
            rep = verify_classification(prob, (A0, B0), IntegratorConfig())
            tr = rep.trajectory
            not_ext += tr.termination.kind is not TerminationKind.EXTINCTION or not rep.agree
            A, B = tr.final_state
            worst_iso = max(worst_iso, abs(A / B - 1))
            anisotropic[a] += abs(A / B - 1) >= 1e-3
            if a == 0.0:
                mu0 = B0 - A0
                for (x, y) in tr.y:
                    mu = y - x
                    if abs(mu) >= 1e-3 * x and abs(mu0) > 0:
                        worst_mu = max(worst_mu, abs(mu / orc.su2_ricci_trajectory_mu(x, A0, mu0) - 1))
    ok = not_ext == 0 and worst_iso < 1e-3 and worst_mu < 1e-5
    return _result(ok, worst_iso, 1e-3,
                   f"runs not reaching extinction {not_ext}; A/B not within 1e-3 of 1 at the floor: "
                   f"alpha=0 {anisotropic[0.0]}/100, alpha=1 {anisotropic[1.0]}/100; "
                   f"Ricci mu(A) error {worst_mu:.2g} (threshold 1e-5)")


@_acc("acceptance.08_sl2r_theorem")
def _acc8(ctx):
    sep = ctx.separatrix()
    lim = abs(sep.lower_limit - 2.0)
    rng = ctx.rng(17)
    cs = np.exp(rng.uniform(math.log(0.01), math.log(9.0), 50))
    prob = FlowProblem("lrs", 1.0, geometry="SL2R")
    cfg = IntegratorConfig.singular(t_max=1e9)
    above_bad = below_bad = crossings = 0
    for C0 in cs:
        phi = sep(C0)
        for f in (1.05, 0.5):
            tr = integrate(prob.field(), [C0, f * phi], cfg)
            sides = {sep.side(c, a) for c, a in tr.y} - {0}
            crossings += len(sides) > 1
            C, A = tr.final_state
            if f > 1:
                above_bad += not (tr.termination.kind is TerminationKind.BLOWUP
                                  and 1 in tr.termination.components)
            else:
                near = math.hypot(C, A - 2.0) < 1e-2
                below_bad += not (tr.termination.kind is TerminationKind.EXTINCTION or near)
    # Ricci limit
    ricci = FlowProblem("lrs", 0.0, geometry="SL2R")
    worst = 0.0
    # near the pole of A(C) the relative error in A is the error in C times about A,
    # so this comparison needs tight tolerances in log coordinates
    tight = IntegratorConfig.singular(t_max=1e9, rel_tol=1e-12)
    for C0, A0 in np.exp(rng.uniform(-1.5, 1.5, size=(20, 2))):
        tr = integrate(ricci.field(), [C0, A0], tight)
        for c, a in tr.y[1:]:
            worst = max(worst, abs(a / orc.sl2r_ricci_trajectory(c, C0, A0) - 1))
        worst = max(worst, abs(tr.final_state[0] / orc.sl2r_ricci_climit(C0, A0) - 1))
    ok = lim < 1e-3 and above_bad == below_bad == crossings == 0 and worst < 1e-4
    return _result(ok, lim, 1e-3, f"above not blowing up {above_bad}, below unresolved {below_bad}, "
                   f"crossings {crossings}, Ricci A(C)/Cbar error {worst:.2g} (threshold 1e-4)")


@_acc("acceptance.09_constant_curvature")
def _acc9(ctx):
    worst = 0.0
    for a in (0.0, 0.5, 1.0, 3.0):
        p = ConstCurvatureParams(1.0, 3, a)
        tr = integrate(const_curvature_field(p), [1.0], IntegratorConfig.singular())
        worst = max(worst, abs(tr.termination.singular_time - orc.const_curv_extinction_time(1.0, a, 3)))
    outcomes = {}
    for a in (0.5, 3.0):
        rep = verify_classification(FlowProblem("const_curv", a, K=-1.0), (1.0,))
        outcomes[a] = (rep.predicted, rep.observed, rep.agree)
    ok = (worst < 1e-5 and outcomes[0.5][1] is Regime.ExpandImmortal
          and outcomes[3.0][1] is Regime.ContractFiniteTime and all(o[2] for o in outcomes.values()))
    return _result(ok, worst, 1e-5, f"K=-1: alpha=0.5 {outcomes[0.5][1].value}, "
                   f"alpha=3 {outcomes[3.0][1].value}")


@_acc("acceptance.10_property_suites")
def _acc10(ctx):
    names = ["geometry.assembly_identity", "geometry.ricci_scale_invariance", "geometry.rm2_scaling",
             "geometry.sectional_scaling", "geometry.lrs_preservation", "geometry.nil_ratio_identity",
             "flows.assembly_consistency", "flows.nil_xi_sign", "integrate.convergence_order"]
    failed = [n for n in names if not CHECKS[n][1](ctx)[0]]
    return _result(not failed, len(failed), 0, "failed: " + ", ".join(failed) if failed else "")


def run_checks(ctx: Optional[Context] = None, include_acceptance: bool = True,
               only: Optional[list] = None) -> list:
    """Run registered checks in a fixed order and collect their results."""
    ctx = ctx or Context()
    table = dict(CHECKS)
    if include_acceptance:
        table.update(ACCEPTANCE)
    out = []
    for name, (group, fn) in table.items():
        if only and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, measured, thr, detail = fn(ctx)
        except Exception as exc:  # a crashing check is a failing check
            ok, measured, thr, detail = False, None, None, f"raised {type(exc).__name__}: {exc}"
        out.append(CheckResult(name, group, ok, measured, thr, detail, time.perf_counter() - t0))
    return out


def report_dict(results: list, perturb: bool = False) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "perturbed_rhs": perturb,
        "n_checks": len(results),
        "n_failed": sum(not r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
