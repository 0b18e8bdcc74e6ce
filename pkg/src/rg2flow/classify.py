"""Regime prediction from the theorems, and its verification by integration.

Predictions follow the case splits exactly, boundaries included:

* constant curvature: K = 0 fixed, K > 0 contracts, K < 0 expands iff
  ``alpha |K| < 2`` (per unit initial scale);
* Nil: ``alpha >= 2 B0 C0 / (3 A0)`` shrinks in finite time, otherwise a
  pancake; exact equality with ``B0 = C0`` is the separatrix, which decays
  exponentially;
* Sol (A = C): ``B0 > 2 alpha`` cigar, ``B0 = 2 alpha`` boundary,
  ``B0 < 2 alpha`` finite-time shrinker;
* SU(2) (B = C): always a finite-time shrinker;
* SL(2,R) (A = B): above the separatrix a pancake, on or below it either
  a finite-time shrinker or convergence to ``(C, A) = (0, 2 alpha)``.

Observed regimes are read off a trajectory from its termination and the
signs of the final velocity, see :func:`observe_regime`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .flows import LrsFamily
from .integrate import IntegratorConfig, TerminationKind, Trajectory, integrate
from .separatrix import (SeparatrixCurve, SeparatrixRangeError, build_sl2r_separatrix, sl2r_g,
                         sl2r_h)
from .systems import FlowProblem, Mode

__all__ = [
    "Regime",
    "ObservationThresholds",
    "Observation",
    "VerificationReport",
    "classify_constant_curvature",
    "classify_nil",
    "classify_sol",
    "sol_cigar_limit",
    "classify_su2",
    "classify_sl2r",
    "predict_regime",
    "observe_regime",
    "compatible",
    "verify_classification",
    "sl2r_h",
    "sl2r_g",
    "build_sl2r_separatrix",
    "SeparatrixCurve",
]


class Regime(str, enum.Enum):
    FixedPoint = "FixedPoint"
    ShrinkerFiniteTime = "ShrinkerFiniteTime"
    ShrinkerExponential = "ShrinkerExponential"
    PancakeImmortal = "PancakeImmortal"
    CigarImmortal = "CigarImmortal"
    SolBoundary = "SolBoundary"
    SL2RBoundaryOrShrinker = "SL2RBoundaryOrShrinker"
    ExpandImmortal = "ExpandImmortal"
    ContractFiniteTime = "ContractFiniteTime"


def _positive(*vals):
    for v in vals:
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"initial data must be positive, got {vals}")


def classify_constant_curvature(K: float, alpha: float, n: int = 3) -> Regime:
    """Regime of ``g = phi g0`` with ``g0`` of constant curvature K and ``phi(0) = 1``.

    At ``alpha |K| = 2`` with K < 0 the right-hand side vanishes at phi = 1,
    so the metric is stationary and FixedPoint is returned.
    """
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    if K == 0:
        return Regime.FixedPoint
    if K > 0:
        return Regime.ContractFiniteTime
    s = alpha * abs(K)
    if s < 2:
        return Regime.ExpandImmortal
    if s > 2:
        return Regime.ContractFiniteTime
    return Regime.FixedPoint


def nil_threshold(A0: float, B0: float, C0: float) -> float:
    return 2 * B0 * C0 / (3 * A0)


def classify_nil(A0: float, B0: float, C0: float, alpha: float) -> Regime:
    """Nil regime from ``alpha`` versus ``2 B0 C0 / (3 A0)``.

    Exact equality (to 1e-12 relative) is the separatrix orbit; B/C is
    conserved, so the same reduction applies off the LRS plane.
    """
    _positive(A0, B0, C0)
    thr = nil_threshold(A0, B0, C0)
    if math.isclose(alpha, thr, rel_tol=1e-12, abs_tol=0.0):
        return Regime.ShrinkerExponential
    return Regime.ShrinkerFiniteTime if alpha >= thr else Regime.PancakeImmortal


def classify_sol(A0: float, B0: float, alpha: float) -> Regime:
    """Sol (A = C) regime from ``B0`` versus ``2 alpha``."""
    _positive(A0, B0)
    if B0 > 2 * alpha:
        return Regime.CigarImmortal
    if B0 == 2 * alpha:
        return Regime.SolBoundary
    return Regime.ShrinkerFiniteTime


def sol_cigar_limit(A0: float, B0: float, alpha: float) -> float:
    """Limit of A for Sol cigars, ``A0 (1 - 2 alpha / B0)``."""
    if not B0 > 2 * alpha:
        raise ValueError("limit exists only for B0 > 2 alpha")
    return A0 * (1 - 2 * alpha / B0)


def classify_su2(A0: float, B0: float, alpha: float) -> Regime:
    """SU(2) (B = C): every datum becomes singular in finite time."""
    _positive(A0, B0)
    return Regime.ShrinkerFiniteTime


def classify_sl2r(C0: float, A0: float, alpha: float,
                  sep: Optional[SeparatrixCurve] = None, extend: bool = True) -> Regime:
    """SL(2,R) (A = B) regime relative to the separatrix.

    Parameters
    ----------
    C0, A0 : float
        Initial data in the (C, A) plane.
    alpha : float
    sep : SeparatrixCurve, optional
        Curve built for this ``alpha``; required when ``alpha > 0``.
    extend : bool
        Continue the curve if ``C0`` lies beyond its sampled range.
        With ``extend=False`` such queries raise SeparatrixRangeError.
    """
    _positive(C0, A0)
    if alpha == 0:
        return Regime.PancakeImmortal
    if sep is None:
        raise ValueError("an SL(2,R) separatrix is needed when alpha > 0")
    if not math.isclose(sep.alpha, alpha, rel_tol=1e-12):
        raise ValueError(f"separatrix was built for alpha={sep.alpha}, not {alpha}")
    phi = sep(C0, extend=extend)
    return Regime.PancakeImmortal if A0 > phi else Regime.SL2RBoundaryOrShrinker


def predict_regime(problem: FlowProblem, y0: Sequence[float],
                   sep: Optional[SeparatrixCurve] = None) -> Optional[Regime]:
    """Theorem-based prediction, or None where no theorem applies."""
    y0 = problem.check_initial(y0)
    a = problem.alpha
    if problem.mode is Mode.CONST_CURV:
        return classify_constant_curvature(problem.K / y0[0], a, problem.n)
    if problem.mode is Mode.PRODUCT:
        return classify_constant_curvature(problem.kappa / y0[1], a, 2)
    if problem.mode is Mode.LRS:
        fam = problem.family
        x, y = y0
        if fam is LrsFamily.SU2_BeqC:
            return classify_su2(x, y, a)
        if fam is LrsFamily.NIL_BeqC:
            return classify_nil(x, y, y, a)
        if fam is LrsFamily.SOL_AeqC:
            return classify_sol(x, y, a)
        return classify_sl2r(x, y, a, sep)
    A, B, C = y0
    name = problem.preset_name
    if name == "R3":
        return Regime.FixedPoint
    if name == "NIL":
        return classify_nil(A, B, C, a)
    if name == "SU2" and B == C:
        return classify_su2(A, B, a)
    if name == "SOL" and A == C:
        return classify_sol(A, B, a)
    if name == "SL2R" and A == B:
        return classify_sl2r(C, A, a, sep)
    return None


@dataclass(frozen=True)
class ObservationThresholds:
    """Tolerances used to turn a trajectory into an observed regime.

    Attributes
    ----------
    stationary : float
        A component counts as stationary when ``|v| max(t_end, 1) / y`` is
        below this.
    boundary_radius : float
        Distance to ``(C, A) = (0, 2 alpha)`` that counts as arriving there.
    rate_growth : float
        Minimum growth of the logarithmic decay rate between the midpoint
        (in log scale) and the end of an extinction that identifies a
        finite-time singularity rather than exponential decay.
    """

    stationary: float = 1e-4
    boundary_radius: float = 1e-2
    rate_growth: float = 10.0


@dataclass(frozen=True)
class Observation:
    regime: Optional[Regime]
    unconfirmed: bool = False
    note: str = ""


def _trends(traj: Trajectory, thr: ObservationThresholds) -> np.ndarray:
    y = traj.final_state
    v = traj.velocity()
    scale = max(traj.t_end, 1.0)
    trend = np.sign(v).astype(int)
    trend[np.abs(v) * scale < thr.stationary * np.abs(y)] = 0
    return trend


def _log_rate(traj: Trajectory, i: int, index: int) -> float:
    y = traj.y[index]
    return abs(traj.velocity(index)[i] / y[i])


def _decay_is_finite_time(traj: Trajectory, comps: Sequence[int], thr: ObservationThresholds) -> bool:
    """Compare log decay rates at the log-midpoint and at the end."""
    best = 0.0
    for i in comps:
        col = traj.y[:, i]
        y_end = col[-1]
        y_mid = math.sqrt(col[0] * y_end) if col[0] > y_end else col[0]
        j = int(np.argmin(np.abs(np.log(col) - math.log(y_mid))))
        j = min(j, len(col) - 2)
        r_mid = _log_rate(traj, i, j)
        r_end = _log_rate(traj, i, -1)
        best = max(best, r_end / r_mid if r_mid > 0 else math.inf)
    return best > thr.rate_growth


def _expanding_regime(trend: np.ndarray, mult: Sequence[int]) -> Optional[Regime]:
    up = sum(m for tr, m in zip(trend, mult) if tr > 0)
    if up >= 2:
        return Regime.PancakeImmortal
    if up == 1:
        return Regime.CigarImmortal
    return None


def observe_regime(problem: FlowProblem, traj: Trajectory,
                   thr: ObservationThresholds = ObservationThresholds()) -> Observation:
    """Map a termination and the final trends to an observed regime.

    Rules
    -----
    * StepFailure is ambiguous and yields no regime.
    * Scalar and product flows: extinction contracts, growth expands,
      no motion is a fixed point.
    * SL(2,R) runs that end near ``(0, 2 alpha)`` are
      SL2RBoundaryOrShrinker.
    * Extinction with every component decreasing is a shrinker; the log
      decay rate decides finite-time versus exponential.
    * Otherwise the expanding directions, counted with the number of
      metric coefficients each component represents, give a pancake (two)
      or a cigar (one).
    * Sol with B stationary and A decaying is the Sol boundary.
    * Any verdict drawn at ReachedTMax is a trend extrapolation and is
      marked unconfirmed.
    """
    kind = traj.termination.kind
    if kind is TerminationKind.STEP_FAILURE:
        return Observation(None, False, "ambiguous: step failure")
    at_tmax = kind is TerminationKind.REACHED_T_MAX
    trend = _trends(traj, thr)
    y = traj.final_state
    mult = problem.multiplicities
    tag = "asymptotic (unconfirmed)" if at_tmax else ""

    def obs(reg, note=""):
        return Observation(reg, at_tmax and reg is not None, note or tag)

    if problem.mode in (Mode.CONST_CURV, Mode.PRODUCT):
        k = -1  # the evolving factor
        if kind is TerminationKind.EXTINCTION:
            return obs(Regime.ContractFiniteTime)
        if kind is TerminationKind.BLOWUP or trend[k] > 0:
            return obs(Regime.ExpandImmortal)
        if trend[k] < 0:
            return obs(Regime.ContractFiniteTime)
        return obs(Regime.FixedPoint)

    name = problem.preset_name
    if name == "SL2R":
        C, A = (y[0], y[1]) if problem.mode is Mode.LRS else (y[2], y[0])
        if math.hypot(C, A - 2 * problem.alpha) < thr.boundary_radius and problem.alpha > 0:
            return obs(Regime.SL2RBoundaryOrShrinker)

    if np.all(trend == 0):
        return obs(Regime.FixedPoint)

    if kind is TerminationKind.EXTINCTION or (at_tmax and np.all(trend < 0)):
        if np.all(trend < 0):
            comps = traj.termination.components or tuple(range(len(y)))
            finite = _decay_is_finite_time(traj, comps, thr)
            return obs(Regime.ShrinkerFiniteTime if finite else Regime.ShrinkerExponential)

    if name == "SOL":
        b = 1  # B is the second component in both the LRS and the full state
        others = [i for i in range(len(y)) if i != b]
        if trend[b] == 0 and all(trend[i] < 0 for i in others):
            return obs(Regime.SolBoundary)

    reg = _expanding_regime(trend, mult)
    if reg is not None:
        return obs(reg)
    return Observation(None, False, "ambiguous: no rule matched the final trends "
                       f"{trend.tolist()} at {traj.termination.tag}")


def compatible(predicted: Optional[Regime], observed: Optional[Regime]) -> bool:
    """Whether an observation confirms a prediction.

    SL2RBoundaryOrShrinker covers both of its outcomes; everything else
    must match exactly.
    """
    if predicted is None or observed is None:
        return False
    if predicted is Regime.SL2RBoundaryOrShrinker:
        return observed in (Regime.ShrinkerFiniteTime, Regime.SL2RBoundaryOrShrinker)
    return predicted is observed


@dataclass
class VerificationReport:
    predicted: Optional[Regime]
    observed: Optional[Regime]
    agree: bool
    unconfirmed: bool
    termination: str
    t_end: float
    singular_time: Optional[float]
    terminal_state: tuple
    note: str = ""
    coordinates: str = "linear"
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    def to_verdict(self) -> dict:
        return {
            "termination": self.termination,
            "t_end": self.t_end,
            "singular_time_estimate": self.singular_time,
            "terminal_state": list(self.terminal_state),
            "predicted_regime": self.predicted.value if self.predicted else None,
            "observed_regime": self.observed.value if self.observed else None,
            "agree": self.agree,
            "unconfirmed": self.unconfirmed,
            "note": self.note,
            "coordinates": self.coordinates,
        }


def _coordinates(cfg: IntegratorConfig) -> str:
    if not cfg.log_coords:
        return "linear"
    return "regularized" if cfg.regularize else "log"


def verify_classification(problem: FlowProblem, y0: Sequence[float],
                          cfg: Optional[IntegratorConfig] = None,
                          sep: Optional[SeparatrixCurve] = None,
                          thresholds: ObservationThresholds = ObservationThresholds(),
                          retry_singular: bool = True) -> VerificationReport:
    """Predict, integrate, observe and compare.

    Parameters
    ----------
    problem : FlowProblem
    y0 : sequence of float
    cfg : IntegratorConfig, optional
        Defaults to ``IntegratorConfig.singular()``.
    sep : SeparatrixCurve, optional
        Needed for SL(2,R) with ``alpha > 0``.
    retry_singular : bool
        If a run in linear or plain log coordinates ends in StepFailure, repeat it
        in regularized log coordinates before reporting.
    """
    y0 = problem.check_initial(y0)
    cfg = cfg or IntegratorConfig.singular()
    try:
        predicted = predict_regime(problem, y0, sep)
    except SeparatrixRangeError:
        predicted = None
    rhs = problem.field()
    traj = integrate(rhs, y0, cfg)
    note = ""
    if traj.termination.kind is TerminationKind.STEP_FAILURE and retry_singular and not cfg.regularize:
        cfg = cfg.replace(log_coords=True, regularize=True)
        traj = integrate(rhs, y0, cfg)
        note = "retried in regularized log coordinates after step failure; "
    ob = observe_regime(problem, traj, thresholds)
    return VerificationReport(
        predicted=predicted,
        observed=ob.regime,
        agree=compatible(predicted, ob.regime),
        unconfirmed=ob.unconfirmed,
        termination=traj.termination.tag,
        t_end=traj.t_end,
        singular_time=traj.termination.singular_time,
        terminal_state=tuple(float(v) for v in traj.final_state),
        note=note + ob.note,
        coordinates=_coordinates(cfg),
        trajectory=traj,
    )
