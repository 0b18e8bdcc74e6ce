"""Reduced (LRS) planar systems, trajectory ODEs and the constant-curvature flow.

Reduced coordinates follow the phase-plane axes used for each family:

============  ===========  ======
family        identified   (x, y)
============  ===========  ======
SU2_BeqC      B = C        (A, B)
NIL_BeqC      B = C        (A, B)
SOL_AeqC      A = C        (A, B)
SL2R_AeqB     A = B        (C, A)
============  ===========  ======

The Sol reduced system runs at half the rate of the general curvature
assembly restricted to A = C (``rg2_rhs = 2 * reduced_rhs``); it is the
time-rescaled form in which the explicit and implicit Sol solutions hold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .geometry import DiagonalMetric, StructureConstants, _check_alpha

__all__ = [
    "LrsFamily",
    "ReducedState",
    "ConstCurvatureParams",
    "reduced_rhs",
    "reduced_field",
    "trajectory_rhs",
    "const_curvature_rhs",
    "const_curvature_field",
    "product_factor_rhs",
    "product_field",
    "embed",
    "project",
    "nil_xi_rate",
    "sl2r_slope",
    "SOL_TIME_SCALE",
]

# rg2_rhs restricted to A = C equals SOL_TIME_SCALE * reduced Sol RHS
SOL_TIME_SCALE = 2.0


class LrsFamily(enum.Enum):
    SU2_BeqC = "SU2"
    NIL_BeqC = "NIL"
    SOL_AeqC = "SOL"
    SL2R_AeqB = "SL2R"

    @property
    def structure_constants(self) -> StructureConstants:
        return StructureConstants.preset(self.value)

    @property
    def axes(self) -> tuple:
        return ("C", "A") if self is LrsFamily.SL2R_AeqB else ("A", "B")

    @classmethod
    def from_name(cls, name: str) -> "LrsFamily":
        key = name.upper().replace("(", "").replace(")", "").replace(",", "")
        key = {"SL2": "SL2R"}.get(key, key)
        for fam in cls:
            if fam.value == key or fam.name.upper() == key:
                return fam
        raise ValueError(f"no LRS reduction for geometry {name!r}")


@dataclass(frozen=True)
class ReducedState:
    x: float
    y: float

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0 and math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"reduced state must be positive, got ({self.x!r}, {self.y!r})")


@dataclass(frozen=True)
class ConstCurvatureParams:
    K: float
    n: int = 3
    alpha: float = 0.0

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError(f"dimension n must be 2 or 3, got {self.n!r}")
        _check_alpha(self.alpha)


def _su2(A, B, a):
    B2 = B * B
    return (-(4 * A * A * B2 + 2 * a * A ** 3) / (B2 * B2),
            (4 * A * B2 - 8 * B2 * B - 10 * a * A * A - 16 * a * B2 + 24 * a * A * B) / (B2 * B))


def _nil(A, B, a):
    B2 = B * B
    return (-4 * A * A / B2 - 2 * a * A ** 3 / (B2 * B2),
            4 * A / B - 10 * a * A * A / (B2 * B))


def _sol(A, B, a):
    return (-16 * a * A / (B * B), 8 - 16 * a / B)


def _sl2r(C, A, a):
    A2 = A * A
    return (-4 * C * C / A2 - 2 * a * C ** 3 / (A2 * A2),
            8 + 4 * C / A - a * (16 * A2 + 24 * A * C + 10 * C * C) / (A2 * A))


_REDUCED = {
    LrsFamily.SU2_BeqC: _su2,
    LrsFamily.NIL_BeqC: _nil,
    LrsFamily.SOL_AeqC: _sol,
    LrsFamily.SL2R_AeqB: _sl2r,
}


def _coerce_state(s) -> ReducedState:
    return s if isinstance(s, ReducedState) else ReducedState(*s)


def reduced_rhs(fam: LrsFamily, s, alpha: float) -> tuple:
    """(dx/dt, dy/dt) of the reduced system for ``fam`` at state ``s``."""
    s = _coerce_state(s)
    return _REDUCED[fam](s.x, s.y, _check_alpha(alpha))


def reduced_field(fam: LrsFamily, alpha: float):
    """Reduced vector field as a plain callable ``f([x, y])`` for the integrator."""
    f = _REDUCED[fam]
    alpha = _check_alpha(alpha)
    return lambda u: f(u[0], u[1], alpha)


def trajectory_rhs(fam: LrsFamily, s, alpha: float) -> float:
    """Slope of the orbit through ``s``: dB/dA (SU2, Nil) or dA/dC (SL2R)."""
    s = _coerce_state(s)
    a = _check_alpha(alpha)
    if fam is LrsFamily.SU2_BeqC:
        A, B = s.x, s.y
        num = 4 * B ** 4 - 2 * A * B ** 3 + a * (5 * A * A * B - 12 * A * B * B + 8 * B ** 3)
        return num / (2 * A * A * B * B + a * A ** 3)
    if fam is LrsFamily.NIL_BeqC:
        A, B = s.x, s.y
        return B * (5 * a * A - 2 * B * B) / (A * (2 * B * B + a * A))
    if fam is LrsFamily.SL2R_AeqB:
        C, A = s.x, s.y
        return sl2r_slope(A, C, a)
    raise ValueError(f"no trajectory ODE for {fam.name}; Sol orbits are known in closed form")


def sl2r_slope(A: float, C: float, alpha: float) -> float:
    """dA/dC along SL(2,R) LRS orbits."""
    num = 4 * A ** 3 + 2 * A * A * C - 8 * alpha * A * A - 12 * alpha * A * C - 5 * alpha * C * C
    return -A * num / (C * C * (2 * A * A + alpha * C))


def embed(fam: LrsFamily, s) -> DiagonalMetric:
    """Full diagonal metric for a reduced state."""
    s = _coerce_state(s)
    if fam in (LrsFamily.SU2_BeqC, LrsFamily.NIL_BeqC):
        return DiagonalMetric(s.x, s.y, s.y)
    if fam is LrsFamily.SOL_AeqC:
        return DiagonalMetric(s.x, s.y, s.x)
    return DiagonalMetric(s.y, s.y, s.x)


def project(fam: LrsFamily, dA: float, dB: float, dC: float) -> tuple:
    """Reduced (dx, dy) from a full-metric velocity on the LRS plane."""
    if fam is LrsFamily.SL2R_AeqB:
        return (dC, dA)
    return (dA, dB)


def nil_xi_rate(A: float, B: float, alpha: float) -> float:
    """Time derivative of xi = dA/dt along the reduced Nil flow."""
    return 8 * A ** 3 / B ** 8 * (8 * B ** 4 - alpha * B * B * A - 34 * alpha ** 2 * A * A)


def const_curvature_rhs(p: ConstCurvatureParams, phi: float) -> float:
    """d(phi)/dt for g(t) = phi(t) g0 with g0 of constant curvature K."""
    if not phi > 0:
        raise ValueError(f"phi must be positive, got {phi!r}")
    return -2 * p.K * (p.n - 1) - p.alpha * p.K ** 2 * (p.n - 1) / phi


def const_curvature_field(p: ConstCurvatureParams):
    K, n1, a = p.K, p.n - 1, p.alpha
    return lambda u: (-2 * K * n1 - a * K * K * n1 / u[0],)


def product_factor_rhs(kappa: float, alpha: float, E: float) -> float:
    """dE/dt for the surface factor of g = D dr^2 + E gamma, gamma of curvature kappa.

    This is the n = 2 constant-curvature flow for phi = E/E0 with
    K = kappa/E0, rewritten in E.
    """
    if not E > 0:
        raise ValueError(f"E must be positive, got {E!r}")
    return -2 * kappa - _check_alpha(alpha) * kappa * kappa / E


def product_field(kappa: float, alpha: float):
    """Vector field on (D, E); the flat factor D does not evolve."""
    a = _check_alpha(alpha)
    return lambda u: (0.0, -2 * kappa - a * kappa * kappa / u[1])
