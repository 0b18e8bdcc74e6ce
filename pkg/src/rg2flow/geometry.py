"""Curvature of diagonal left-invariant metrics on unimodular 3D Lie groups.

Frame conventions: ``{f_i}`` is a fixed left-invariant Milnor frame with
``[f2, f3] = lambda f1``, ``[f3, f1] = mu f2``, ``[f1, f2] = nu f3`` and the
metric is ``diag(A, B, C)`` in that frame.  Sectional curvatures are
reported in the fixed frame, i.e. ``K23 = B C K(e2 ^ e3)`` where
``e_i`` is the orthonormal frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

__all__ = [
    "StructureConstants",
    "DiagonalMetric",
    "CurvatureSummary",
    "sectional_curvatures",
    "orthonormal_sectional_curvatures",
    "ricci_diagonal",
    "rm2_diagonal",
    "rg2_rhs",
    "curvature_summary",
    "rg2_field",
]


@dataclass(frozen=True)
class StructureConstants:
    lam: float
    mu: float
    nu: float

    PRESETS: ClassVar[dict] = {
        "SU2": (-2.0, -2.0, -2.0),
        "NIL": (-2.0, 0.0, 0.0),
        "SOL": (-2.0, 0.0, 2.0),
        "SL2R": (-2.0, -2.0, 2.0),
        "R3": (0.0, 0.0, 0.0),
    }

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError(f"structure constants must be finite: {self}")

    def as_tuple(self) -> tuple:
        return (self.lam, self.mu, self.nu)

    @classmethod
    def preset(cls, name: str) -> "StructureConstants":
        try:
            return cls(*cls.PRESETS[name.upper()])
        except KeyError:
            raise ValueError(
                f"unknown geometry {name!r}; choose from {sorted(cls.PRESETS)}") from None

    @classmethod
    def su2(cls):
        return cls.preset("SU2")

    @classmethod
    def nil(cls):
        return cls.preset("NIL")

    @classmethod
    def sol(cls):
        return cls.preset("SOL")

    @classmethod
    def sl2r(cls):
        return cls.preset("SL2R")

    @classmethod
    def r3(cls):
        return cls.preset("R3")


@dataclass(frozen=True)
class DiagonalMetric:
    A: float
    B: float
    C: float

    def __post_init__(self):
        for name, v in zip("ABC", self.as_tuple()):
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"metric coefficient {name} must be positive, got {v!r}")

    def as_tuple(self) -> tuple:
        return (self.A, self.B, self.C)

    def scaled(self, c: float) -> "DiagonalMetric":
        return DiagonalMetric(c * self.A, c * self.B, c * self.C)


@dataclass(frozen=True)
class CurvatureSummary:
    k23: float
    k31: float
    k12: float
    r11: float
    r22: float
    r33: float
    rm2_11: float
    rm2_22: float
    rm2_33: float


def _orthonormal_sectional(l, m, n, A, B, C):
    abc4 = 4.0 * A * B * C
    k_e23 = (m * B - n * C) ** 2 / abc4 + l * (2 * m * B + 2 * n * C - 3 * l * A) / (4 * B * C)
    k_e31 = (n * C - l * A) ** 2 / abc4 + m * (2 * n * C + 2 * l * A - 3 * m * B) / (4 * A * C)
    k_e12 = (l * A - m * B) ** 2 / abc4 + n * (2 * l * A + 2 * m * B - 3 * n * C) / (4 * A * B)
    return k_e23, k_e31, k_e12


def _frame_sectional(l, m, n, A, B, C):
    k_e23, k_e31, k_e12 = _orthonormal_sectional(l, m, n, A, B, C)
    return B * C * k_e23, A * C * k_e31, A * B * k_e12


def _ricci(l, m, n, A, B, C):
    r11 = ((l * A) ** 2 - (m * B - n * C) ** 2) / (2 * B * C)
    r22 = ((m * B) ** 2 - (n * C - l * A) ** 2) / (2 * A * C)
    r33 = ((n * C) ** 2 - (l * A - m * B) ** 2) / (2 * A * B)
    return r11, r22, r33


def _rm2(l, m, n, A, B, C):
    k23, k31, k12 = _frame_sectional(l, m, n, A, B, C)
    q11 = 2 * k12 ** 2 / (A * B * B) + 2 * k31 ** 2 / (A * C * C)
    q22 = 2 * k12 ** 2 / (A * A * B) + 2 * k23 ** 2 / (C * C * B)
    q33 = 2 * k31 ** 2 / (A * A * C) + 2 * k23 ** 2 / (B * B * C)
    return q11, q22, q33


def _rg2(l, m, n, A, B, C, alpha):
    r = _ricci(l, m, n, A, B, C)
    q = _rm2(l, m, n, A, B, C)
    half = 0.5 * alpha
    return (-2 * r[0] - half * q[0], -2 * r[1] - half * q[1], -2 * r[2] - half * q[2])


def _args(sc: StructureConstants, g: DiagonalMetric):
    return (sc.lam, sc.mu, sc.nu, g.A, g.B, g.C)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ValueError(f"coupling alpha must be finite and non-negative, got {alpha!r}")
    return alpha


def orthonormal_sectional_curvatures(sc: StructureConstants, g: DiagonalMetric) -> tuple:
    """K(e2^e3), K(e3^e1), K(e1^e2) in the orthonormal frame."""
    return _orthonormal_sectional(*_args(sc, g))


def sectional_curvatures(sc: StructureConstants, g: DiagonalMetric) -> tuple:
    """Fixed-frame sectional curvatures (K23, K31, K12)."""
    return _frame_sectional(*_args(sc, g))


def ricci_diagonal(sc: StructureConstants, g: DiagonalMetric) -> tuple:
    """Diagonal Ricci components (R11, R22, R33) in the fixed frame."""
    return _ricci(*_args(sc, g))


def rm2_diagonal(sc: StructureConstants, g: DiagonalMetric) -> tuple:
    """Diagonal of the quadratic curvature term R_iklm R_j^klm in the fixed frame."""
    return _rm2(*_args(sc, g))


def rg2_rhs(sc: StructureConstants, g: DiagonalMetric, alpha: float) -> tuple:
    """(dA/dt, dB/dt, dC/dt) = -2 Ric - (alpha/2) Rm^2; alpha = 0 gives Ricci flow."""
    return _rg2(*_args(sc, g), _check_alpha(alpha))


def curvature_summary(sc: StructureConstants, g: DiagonalMetric) -> CurvatureSummary:
    args = _args(sc, g)
    return CurvatureSummary(*_frame_sectional(*args), *_ricci(*args), *_rm2(*args))


def rg2_field(sc: StructureConstants, alpha: float):
    """The RG-2 vector field on (A, B, C) as a plain callable for the integrator."""
    l, m, n = sc.as_tuple()
    alpha = _check_alpha(alpha)

    def field(y):
        return _rg2(l, m, n, y[0], y[1], y[2], alpha)
    return field
