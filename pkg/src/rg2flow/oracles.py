"""Closed-form and implicit solutions used as ground truth for the integrator.

Implicit relations are exposed as residuals (zero on exact solutions) or as
the explicitly solvable half of the relation, never solved by iteration here.
"""

from __future__ import annotations

import math

__all__ = [
    "OracleDomainError",
    "const_curv_implicit_residual",
    "const_curv_extinction_time",
    "nil_ricci_explicit",
    "nil_separatrix_B",
    "nil_separatrix_A",
    "su2_ricci_k",
    "su2_ricci_trajectory_mu",
    "sol_rg2_invariant",
    "sol_rg2_time_of_B",
    "sol_boundary_solution",
    "sl2r_ricci_trajectory",
    "sl2r_ricci_climit",
]


class OracleDomainError(ValueError):
    """Arguments outside the domain where a closed form is valid (pole, log of 0, branch)."""


def const_curv_implicit_residual(K: float, alpha: float, t: float, phi: float,
                                 n: int = 3) -> float:
    """phi minus the implicit constant-curvature solution started from phi(0) = 1."""
    if not phi > 0:
        raise OracleDomainError(f"phi must be positive, got {phi!r}")
    denom = 2 + alpha * K
    if denom == 0:
        raise OracleDomainError("2 + alpha*K vanishes")
    if alpha == 0 or K == 0:
        return phi - (1 - 2 * K * (n - 1) * t)
    ratio = (2 * phi + alpha * K) / denom
    if ratio == 0:
        raise OracleDomainError("log argument vanishes (2*phi + alpha*K = 0)")
    return phi - (-2 * K * (n - 1) * t + 1 + 0.5 * alpha * K * math.log(abs(ratio)))


def const_curv_extinction_time(K: float, alpha: float, n: int = 3) -> float:
    """Time at which phi reaches 0 for positive curvature, phi(0) = 1.

    Equals 1/(2K(n-1)) + alpha/(4(n-1)) ln(alpha K/(2 + alpha K)); the
    correction is negative, so coupling shortens the lifetime.
    """
    if not K > 0:
        raise OracleDomainError(f"extinction time needs K > 0, got {K!r}")
    base = 1 / (2 * K * (n - 1))
    if alpha == 0:
        return base
    return base + alpha / (4 * (n - 1)) * math.log(abs(alpha * K / (2 + alpha * K)))


def nil_ricci_explicit(A0: float, B0: float, t: float) -> tuple:
    """Ricci flow (alpha = 0) on LRS Nil: A = (k1/12) s^(-1/3), B = s^(1/3), s = k1 t + k2.

    Constants matched to the initial data: k1 = 12 A0 B0, k2 = B0**3.
    """
    if t < 0:
        raise OracleDomainError("forward time only")
    k1 = 12 * A0 * B0
    s = k1 * t + B0 ** 3
    return (k1 / 12 * s ** (-1 / 3), s ** (1 / 3))


def nil_separatrix_B(A: float, alpha: float) -> float:
    """B on the invariant parabola B**2 = (3 alpha/2) A."""
    return math.sqrt(1.5 * alpha * A)


def nil_separatrix_A(A0: float, alpha: float, t: float) -> float:
    """A(t) on the Nil separatrix, which decays as exp(-32 t/(9 alpha))."""
    return A0 * math.exp(-32 * t / (9 * alpha))


def su2_ricci_k(A0: float, mu0: float) -> float:
    """Constant k in mu(A) = -A^3/(A^2 - k) through (A0, mu0); inf for mu0 = 0."""
    if mu0 == 0:
        return math.inf
    return A0 * A0 + A0 ** 3 / mu0


def su2_ricci_trajectory_mu(A: float, A0: float, mu0: float) -> float:
    """mu = B - A along the Ricci orbit of LRS SU(2) through (A0, A0 + mu0)."""
    if not (A > 0 and A0 > 0):
        raise OracleDomainError("A and A0 must be positive")
    if not mu0 > -A0:
        raise OracleDomainError("mu0 must exceed -A0 so that B0 > 0")
    if mu0 == 0:
        return 0.0
    k = su2_ricci_k(A0, mu0)
    denom = A * A - k
    if denom == 0 or abs(denom) <= 1e-14 * max(A * A, abs(k)):
        raise OracleDomainError(f"pole A^2 = k at A={A!r}")
    return -A ** 3 / denom


def sol_rg2_invariant(A: float, B: float, alpha: float) -> float:
    """A (1 - 2 alpha/B), constant along LRS Sol RG-2 flows."""
    if B == 0:
        raise OracleDomainError("B must be nonzero")
    return A * (1 - 2 * alpha / B)


def sol_rg2_time_of_B(B: float, B0: float, alpha: float) -> float:
    """Time at which the LRS Sol flow from B0 reaches B."""
    if alpha == 0:
        return (B - B0) / 8
    c = 2 * alpha
    if B0 == c:
        if B == c:
            raise OracleDomainError("B is stationary at 2 alpha; time is undetermined")
        raise OracleDomainError("B stays at 2 alpha and never reaches another value")
    if (B - c) * (B0 - c) <= 0:
        raise OracleDomainError(f"B={B!r} and B0={B0!r} lie on different sides of 2 alpha")
    return (B - B0 + c * math.log(abs((B - c) / (B0 - c)))) / 8


def sol_boundary_solution(A0: float, alpha: float, t: float) -> tuple:
    """Exact solution for B0 = 2 alpha: A = A0 exp(-4t/alpha), B = 2 alpha."""
    return (A0 * math.exp(-4 * t / alpha), 2 * alpha)


def sl2r_ricci_trajectory(C: float, C0: float, A0: float) -> float:
    """A(C) along the Ricci orbit of LRS SL(2,R) through (C0, A0)."""
    denom = C * C * (A0 + C0) - C0 * C0 * A0
    if denom <= 0:
        raise OracleDomainError(
            f"C={C!r} at or below the limit value {sl2r_ricci_climit(C0, A0)!r}")
    return C0 * C0 * A0 * C / denom


def sl2r_ricci_climit(C0: float, A0: float) -> float:
    """Limit of C along the Ricci orbit through (C0, A0) as A grows without bound."""
    if not (C0 > 0 and A0 > 0):
        raise OracleDomainError("C0 and A0 must be positive")
    return math.sqrt(C0 * C0 * A0 / (A0 + C0))
