"""Numerical construction of the SL(2,R) LRS separatrix.

Orbits of the reduced SL(2,R) flow in the (C, A) plane solve
``dA/dC = f(A, C)``.  The zero level set of the numerator of ``f`` is the
graph ``A = g(C)`` of the inverse of

    h(A) = (A / 5 alpha) (A - 6 alpha + sqrt((A - 6 alpha)^2 + 20 alpha (A - 2 alpha))),

which starts at ``(0, 2 alpha)``.  The separatrix ``phi`` is the limit of
the orbits ``phi_n`` through ``(1/n, g(1/n))``.  Integrating upwards in C
is strongly contracting (rate about ``4 alpha / C^2``), so successive
``phi_n`` converge quickly away from the origin, and the sequence is
monotonically decreasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .flows import sl2r_slope
from .integrate import IntegratorConfig, TerminationKind, integrate

__all__ = [
    "SeparatrixNotConverged",
    "SeparatrixRangeError",
    "SeparatrixCurve",
    "sl2r_h",
    "sl2r_g",
    "build_sl2r_separatrix",
    "N_SCHEDULE",
]

N_SCHEDULE = tuple(2 ** k for k in range(4, 21))

_GRID_POINTS = 512
# slack allowed in the phi_n > phi_{n+1} ordering check, relative to A
_ORDER_SLACK = 1e-8


class SeparatrixNotConverged(RuntimeError):
    """Raised when successive curves never agree to ``tol``."""

    def __init__(self, message: str, n_reached: int, gap: float):
        super().__init__(message)
        self.n_reached = n_reached
        self.gap = gap


class SeparatrixRangeError(ValueError):
    """A query lies above the sampled range of a curve built without extension."""


def sl2r_h(A: float, alpha: float) -> float:
    """C = h(A) on the zero level set of the SL(2,R) trajectory slope.

    Parameters
    ----------
    A : float
        Must satisfy ``A >= 2 alpha``.
    alpha : float
        Positive coupling.

    Notes
    -----
    Near ``A = 2 alpha`` the bracket ``A - 6 alpha + sqrt(...)`` cancels, so
    it is evaluated in rationalized form there.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if A < 2 * alpha:
        raise ValueError(f"h is defined for A >= 2 alpha, got A={A!r}")
    d = A - 6 * alpha
    s = math.sqrt(d * d + 20 * alpha * (A - 2 * alpha))
    if d <= 0:
        return 4 * A * (A - 2 * alpha) / (s - d)
    return A / (5 * alpha) * (d + s)


def sl2r_g(C: float, alpha: float) -> float:
    """Inverse of :func:`sl2r_h`: the A for which h(A) = C."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not C > 0:
        raise ValueError(f"g is defined for C > 0, got {C!r}")
    lo = 2 * alpha
    hi = 4 * alpha
    for _ in range(200):
        if sl2r_h(hi, alpha) > C:
            break
        lo, hi = hi, 2 * hi
    else:
        raise RuntimeError(f"could not bracket g({C!r})")
    return brentq(lambda a: sl2r_h(a, alpha) - C, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                  maxiter=500)


def _orbit(alpha: float, c0: float, a0: float, c_end: float, cfg: IntegratorConfig):
    """Orbit through (c0, a0) followed in C towards c_end; state (C, A), 'time' = |C - c0|."""
    sgn = 1.0 if c_end >= c0 else -1.0

    def rhs(y):
        return (sgn, sgn * sl2r_slope(y[1], y[0], alpha))

    return integrate(rhs, [c0, a0], cfg.replace(t_max=abs(c_end - c0)))


@dataclass(frozen=True)
class SeparatrixCurve:
    """Sampled separatrix with spline interpolation and side queries.

    Attributes
    ----------
    alpha : float
    samples : np.ndarray
        (m, 2) array of (C, A), C strictly increasing, starting at the
        anchor ``(1/n, g(1/n))`` of the last curve in the sequence.
    lower_limit : float
        Extrapolated value of A as C -> 0.
    n : int
        Index of the returned curve.
    gap : float
        Sup-norm difference to the previous curve.
    lower_branch : np.ndarray
        Samples of the same orbit continued below the anchor.
    """

    alpha: float
    samples: np.ndarray
    lower_limit: float
    n: int
    gap: float
    tol: float
    lower_branch: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    rel_tol: float = 1e-11
    near_zero: tuple = ()

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 2 or len(s) < 4:
            raise ValueError("samples must be an (m >= 4, 2) array")
        if not np.all(np.diff(s[:, 0]) > 0):
            raise ValueError("sample C values must be strictly increasing")
        object.__setattr__(self, "samples", s)
        slopes = [sl2r_slope(a, c, self.alpha) for c, a in s]
        object.__setattr__(self, "_spline", CubicHermiteSpline(s[:, 0], s[:, 1], slopes))
        if not self.near_zero:
            # fallback: linear continuation to (0, lower_limit)
            c0, a0 = s[0]
            object.__setattr__(self, "near_zero", (0.0, (a0 - self.lower_limit) / c0, self.lower_limit))

    @property
    def c_min(self) -> float:
        return float(self.samples[0, 0])

    @property
    def c_max(self) -> float:
        return float(self.samples[-1, 0])

    @property
    def anchor(self) -> tuple:
        return tuple(self.samples[0])

    def __call__(self, C, extend: bool = False):
        """phi(C); below the anchor the quadratic fitted near C = 0 (which gives lower_limit) is used."""
        C = np.asarray(C, dtype=float)
        if np.any(C <= 0):
            raise ValueError("phi is defined for C > 0")
        if np.any(C > self.c_max * (1 + 1e-14)):
            if not extend:
                raise SeparatrixRangeError(
                    f"C={float(np.max(C))!r} beyond sampled range {self.c_max!r}; pass extend=True")
            return self.extended(float(np.max(C)))(C)
        out = np.where(C < self.c_min, np.polyval(self.near_zero, C), self._spline(np.clip(C, self.c_min, None)))
        return float(out) if out.ndim == 0 else out

    def side(self, C: float, A: float, extend: bool = True) -> int:
        """+1 above the curve, -1 below, 0 on it (within ``rel_tol``)."""
        phi = self(C, extend=extend)
        if abs(A - phi) <= self.rel_tol * phi:
            return 0
        return 1 if A > phi else -1

    def extended(self, c_new: float) -> "SeparatrixCurve":
        """Continue the same orbit past ``c_max`` up to ``c_new``."""
        if c_new <= self.c_max:
            return self
        c0, a0 = self.samples[-1]
        tr = _orbit(self.alpha, c0, a0, c_new * (1 + 1e-12), IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13))
        if tr.termination.kind is not TerminationKind.REACHED_T_MAX:
            raise RuntimeError(f"extension of separatrix stopped early: {tr.termination.tag}")
        samples = np.vstack([self.samples, tr.y[1:]])
        return SeparatrixCurve(self.alpha, samples, self.lower_limit, self.n, self.gap, self.tol,
                               self.lower_branch, self.rel_tol, self.near_zero)

    def slope_residual(self, points: int = 200) -> np.ndarray:
        """Relative mismatch between a central-difference slope of the curve and f(A, C).

        Evaluated on a log grid strictly inside the sampled range, skipping the
        initial transient within one anchor spacing of the anchor.
        """
        C = np.geomspace(2 * self.c_min, self.c_max, points + 2)[1:-1]
        dc = 1e-5 * C
        d = (self._spline(C + dc) - self._spline(C - dc)) / (2 * dc)
        f = np.array([sl2r_slope(a, c, self.alpha) for a, c in zip(self._spline(C), C)])
        return np.abs(d - f) / np.abs(f)

    def metadata(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_reached": self.n,
            "achieved_gap": self.gap,
            "tol": self.tol,
            "lower_limit": self.lower_limit,
            "c_min": self.c_min,
            "c_max": self.c_max,
            "samples": int(len(self.samples)),
        }


def _phi_n(alpha, n, c_max, cfg):
    c0 = 1.0 / n
    a0 = sl2r_g(c0, alpha)
    up = _orbit(alpha, c0, a0, c_max, cfg)
    if up.termination.kind is not TerminationKind.REACHED_T_MAX:
        raise RuntimeError(f"phi_{n} stopped before C={c_max}: {up.termination.tag}")
    return up


def build_sl2r_separatrix(alpha: float, c_max: float, tol: float = 1e-6,
                          schedule=N_SCHEDULE,
                          cfg: Optional[IntegratorConfig] = None,
                          lower_branch: bool = True) -> SeparatrixCurve:
    """Build the separatrix as the limit of the orbits phi_n.

    Parameters
    ----------
    alpha : float
        Positive coupling.
    c_max : float
        Upper end of the sampled C range.
    tol : float
        Stop once two successive curves differ by less than ``tol`` (sup
        norm on a log-spaced grid over their common range).
    schedule : sequence of int
        Increasing values of n; the default is ``2**k`` for k = 4..20.
    cfg : IntegratorConfig, optional
        Integrator settings for each orbit.

    Returns
    -------
    SeparatrixCurve

    Raises
    ------
    SeparatrixNotConverged
        If the schedule is exhausted; carries the last gap.
    AssertionError
        If the ordering phi_n > phi_{n+1} fails on the common grid.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not (c_max > 0 and tol > 0):
        raise ValueError("c_max and tol must be positive")
    cfg = cfg or IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    prev = None
    prev_n = None
    gap = math.inf
    for n in schedule:
        if 1.0 / n >= c_max:
            continue
        tr = _phi_n(alpha, n, c_max, cfg)
        if prev is not None:
            grid = np.geomspace(1.0 / prev_n, c_max, _GRID_POINTS)
            s = grid - 1.0 / prev_n
            a_prev = np.array([prev.at(x)[1] for x in s])
            a_cur = np.array([tr.at(x)[1] for x in grid - 1.0 / n])
            diff = a_prev - a_cur
            if np.any(diff < -_ORDER_SLACK * np.abs(a_cur)):
                bad = int(np.argmin(diff))
                raise AssertionError(
                    f"ordering phi_{prev_n} > phi_{n} violated at C={grid[bad]:.6g} "
                    f"by {diff[bad]:.3g}")
            gap = float(np.max(np.abs(diff)))
            if gap < tol:
                return _assemble(alpha, n, tr, gap, tol, cfg, lower_branch)
        prev, prev_n = tr, n
    raise SeparatrixNotConverged(
        f"separatrix did not converge to tol={tol:g} by n={prev_n}; last gap {gap:.3g}",
        n_reached=prev_n or 0, gap=gap)


def _assemble(alpha, n, tr, gap, tol, cfg, want_lower):
    ys = tr.y
    keep = np.concatenate([[True], np.diff(ys[:, 0]) > 0])
    samples = ys[keep]
    # quadratic extrapolation to C -> 0 from three points just above the anchor region
    c1 = 2.0 / n
    cs = np.array([c1, 2 * c1, 3 * c1])
    coeffs = ()
    if cs[-1] < samples[-1, 0]:
        As = np.array([tr.at(c - 1.0 / n)[1] for c in cs])
        coeffs = tuple(float(v) for v in np.polyfit(cs, As, 2))
        lower = coeffs[-1]
    else:
        lower = float(samples[0, 1])
    lower_samples = np.empty((0, 2))
    if want_lower:
        down = _orbit(alpha, 1.0 / n, samples[0, 1], 0.0, cfg)
        lower_samples = down.y[1:][::-1]
    return SeparatrixCurve(alpha, samples, lower, n, gap, tol, lower_samples, near_zero=coeffs)
