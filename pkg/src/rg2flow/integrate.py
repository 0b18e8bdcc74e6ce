"""Adaptive Dormand-Prince 5(4) integration with extinction and blowup detection.

The flows handled here are autonomous systems ``dy/dt = f(y)`` on the open
positive orthant.  A run stops at the first of: reaching ``t_max``, a
component falling below ``extinction_floor``, a component exceeding
``blowup_cap``, or the step size collapsing (``StepFailure``).  Threshold
crossings are located inside the last step with the continuous extension,
so reported crossing times are not limited by the step grid.

Three coordinate modes are available:

``linear``
    integrate ``y`` against ``t``.
``log_coords``
    integrate ``u = ln y`` against ``t``; relative accuracy becomes uniform
    as components approach zero or infinity.
``log_coords`` + ``regularize``
    integrate ``(ln y, t)`` against a pseudo-time ``s`` with
    ``ds = (1 + |d ln y/dt|) dt``.  Finite-time singularities with
    ``y ~ (T - t)**p`` then sit at finite ``s`` with bounded velocity, so the
    floor is reached even when ``T - t`` at the floor is far below the
    resolution of ``t`` in double precision.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "IntegratorConfig",
    "TerminationKind",
    "Termination",
    "Trajectory",
    "integrate",
    "estimate_singular_time",
]

Rhs = Callable[[Sequence[float]], Sequence[float]]

_EPS = np.finfo(float).eps

# Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner, Solving ODEs I).
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = (
    9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656)
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth minus fourth order weights
_E1 = 71 / 57600
_E3 = -71 / 16695
_E4 = 71 / 1920
_E5 = -17253 / 339200
_E6 = 22 / 525
_E7 = -1 / 40
# continuous extension
_D1 = -12715105075 / 11282082432
_D3 = 87487479700 / 32700410799
_D4 = -10690763975 / 1880347072
_D5 = 701980252875 / 199316789632
_D6 = -1453857185 / 822651844
_D7 = 69997945 / 29380423

# PI controller exponents (Gustafsson), order 5 error estimate
_PI_BETA1 = 0.7 / 5
_PI_BETA2 = 0.4 / 5
_SAFETY = 0.9
_FAC_MIN, _FAC_MAX = 0.2, 5.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances, limits and coordinate mode for :func:`integrate`."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    h_init: float = 1e-4
    t_max: float = 1e4
    extinction_floor: float = 1e-8
    blowup_cap: float = 1e8
    max_steps: int = 10**7
    log_coords: bool = False
    regularize: bool = False

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "h_init", "t_max",
                     "extinction_floor", "blowup_cap"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not self.extinction_floor < 1 < self.blowup_cap:
            raise ValueError("require extinction_floor < 1 < blowup_cap")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.regularize and not self.log_coords:
            raise ValueError("regularize requires log_coords")

    def replace(self, **changes) -> "IntegratorConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def singular(cls, **overrides) -> "IntegratorConfig":
        """Configuration suited to runs that may end in a finite-time singularity."""
        overrides.setdefault("log_coords", True)
        overrides.setdefault("regularize", True)
        return cls(**overrides)


class TerminationKind(enum.Enum):
    REACHED_T_MAX = "ReachedTMax"
    EXTINCTION = "Extinction"
    BLOWUP = "Blowup"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class Termination:
    """Why a run stopped.

    ``components`` lists the offending indices for Extinction/Blowup.
    ``singular_time`` is the extrapolated singular time for Extinction and
    the crossing time for Blowup, which is only a lower bound
    (``lower_bound`` is then True).
    """

    kind: TerminationKind
    components: tuple = ()
    singular_time: Optional[float] = None
    lower_bound: bool = False
    message: str = ""

    @property
    def tag(self) -> str:
        return self.kind.value


@dataclass
class _Step:
    x0: float
    h: float
    u0: list
    u1: list
    k: tuple  # k1, k3, k4, k5, k6, k7

    def dense(self, theta: float) -> list:
        h = self.h
        k1, k3, k4, k5, k6, k7 = self.k
        th1 = 1.0 - theta
        out = []
        for i, (a, b) in enumerate(zip(self.u0, self.u1)):
            r2 = b - a
            r3 = h * k1[i] - r2
            r4 = r2 - h * k7[i] - r3
            r5 = h * (_D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i]
                      + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i])
            out.append(a + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5))))
        return out


@dataclass
class Trajectory:
    """Sampled solution with termination verdict and continuous extension.

    ``t`` has shape (n,), ``y`` has shape (n, d); samples are the accepted
    step endpoints, the last one placed exactly on the terminating event.
    """

    t: np.ndarray
    y: np.ndarray
    termination: Termination
    rhs: Rhs = field(repr=False, default=None)
    _steps: list = field(repr=False, default_factory=list)
    _mode: str = field(repr=False, default="linear")
    # step used for the interval ending at each sample (identity unless samples were merged)
    _step_of: Optional[np.ndarray] = field(repr=False, default=None)

    def _step(self, interval: int) -> _Step:
        if self._step_of is None:
            return self._steps[interval]
        return self._steps[int(self._step_of[interval])]

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.y[-1]

    @property
    def samples(self) -> list:
        return list(zip(self.t.tolist(), [tuple(row) for row in self.y.tolist()]))

    def velocity(self, index: int = -1) -> np.ndarray:
        """dy/dt at a sample, from the right-hand side."""
        return np.asarray(self.rhs(self.y[index].tolist()), dtype=float)

    def _to_state(self, u: list) -> np.ndarray:
        if self._mode == "linear":
            return np.asarray(u, dtype=float)
        if self._mode == "log":
            return np.exp(u)
        return np.exp(u[:-1])

    def at(self, t: float) -> np.ndarray:
        """State at time ``t`` from the continuous extension."""
        if not self.t[0] <= t <= self.t[-1]:
            raise ValueError(f"t={t} outside [{self.t[0]}, {self.t[-1]}]")
        if t == self.t[0]:
            return self.y[0].copy()
        if t == self.t[-1]:
            return self.y[-1].copy()
        j = int(np.searchsorted(self.t, t)) - 1
        j = min(max(j, 0), len(self.t) - 2)
        step = self._step(j)
        if self._mode != "regularized":
            return self._to_state(step.dense((t - step.x0) / step.h))
        theta = _bisect_theta(lambda th: step.dense(th)[-1] - t, 0.0, 1.0)
        return self._to_state(step.dense(theta))

    def first_crossing(self, component: int, level: float) -> Optional[float]:
        """Earliest time at which ``y[component]`` reaches ``level``."""
        col = self.y[:, component] - level
        if col[0] == 0:
            return float(self.t[0])
        hits = np.nonzero(np.sign(col[1:]) != np.sign(col[0]))[0]
        if hits.size == 0:
            return None
        j = int(hits[0])
        step = self._step(j)
        if self._mode == "linear":
            g = lambda th: step.dense(th)[component] - level
        else:
            ln_level = math.log(level)
            g = lambda th: step.dense(th)[component] - ln_level
        theta = _bisect_theta(g, 0.0, 1.0)
        if self._mode == "regularized":
            return step.dense(theta)[-1]
        return step.x0 + theta * step.h


def _bisect_theta(g, lo: float, hi: float, iters: int = 80) -> float:
    glo = g(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        gm = g(mid)
        if (gm > 0) == (glo > 0) and gm != 0:
            lo, glo = mid, gm
        else:
            hi = mid
    return hi


def _wrap_rhs(rhs: Rhs, mode: str) -> Callable[[list], list]:
    if mode == "linear":
        return lambda u: list(rhs(u))
    if mode == "log":
        def f_log(u):
            y = [math.exp(v) for v in u]
            return [fy / yi for fy, yi in zip(rhs(y), y)]
        return f_log

    def f_reg(u):
        y = [math.exp(v) for v in u[:-1]]
        v = [fy / yi for fy, yi in zip(rhs(y), y)]
        w = 1.0 / (1.0 + math.sqrt(sum(vi * vi for vi in v)))
        out = [vi * w for vi in v]
        out.append(w)
        return out
    return f_reg


def integrate(rhs: Rhs, y0: Sequence[float],
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate ``dy/dt = rhs(y)`` from ``y0`` at ``t = 0``.

    Parameters
    ----------
    rhs : callable
        Maps a state sequence to its time derivative (a sequence of floats).
    y0 : sequence of float
        Strictly positive initial state.
    cfg : IntegratorConfig, optional
        Defaults to ``IntegratorConfig()``.

    Returns
    -------
    Trajectory
    """
    cfg = cfg or IntegratorConfig()
    y0 = [float(v) for v in y0]
    if not y0 or any(not (v > 0 and math.isfinite(v)) for v in y0):
        raise ValueError(f"initial state must be strictly positive and finite, got {y0}")

    mode = "linear"
    if cfg.log_coords:
        mode = "regularized" if cfg.regularize else "log"
    dim = len(y0)
    f = _wrap_rhs(rhs, mode)

    if mode == "linear":
        u = list(y0)
    else:
        u = [math.log(v) for v in y0]
        if mode == "regularized":
            u.append(0.0)
    n = len(u)

    rtol, atol = cfg.rel_tol, cfg.abs_tol
    if mode == "linear":
        atols = [atol] * n
        rtols = [rtol] * n
    else:
        # tolerance on ln y is a relative tolerance on y
        atols = [rtol] * dim + ([atol] if mode == "regularized" else [])
        rtols = [0.0] * dim + ([rtol] if mode == "regularized" else [])

    ln_floor = math.log(cfg.extinction_floor)
    ln_cap = math.log(cfg.blowup_cap)
    lo, hi = (cfg.extinction_floor, cfg.blowup_cap) if mode == "linear" else (ln_floor, ln_cap)
    t_max = cfg.t_max

    x = 0.0
    h = cfg.h_init
    if mode != "regularized":
        h = min(h, t_max)
    k1 = f(u)
    xs = [0.0]
    us = [list(u)]
    steps: list[_Step] = []
    err_prev = 1e-4
    rejected = False
    termination = None
    n_steps = 0

    while termination is None:
        if n_steps >= cfg.max_steps:
            termination = Termination(TerminationKind.STEP_FAILURE,
                                      message=f"max_steps={cfg.max_steps} exceeded")
            break
        h_min = 16 * _EPS * max(abs(x), cfg.h_init)
        if h < h_min:
            termination = Termination(
                TerminationKind.STEP_FAILURE,
                message=f"step size {h:.3e} below minimum {h_min:.3e} at x={x:.17g}")
            break
        clamp = mode != "regularized" and x + h >= t_max
        if clamp:
            h = t_max - x

        try:
            k2 = f([a + h * (_A21 * b1) for a, b1 in zip(u, k1)])
            k3 = f([a + h * (_A31 * b1 + _A32 * b2) for a, b1, b2 in zip(u, k1, k2)])
            k4 = f([a + h * (_A41 * b1 + _A42 * b2 + _A43 * b3)
                    for a, b1, b2, b3 in zip(u, k1, k2, k3)])
            k5 = f([a + h * (_A51 * b1 + _A52 * b2 + _A53 * b3 + _A54 * b4)
                    for a, b1, b2, b3, b4 in zip(u, k1, k2, k3, k4)])
            k6 = f([a + h * (_A61 * b1 + _A62 * b2 + _A63 * b3 + _A64 * b4 + _A65 * b5)
                    for a, b1, b2, b3, b4, b5 in zip(u, k1, k2, k3, k4, k5)])
            u_new = [a + h * (_B1 * b1 + _B3 * b3 + _B4 * b4 + _B5 * b5 + _B6 * b6)
                     for a, b1, b3, b4, b5, b6 in zip(u, k1, k3, k4, k5, k6)]
            k7 = f(u_new)
        except (ZeroDivisionError, OverflowError, ValueError):
            ok = False
        else:
            ok = all(math.isfinite(v) for v in k7) and all(math.isfinite(v) for v in u_new)
            if ok and mode == "linear":
                ok = all(v > 0 for v in u_new)
        if not ok:
            h *= 0.25
            rejected = True
            continue

        acc = 0.0
        for i in range(n):
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                     + _E6 * k6[i] + _E7 * k7[i])
            sc = atols[i] + rtols[i] * max(abs(u[i]), abs(u_new[i]))
            acc += (e / sc) ** 2
        err = math.sqrt(acc / n)

        if err > 1.0:
            h *= max(_FAC_MIN, _SAFETY * err ** -0.2)
            rejected = True
            continue

        n_steps += 1
        step = _Step(x, h, u, u_new, (k1, k3, k4, k5, k6, k7))
        x_new = t_max if clamp else x + h

        termination, theta = _detect_events(step, dim, mode, lo, hi, t_max)
        if termination is not None and theta < 1.0:
            u_end = step.dense(theta)
            x_end = x + theta * h
            steps.append(step)
            xs.append(x_end)
            us.append(u_end)
            break
        steps.append(step)
        xs.append(x_new)
        us.append(u_new)
        if clamp:
            termination = Termination(TerminationKind.REACHED_T_MAX)
            break
        if termination is not None:
            break

        fac = _SAFETY * max(err, 1e-10) ** -_PI_BETA1 * err_prev ** _PI_BETA2
        fac = min(_FAC_MAX, max(_FAC_MIN, fac))
        if rejected:
            fac = min(fac, 1.0)
        err_prev = max(err, 1e-4)
        rejected = False
        x, u, k1 = x_new, u_new, k7
        h *= fac

    u_arr = np.asarray(us, dtype=float)
    if mode == "linear":
        t_arr, y_arr = np.asarray(xs), u_arr
    elif mode == "log":
        t_arr, y_arr = np.asarray(xs), np.exp(u_arr)
    else:
        t_arr, y_arr = u_arr[:, -1].copy(), np.exp(u_arr[:, :-1])
    step_of = None
    if mode == "regularized":
        t_arr, y_arr, step_of = _merge_unresolved(t_arr, y_arr)
    traj = Trajectory(t_arr, y_arr, termination, rhs=rhs, _steps=steps, _mode=mode,
                      _step_of=step_of)
    return _finalize(traj, termination, cfg)


def _merge_unresolved(t: np.ndarray, y: np.ndarray):
    """Drop samples whose time does not advance in double precision.

    Close to a finite-time singularity the pseudo-time keeps resolving the
    approach while ``t`` stalls at the last representable value below T.
    Only the first sample of each stalled run is kept; the state of the
    final event sample replaces the state of the first sample of its run.
    """
    keep = [0]
    for i in range(1, len(t)):
        if t[i] > t[keep[-1]]:
            keep.append(i)
    keep = np.asarray(keep)
    t_out, y_out = t[keep], y[keep].copy()
    y_out[-1] = y[-1]
    # the interval ending at kept sample m+1 is covered by the step ending there
    step_of = keep[1:] - 1
    return t_out, y_out, step_of


def _detect_events(step: _Step, dim: int, mode: str, lo: float, hi: float,
                   t_max: float):
    """Earliest threshold crossing inside an accepted step, as (Termination, theta)."""
    u1 = step.u1
    candidates = []
    for i in range(dim):
        if u1[i] < lo:
            candidates.append((TerminationKind.EXTINCTION, i, lo))
        elif u1[i] > hi:
            candidates.append((TerminationKind.BLOWUP, i, hi))
    if mode == "regularized" and u1[-1] >= t_max:
        candidates.append((TerminationKind.REACHED_T_MAX, dim, t_max))
    if not candidates:
        return None, 1.0

    best = None
    for kind, i, level in candidates:
        theta = _bisect_theta(lambda th: step.dense(th)[i] - level, 0.0, 1.0)
        if best is None or theta < best[0]:
            best = (theta, kind, [i])
        elif theta == best[0] and kind == best[1]:
            best[2].append(i)
    theta, kind, comps = best
    # components sharing the event within the same crossing point
    u_end = step.dense(theta)
    if kind is TerminationKind.EXTINCTION:
        comps = sorted({i for i in range(dim) if u_end[i] <= lo * (1 + 1e-12) or i in comps})
    elif kind is TerminationKind.BLOWUP:
        comps = sorted({i for i in range(dim) if u_end[i] >= hi * (1 - 1e-12) or i in comps})
    return Termination(kind, tuple(comps) if kind is not TerminationKind.REACHED_T_MAX else ()), theta


def _finalize(traj: Trajectory, termination: Termination, cfg: IntegratorConfig) -> Trajectory:
    kind = termination.kind
    if kind not in (TerminationKind.EXTINCTION, TerminationKind.BLOWUP):
        return traj
    t_c = traj.t_end
    if kind is TerminationKind.BLOWUP:
        traj.termination = Termination(kind, termination.components, t_c, True,
                                       "blowup crossing time; singular time is at least this")
        return traj
    y = traj.final_state
    v = traj.velocity()
    estimates = [t_c + y[i] / -v[i] for i in termination.components if v[i] < 0]
    t_star = min(estimates) if estimates else t_c
    traj.termination = Termination(kind, termination.components, float(t_star), False,
                                   "linear extrapolation from the floor crossing")
    return traj


def estimate_singular_time(traj: Trajectory) -> Optional[float]:
    """Refined singular-time estimate, or None unless the run hit a singularity proxy."""
    if traj.termination.kind in (TerminationKind.EXTINCTION, TerminationKind.BLOWUP):
        return traj.termination.singular_time
    return None
