"""Static SVG figures for trajectories, phase portraits and separatrices."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from .classify import Regime  # noqa: E402

__all__ = ["REGIME_COLORS", "plot_trajectory", "plot_portrait", "plot_separatrix"]

REGIME_COLORS = {
    Regime.FixedPoint: "#bbbbbb",
    Regime.ShrinkerFiniteTime: "#d95f02",
    Regime.ShrinkerExponential: "#e6ab02",
    Regime.PancakeImmortal: "#1b9e77",
    Regime.CigarImmortal: "#7570b3",
    Regime.SolBoundary: "#e7298a",
    Regime.SL2RBoundaryOrShrinker: "#a6761d",
    Regime.ExpandImmortal: "#66a61e",
    Regime.ContractFiniteTime: "#666666",
}
_UNKNOWN = "#ffffff"

plt.rcParams.update({
    "svg.hashsalt": "rg2flow",  # stable element ids across runs
    "font.size": 9,
    "axes.titlesize": 10,
})


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)


def plot_trajectory(t, y, names, path, title=""):
    """Components against time on a log scale."""
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for j, name in enumerate(names):
        ax.plot(t, y[:, j], lw=1.2, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("metric coefficient")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, lw=0.5)
    _save(fig, path)


def _edges(v, log):
    v = np.asarray(v, float)
    if log:
        lv = np.log(v)
        mid = 0.5 * (lv[1:] + lv[:-1])
        return np.exp(np.concatenate([[2 * lv[0] - mid[0]], mid, [2 * lv[-1] - mid[-1]]]))
    mid = 0.5 * (v[1:] + v[:-1])
    return np.concatenate([[2 * v[0] - mid[0]], mid, [2 * v[-1] - mid[-1]]])


def plot_portrait(xs, ys, observed, path, *, axis_names=("x", "y"), log=(False, False),
                  trajectories=(), overlays=(), title=""):
    """Regime regions on the sweep grid with sample orbits and separatrix overlays.

    Parameters
    ----------
    xs, ys : array_like
        Grid values along each axis.
    observed : 2-D array of Regime or None
        ``observed[i, j]`` is the regime at ``(xs[i], ys[j])``.
    trajectories : iterable of (x, y) arrays
    overlays : iterable of (x, y, label) curves
    """
    regs = [r for r in Regime]
    idx = {r: k for k, r in enumerate(regs)}
    grid = np.full((len(xs), len(ys)), len(regs), dtype=float)
    for i in range(len(xs)):
        for j in range(len(ys)):
            r = observed[i][j]
            if r is not None:
                grid[i, j] = idx[r]
    cmap = ListedColormap([REGIME_COLORS[r] for r in regs] + [_UNKNOWN])
    fig, ax = plt.subplots(figsize=(5.5, 4.6))
    ax.pcolormesh(_edges(xs, log[0]), _edges(ys, log[1]), grid.T, cmap=cmap,
                  vmin=-0.5, vmax=len(regs) + 0.5, alpha=0.55, shading="flat")
    for tx, ty in trajectories:
        ax.plot(tx, ty, color="k", lw=0.6, alpha=0.8)
        ax.plot(tx[:1], ty[:1], "o", color="k", ms=2)
    for cx, cy, label in overlays:
        ax.plot(cx, cy, color="#c00000", lw=1.6, ls="--", label=label)
    if log[0]:
        ax.set_xscale("log")
    if log[1]:
        ax.set_yscale("log")
    ex, ey = _edges(xs, log[0]), _edges(ys, log[1])
    ax.set_xlim(ex[0], ex[-1])
    ax.set_ylim(ey[0], ey[-1])
    ax.set_xlabel(axis_names[0])
    ax.set_ylabel(axis_names[1])
    present = sorted({r for row in observed for r in row if r is not None}, key=idx.get)
    handles = [Patch(color=REGIME_COLORS[r], alpha=0.55, label=r.value) for r in present]
    if overlays:
        h, _ = ax.get_legend_handles_labels()
        handles += h
    ax.legend(handles=handles, fontsize=7, frameon=True, loc="best")
    if title:
        ax.set_title(title)
    _save(fig, path)


def plot_separatrix(samples, alpha, path, g_curve=None):
    """The built curve in the (C, A) plane, with the level set A = g(C) for reference."""
    fig, ax = plt.subplots(figsize=(5.0, 3.8))
    ax.plot(samples[:, 0], samples[:, 1], color="#c00000", lw=1.6, label="separatrix")
    if g_curve is not None:
        ax.plot(g_curve[:, 0], g_curve[:, 1], color="k", lw=0.8, ls=":", label="A = g(C)")
    ax.axhline(2 * alpha, color="#888888", lw=0.6)
    ax.set_xlabel("C")
    ax.set_ylabel("A")
    ax.set_title(f"SL(2,R) separatrix, alpha = {alpha:g}")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, lw=0.5)
    _save(fig, path)
