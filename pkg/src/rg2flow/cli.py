"""Command-line interface: ``rg2flow {flow,portrait,separatrix,validate}``.

Exit status: 0 success, 1 validation failure, 2 configuration error,
3 integration failure, 4 separatrix did not converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

import numpy as np

from .classify import Regime, verify_classification
from .config import DEFAULTS, SCHEMA_VERSION, ConfigError, RunConfig, load_config
from .integrate import IntegratorConfig, TerminationKind, integrate
from .separatrix import N_SCHEDULE, SeparatrixNotConverged, build_sl2r_separatrix, sl2r_g
from .systems import FlowProblem, Mode

log = logging.getLogger("rg2flow")

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_SEPARATRIX = 0, 1, 2, 3, 4

_FMT = "{:.15g}"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _FMT.format(v)
    if isinstance(v, Regime):
        return v.value
    return v


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, Regime):
        return o.value
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o).__name__)


def _finite_or_none(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _needs_separatrix(problem: FlowProblem) -> bool:
    return problem.preset_name == "SL2R" and problem.alpha > 0


def _schedule(sep_cfg: dict) -> tuple:
    return tuple(n for n in N_SCHEDULE if n <= int(sep_cfg["max_n"]))


def _separatrix_for(cfg: RunConfig, c_needed: float = 0.0):
    s = cfg.separatrix
    c_max = max(float(s["c_max"]), c_needed)
    return build_sl2r_separatrix(cfg.problem.alpha, c_max, float(s["tol"]), schedule=_schedule(s))


def _sl2r_c(problem: FlowProblem, y0) -> float:
    return y0[0] if problem.mode is Mode.LRS else y0[2]


# ---------------------------------------------------------------- flow

def cmd_flow(cfg: RunConfig) -> int:
    if cfg.initial is None:
        raise ConfigError("flow needs an initial state ('initial' in the config or --initial)")
    problem = cfg.problem
    icfg = cfg.integrator_config()
    sep = None
    if _needs_separatrix(problem):
        sep = _separatrix_for(cfg, _sl2r_c(problem, cfg.initial))
    rep = verify_classification(problem, cfg.initial, icfg, sep)
    tr = rep.trajectory
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.outputs:
        _write_csv(out / "trajectory.csv", problem.columns,
                   ([float(t)] + [float(v) for v in y] for t, y in zip(tr.t, tr.y)))
    verdict = rep.to_verdict()
    verdict["singular_time_estimate"] = _finite_or_none(verdict["singular_time_estimate"])
    verdict["singular_time_is_lower_bound"] = tr.termination.lower_bound
    verdict["problem"] = problem.to_dict()
    verdict["initial"] = list(cfg.initial)
    if "json" in cfg.outputs:
        _write_json(out / "verdict.json", verdict)
    if "svg" in cfg.outputs:
        from .plotting import plot_trajectory
        plot_trajectory(tr.t, tr.y, problem.state_names, out / "trajectory.svg",
                        title=f"{problem.preset_name or problem.mode.value}, alpha = {problem.alpha:g}: "
                              f"{tr.termination.tag}")
    log.info("flow: %s at t=%.6g, predicted %s, observed %s, agree=%s",
             rep.termination, rep.t_end, verdict["predicted_regime"], verdict["observed_regime"],
             rep.agree)
    print(json.dumps({k: verdict[k] for k in ("termination", "t_end", "predicted_regime",
                                                "observed_regime", "agree")}))
    if tr.termination.kind is TerminationKind.STEP_FAILURE:
        log.error("integration failed: %s", tr.termination.message)
        return EXIT_INTEGRATION
    return EXIT_OK


# ------------------------------------------------------------ portrait

def _grid(cfg: RunConfig, seed: Optional[int]):
    axes = [a.values() for a in cfg.sweep]
    pts = np.array([[x, y] for x in axes[0] for y in axes[1]], dtype=float)
    if seed is not None:
        rng = np.random.default_rng(seed)
        for k, ax in enumerate(cfg.sweep):
            v = axes[k]
            if ax.spacing == "log":
                step = math.log(v[1] / v[0])
                pts[:, k] *= np.exp(rng.uniform(-0.25, 0.25, len(pts)) * step)
            else:
                step = v[1] - v[0]
                pts[:, k] += rng.uniform(-0.25, 0.25, len(pts)) * step
    return axes, pts


def _portrait_point(args):
    problem, point, integ, sep = args
    try:
        rep = verify_classification(problem, point, IntegratorConfig.singular().replace(**integ), sep)
    except Exception as exc:  # recorded per point, never fatal for the sweep
        return {"x0": point[0], "y0": point[1], "predicted": None, "observed": None, "agree": False,
                "t_end": None, "singular_time": None, "termination": "Error", "note": str(exc)}
    return {
        "x0": point[0], "y0": point[1],
        "predicted": rep.predicted.value if rep.predicted else None,
        "observed": rep.observed.value if rep.observed else None,
        "agree": rep.agree,
        "t_end": rep.t_end,
        "singular_time": _finite_or_none(rep.singular_time),
        "termination": rep.termination,
        "note": rep.note,
    }


def _run_points(jobs, threads: int):
    if threads <= 1 or len(jobs) < 2:
        return [_portrait_point(j) for j in jobs]
    chunk = max(1, len(jobs) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_portrait_point, jobs, chunksize=chunk))


def _overlays(problem: FlowProblem, xs, ys, sep):
    a = problem.alpha
    name = problem.preset_name
    out = []
    if name == "NIL" and a > 0:
        A = np.geomspace(min(xs), max(xs), 200)
        out.append((A, np.sqrt(1.5 * a * A), "B^2 = (3 alpha/2) A"))
    elif name == "SOL" and a > 0:
        out.append((np.array([min(xs), max(xs)]), np.array([2 * a, 2 * a]), "B = 2 alpha"))
    elif name == "SU2":
        lo, hi = max(min(xs), min(ys)), min(max(xs), max(ys))
        out.append((np.array([lo, hi]), np.array([lo, hi]), "A = B"))
    elif name == "SL2R" and sep is not None:
        C = np.geomspace(max(min(xs), 1e-6), max(xs), 300)
        out.append((C, sep(C, extend=True), "separatrix"))
    return out


def cmd_portrait(cfg: RunConfig, threads: int, seed: Optional[int]) -> int:
    problem = cfg.problem
    if problem.dim != 2:
        raise ConfigError(f"portrait needs a two-dimensional state; {problem.mode.value} has {problem.dim}")
    if not cfg.sweep:
        raise ConfigError("portrait needs a sweep grid ('sweep' in the config or --x/--y)")
    axes, pts = _grid(cfg, seed)
    sep = None
    if _needs_separatrix(problem):
        c_hi = float(np.max(pts[:, 0])) if problem.mode is Mode.LRS else 0.0
        sep = _separatrix_for(cfg, c_hi)
    jobs = [(problem, (float(p[0]), float(p[1])), cfg.integrator, sep) for p in pts]
    rows = _run_points(jobs, threads)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    cols = ["x0", "y0", "predicted", "observed", "agree", "t_end", "singular_time"]
    if "csv" in cfg.outputs:
        _write_csv(out / "portrait.csv", cols, ([r[c] for c in cols] for r in rows))
    n = len(rows)
    n_agree = sum(r["agree"] for r in rows)
    failed = sum(r["observed"] is None for r in rows)
    summary = {
        "problem": problem.to_dict(),
        "points": n,
        "agree": n_agree,
        "agreement_fraction": n_agree / n,
        "unresolved": failed,
        "seed": seed,
        "separatrix": sep.metadata() if sep is not None else None,
        "disagreements": [r for r in rows if not r["agree"]][:50],
    }
    if "json" in cfg.outputs:
        _write_json(out / "portrait.json", summary)
    if "svg" in cfg.outputs:
        _portrait_svg(cfg, axes, rows, sep, out / "portrait.svg", jittered=seed is not None)
    log.info("portrait: %d/%d points agree, %d unresolved", n_agree, n, failed)
    print(json.dumps({"points": n, "agreement_fraction": n_agree / n, "unresolved": failed}))
    if failed == n:
        log.error("every grid point failed to resolve")
        return EXIT_INTEGRATION
    return EXIT_OK


def _portrait_svg(cfg, axes, rows, sep, path, jittered):
    from .plotting import plot_portrait
    problem = cfg.problem
    nx, ny = len(axes[0]), len(axes[1])
    observed = [[None] * ny for _ in range(nx)]
    for k, r in enumerate(rows):
        observed[k // ny][k % ny] = Regime(r["observed"]) if r["observed"] else None
    # a handful of orbits, evenly spread over the grid
    trajs = []
    m = max(1, cfg.trajectories)
    icfg = IntegratorConfig.singular().replace(**cfg.integrator)
    picks = np.linspace(0, len(rows) - 1, min(m, len(rows))).astype(int)
    rhs = problem.field()
    xlo, xhi = axes[0][0], axes[0][-1]
    ylo, yhi = axes[1][0], axes[1][-1]
    for k in picks:
        tr = integrate(rhs, (rows[k]["x0"], rows[k]["y0"]), icfg)
        y = tr.y
        inside = (y[:, 0] >= xlo / 10) & (y[:, 0] <= xhi * 10) & (y[:, 1] >= ylo / 10) & (y[:, 1] <= yhi * 10)
        stop = int(np.argmin(inside)) if not inside.all() else len(y)
        trajs.append((y[:max(stop, 1), 0], y[:max(stop, 1), 1]))
    names = problem.family.axes if problem.mode is Mode.LRS else ("D", "E")
    log_axes = tuple(a.spacing == "log" for a in cfg.sweep)
    title = f"{problem.preset_name or problem.mode.value}, alpha = {problem.alpha:g}"
    if jittered:
        title += " (jittered grid, cells at nominal points)"
    plot_portrait(axes[0], axes[1], observed, path, axis_names=names, log=log_axes,
                  trajectories=trajs, overlays=_overlays(problem, axes[0], axes[1], sep), title=title)


# ---------------------------------------------------------- separatrix

def cmd_separatrix(cfg: RunConfig) -> int:
    alpha = cfg.problem.alpha
    if not alpha > 0:
        raise ConfigError("separatrix needs alpha > 0")
    c_max, tol = float(cfg.separatrix["c_max"]), float(cfg.separatrix["tol"])
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        sep = build_sl2r_separatrix(alpha, c_max, tol, schedule=_schedule(cfg.separatrix))
    except SeparatrixNotConverged as exc:
        meta = {"alpha": alpha, "converged": False, "n_reached": exc.n_reached,
                "achieved_gap": exc.gap, "tol": tol, "c_max": c_max}
        _write_json(out / "separatrix.json", meta)
        log.error("%s", exc)
        return EXIT_SEPARATRIX
    meta = dict(sep.metadata(), converged=True)
    if "csv" in cfg.outputs:
        _write_csv(out / "separatrix.csv", ("C", "A"), ([float(c), float(a)] for c, a in sep.samples))
    _write_json(out / "separatrix.json", meta)
    if "svg" in cfg.outputs:
        from .plotting import plot_separatrix
        C = np.geomspace(sep.c_min, c_max, 200)
        g = np.array([[c, sl2r_g(c, alpha)] for c in C])
        plot_separatrix(sep.samples, alpha, out / "separatrix.svg", g_curve=g)
    print(json.dumps({k: meta[k] for k in ("alpha", "n_reached", "achieved_gap", "lower_limit")}))
    return EXIT_OK


# ------------------------------------------------------------ validate

def cmd_validate(out: Path, perturb: bool = False, only=None) -> int:
    from .validation import Context, report_dict, run_checks
    results = run_checks(Context(perturb=perturb), only=only)
    for r in results:
        print(r.line())
    report = report_dict(results, perturb)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "validation_report.json", report)
    print(f"{len(results) - report['n_failed']}/{len(results)} checks passed")
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


# -------------------------------------------------------------- parser

def _parse_geometry(s: str):
    parts = s.split(",")
    if len(parts) == 3:
        try:
            return [float(p) for p in parts]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad structure constants {s!r}") from None
    return s


def _axis(s: str):
    parts = s.split(":")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError("axis must be MIN:MAX:COUNT[:linear|log]")
    try:
        d = {"min": float(parts[0]), "max": float(parts[1]), "count": int(parts[2])}
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad axis {s!r}") from None
    if len(parts) == 4:
        d["spacing"] = parts[3]
    return d


def build_parser() -> argparse.ArgumentParser:
    defaults = IntegratorConfig()
    p = argparse.ArgumentParser(
        prog="rg2flow",
        allow_abbrev=False,
        description="Integrate and classify RG-2 / Ricci flows on homogeneous 3-geometries.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=(
            f"config file: JSON object with schema_version={SCHEMA_VERSION} and keys "
            f"{', '.join(k for k in DEFAULTS if k != 'schema_version')}.\n"
            f"defaults: geometry={DEFAULTS['geometry']} mode={DEFAULTS['mode']} "
            f"alpha={DEFAULTS['alpha']} outputs={','.join(DEFAULTS['outputs'])}\n"
            f"integrator defaults: rel_tol={defaults.rel_tol:g} abs_tol={defaults.abs_tol:g} "
            f"h_init={defaults.h_init:g} t_max={defaults.t_max:g} "
            f"extinction_floor={defaults.extinction_floor:g} blowup_cap={defaults.blowup_cap:g} "
            f"max_steps={defaults.max_steps}\n"
            "  (portrait runs use log coordinates with a regularized time by default)\n"
            f"separatrix defaults: c_max={DEFAULTS['separatrix']['c_max']:g} "
            f"tol={DEFAULTS['separatrix']['tol']:g} max_n={DEFAULTS['separatrix']['max_n']}\n"
            "exit status: 0 ok, 1 validation failure, 2 config error, 3 integration failure, "
            "4 separatrix non-convergence"),
    )
    def common_options():
        c = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
        c.add_argument("--config", default=argparse.SUPPRESS, help="JSON run configuration")
        c.add_argument("--out", default=argparse.SUPPRESS,
                       help="output directory (default: config out_dir or ./out)")
        c.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                       help="worker processes for sweeps (default: all available CPUs)")
        c.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                       help="jitter sweep grid points with this seed (default: no jitter)")
        c.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)
        return c

    for a in common_options()._actions:
        p._add_action(a)
    p.set_defaults(config=None, out=None, threads=None, seed=None, verbose=0)
    sub = p.add_subparsers(dest="command", required=True)

    def problem_args(sp):
        sp.add_argument("--geometry", type=_parse_geometry,
                        help="SU2, NIL, SOL, SL2R, R3 or lambda,mu,nu")
        sp.add_argument("--mode", choices=[m.value for m in Mode])
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--K", type=float, help="curvature for const_curv mode")
        sp.add_argument("--n", type=int, help="dimension for const_curv mode (2 or 3)")
        sp.add_argument("--kappa", type=float, help="factor curvature for product mode")
        sp.add_argument("--t-max", type=float, dest="t_max")
        sp.add_argument("--log-coords", action="store_true", default=None,
                        help="integrate in log coordinates with regularized time")
        sp.add_argument("--outputs", help="comma-separated subset of csv,json,svg")

    sp = sub.add_parser("flow", parents=[common_options()], allow_abbrev=False, help="integrate one trajectory")
    problem_args(sp)
    sp.add_argument("--initial", type=float, nargs="+")

    sp = sub.add_parser("portrait", parents=[common_options()], allow_abbrev=False, help="classify and integrate a grid of initial data")
    problem_args(sp)
    sp.add_argument("--x", type=_axis, help="first axis MIN:MAX:COUNT[:linear|log]")
    sp.add_argument("--y", type=_axis, help="second axis MIN:MAX:COUNT[:linear|log]")
    sp.add_argument("--trajectories", type=int, help="sample orbits drawn in the SVG")

    sp = sub.add_parser("separatrix", parents=[common_options()], allow_abbrev=False, help="build the SL(2,R) separatrix")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--c-max", type=float, dest="c_max")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-n", type=int, dest="max_n",
                    help="largest n in the doubling schedule before giving up")
    sp.add_argument("--outputs", help="comma-separated subset of csv,json,svg")

    sp = sub.add_parser("validate", parents=[common_options()], allow_abbrev=False, help="run the oracle and invariant checks")
    sp.add_argument("--perturb-rhs", action="store_true",
                    help="debug: flip the sign of the quadratic curvature term under test")
    sp.add_argument("--only", nargs="+", help="run only these named checks")
    return p


def _overrides(ns) -> dict:
    o: dict = {}
    for key in ("geometry", "mode", "alpha", "K", "n", "kappa"):
        v = getattr(ns, key, None)
        if v is not None:
            o[key] = v
    integ = {}
    if getattr(ns, "t_max", None) is not None:
        integ["t_max"] = ns.t_max
    if getattr(ns, "log_coords", None):
        integ.update(log_coords=True, regularize=True)
    if integ:
        o["integrator"] = integ
    if getattr(ns, "initial", None):
        o["initial"] = ns.initial
    if getattr(ns, "outputs", None):
        o["outputs"] = [s.strip() for s in ns.outputs.split(",") if s.strip()]
    if ns.command == "portrait" and (ns.x or ns.y):
        if not (ns.x and ns.y):
            raise ConfigError("give both --x and --y")
        o["sweep"] = {"axes": [ns.x, ns.y]}
        if ns.trajectories is not None:
            o["sweep"]["trajectories"] = ns.trajectories
    if ns.command == "separatrix":
        sep = {k: getattr(ns, k) for k in ("c_max", "tol", "max_n") if getattr(ns, k) is not None}
        if sep:
            o["separatrix"] = sep
    if ns.out:
        o["out_dir"] = ns.out
    return o


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    threads = ns.threads if ns.threads is not None else (os.cpu_count() or 1)
    try:
        if threads < 1:
            raise ConfigError("--threads must be at least 1")
        if ns.command == "validate":
            out = Path(ns.out or DEFAULTS["out_dir"])
            if ns.config:
                out = Path(ns.out) if ns.out else load_config(ns.config).out_dir
            return cmd_validate(out, ns.perturb_rhs, ns.only)
        cfg = load_config(ns.config, _overrides(ns))
        if ns.command == "flow":
            return cmd_flow(cfg)
        if ns.command == "portrait":
            return cmd_portrait(cfg, threads, ns.seed)
        return cmd_separatrix(cfg)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
