"""Run configuration: a versioned JSON document plus command-line overrides."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .geometry import StructureConstants
from .integrate import IntegratorConfig
from .systems import FlowProblem, Mode

__all__ = ["SCHEMA_VERSION", "ConfigError", "SweepAxis", "RunConfig", "load_config", "DEFAULTS"]

SCHEMA_VERSION = 1

DEFAULTS: dict = {
    "schema_version": SCHEMA_VERSION,
    "geometry": "NIL",
    "mode": "lrs",
    "alpha": 1.0,
    "K": 0.0,
    "n": 3,
    "kappa": 0.0,
    "initial": None,
    "integrator": {},
    "sweep": None,
    "separatrix": {"c_max": 10.0, "tol": 1e-6, "max_n": 2 ** 20},
    "outputs": ["csv", "json", "svg"],
    "out_dir": "out",
}

_OUTPUTS = {"csv", "json", "svg"}


class ConfigError(ValueError):
    """Invalid configuration; the command line maps it to exit status 2."""


@dataclass(frozen=True)
class SweepAxis:
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.count < 2:
            raise ConfigError(f"sweep axis needs count >= 2, got {self.count}")
        if not (self.min > 0 and self.max > self.min and math.isfinite(self.max)):
            raise ConfigError(f"sweep axis needs 0 < min < max, got [{self.min}, {self.max}]")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)

    @classmethod
    def from_obj(cls, obj) -> "SweepAxis":
        if isinstance(obj, (list, tuple)):
            obj = dict(zip(("min", "max", "count", "spacing"), obj))
        try:
            return cls(float(obj["min"]), float(obj["max"]), int(obj["count"]),
                       str(obj.get("spacing", "linear")))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad sweep axis {obj!r}: {exc}") from None


@dataclass
class RunConfig:
    """Validated run configuration."""

    problem: FlowProblem
    initial: Optional[tuple]
    integrator: dict
    sweep: Optional[list]
    trajectories: int
    separatrix: dict
    outputs: set
    out_dir: Path
    raw: dict = field(repr=False, default_factory=dict)

    def integrator_config(self, base: Optional[IntegratorConfig] = None) -> IntegratorConfig:
        base = base or IntegratorConfig()
        try:
            return base.replace(**self.integrator)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad integrator settings {self.integrator}: {exc}") from None

    def to_dict(self) -> dict:
        out = dict(self.raw)
        out["out_dir"] = str(self.out_dir)
        out["outputs"] = sorted(self.outputs)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        merged = dict(DEFAULTS)
        merged.update({k: v for k, v in d.items() if v is not None})
        unknown = set(d) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if merged["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {merged['schema_version']!r}; "
                              f"expected {SCHEMA_VERSION}")
        problem = _problem(merged)
        initial = merged["initial"]
        if initial is not None:
            try:
                initial = problem.check_initial(initial)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
        integ = dict(merged["integrator"] or {})
        known = {f.name for f in fields(IntegratorConfig)}
        if set(integ) - known:
            raise ConfigError(f"unknown integrator settings {sorted(set(integ) - known)}")
        try:
            IntegratorConfig().replace(**integ)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad integrator settings: {exc}") from None
        sweep, ntraj = None, 12
        if merged["sweep"] is not None:
            sw = merged["sweep"]
            axes = sw.get("axes") if isinstance(sw, dict) else sw
            if not isinstance(axes, list):
                raise ConfigError("sweep must be a list of axes or {'axes': [...]} ")
            sweep = [SweepAxis.from_obj(a) for a in axes]
            if len(sweep) != problem.dim:
                raise ConfigError(f"sweep has {len(sweep)} axes but {problem.mode.value} "
                                  f"states have {problem.dim} components")
            if isinstance(sw, dict):
                ntraj = int(sw.get("trajectories", ntraj))
        outputs = set(merged["outputs"])
        if outputs - _OUTPUTS:
            raise ConfigError(f"unknown outputs {sorted(outputs - _OUTPUTS)}")
        sep = dict(DEFAULTS["separatrix"])
        sep.update(merged["separatrix"] or {})
        if not (float(sep["c_max"]) > 0 and float(sep["tol"]) > 0):
            raise ConfigError("separatrix c_max and tol must be positive")
        if set(sep) - set(DEFAULTS["separatrix"]):
            raise ConfigError(f"unknown separatrix settings {sorted(set(sep) - set(DEFAULTS['separatrix']))}")
        if int(sep["max_n"]) < 32:
            raise ConfigError("separatrix max_n must be at least 32")
        return cls(problem, initial, integ, sweep, ntraj, sep, outputs,
                   Path(os.path.expanduser(str(merged["out_dir"]))), merged)


def _problem(d: dict) -> FlowProblem:
    geom = d["geometry"]
    try:
        mode = Mode(d["mode"])
        structure = None
        name = None
        if isinstance(geom, (list, tuple)):
            structure = StructureConstants(*[float(v) for v in geom])
        elif geom is not None:
            name = str(geom).upper()
        return FlowProblem(mode, float(d["alpha"]), geometry=name, structure=structure,
                           K=float(d["K"]), n=int(d["n"]), kappa=float(d["kappa"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: Optional[str], overrides: Optional[dict] = None) -> RunConfig:
    """Read a JSON config (if given), apply overrides and validate."""
    d: dict[str, Any] = {}
    if path:
        try:
            with open(path) as fh:
                d = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "integrator":
            d.setdefault("integrator", {})
            d["integrator"] = {**d["integrator"], **v}
        elif k == "separatrix":
            d["separatrix"] = {**d.get("separatrix", {}), **v}
        else:
            d[k] = v
    return RunConfig.from_dict(d)
