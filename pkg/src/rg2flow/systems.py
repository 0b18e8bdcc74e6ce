"""Flow problems: a geometry, a reduction mode and a coupling, bundled with their vector field."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .flows import (ConstCurvatureParams, LrsFamily, const_curvature_field, product_field,
                    reduced_field)
from .geometry import StructureConstants, _check_alpha, rg2_field

__all__ = ["Mode", "FlowProblem"]


class Mode(str, enum.Enum):
    FULL3D = "full3d"
    LRS = "lrs"
    CONST_CURV = "const_curv"
    PRODUCT = "product"


# how many metric directions each reduced coordinate stands for
_LRS_MULTIPLICITY = {
    LrsFamily.SU2_BeqC: (1, 2),
    LrsFamily.NIL_BeqC: (1, 2),
    LrsFamily.SOL_AeqC: (2, 1),
    LrsFamily.SL2R_AeqB: (1, 2),
}


@dataclass(frozen=True)
class FlowProblem:
    """One flow to integrate.

    Parameters
    ----------
    mode : Mode
    alpha : float
        Non-negative coupling; 0 selects Ricci flow.
    geometry : str, optional
        Preset name (SU2, NIL, SOL, SL2R, R3); required for ``lrs``.
    structure : StructureConstants, optional
        Explicit (lambda, mu, nu) for ``full3d``; overrides ``geometry``.
    K : float
        Curvature for ``const_curv``.
    n : int
        Dimension for ``const_curv`` (2 or 3).
    kappa : float
        Curvature of the surface factor for ``product`` (+1 sphere, -1 hyperbolic plane).
    """

    mode: Mode
    alpha: float = 0.0
    geometry: Optional[str] = None
    structure: Optional[StructureConstants] = None
    K: float = 0.0
    n: int = 3
    kappa: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "alpha", _check_alpha(self.alpha))
        if self.mode is Mode.FULL3D and self.structure is None:
            if self.geometry is None:
                raise ValueError("full3d mode needs a geometry preset or structure constants")
            object.__setattr__(self, "structure", StructureConstants.preset(self.geometry))
        if self.mode is Mode.LRS:
            if self.geometry is None:
                raise ValueError("lrs mode needs a geometry")
            LrsFamily.from_name(self.geometry)
        if self.mode is Mode.CONST_CURV:
            ConstCurvatureParams(self.K, self.n, self.alpha)
        for name in ("K", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def family(self) -> Optional[LrsFamily]:
        if self.mode is Mode.LRS:
            return LrsFamily.from_name(self.geometry)
        return None

    @property
    def preset_name(self) -> Optional[str]:
        """Name of the preset matching the structure constants, if any."""
        if self.mode is Mode.LRS:
            return self.family.value
        if self.mode is not Mode.FULL3D:
            return None
        triple = self.structure.as_tuple()
        for name, values in StructureConstants.PRESETS.items():
            if tuple(values) == triple:
                return name
        return None

    @property
    def dim(self) -> int:
        return {Mode.FULL3D: 3, Mode.LRS: 2, Mode.CONST_CURV: 1, Mode.PRODUCT: 2}[self.mode]

    @property
    def state_names(self) -> tuple:
        if self.mode is Mode.FULL3D:
            return ("A", "B", "C")
        if self.mode is Mode.LRS:
            return ("x", "y")
        if self.mode is Mode.CONST_CURV:
            return ("phi",)
        return ("D", "E")

    @property
    def columns(self) -> tuple:
        return ("t",) + self.state_names

    @property
    def multiplicities(self) -> tuple:
        """Number of metric directions carried by each state component."""
        if self.mode is Mode.LRS:
            return _LRS_MULTIPLICITY[self.family]
        if self.mode is Mode.CONST_CURV:
            return (self.n,)
        if self.mode is Mode.PRODUCT:
            return (1, 2)
        return (1, 1, 1)

    def field(self):
        """Vector field as a plain callable for :func:`rg2flow.integrate.integrate`."""
        if self.mode is Mode.FULL3D:
            return rg2_field(self.structure, self.alpha)
        if self.mode is Mode.LRS:
            return reduced_field(self.family, self.alpha)
        if self.mode is Mode.CONST_CURV:
            return const_curvature_field(ConstCurvatureParams(self.K, self.n, self.alpha))
        return product_field(self.kappa, self.alpha)

    def check_initial(self, y0: Sequence[float]) -> tuple:
        y0 = tuple(float(v) for v in y0)
        if len(y0) != self.dim:
            raise ValueError(f"{self.mode.value} needs {self.dim} initial values, got {len(y0)}")
        if any(not (v > 0 and math.isfinite(v)) for v in y0):
            raise ValueError(f"initial values must be positive and finite, got {y0}")
        return y0

    def to_dict(self) -> dict:
        out = {"mode": self.mode.value, "alpha": self.alpha}
        if self.mode is Mode.FULL3D:
            out["structure"] = list(self.structure.as_tuple())
            if self.preset_name:
                out["geometry"] = self.preset_name
        elif self.mode is Mode.LRS:
            out["geometry"] = self.family.value
        elif self.mode is Mode.CONST_CURV:
            out.update(K=self.K, n=self.n)
        else:
            out["kappa"] = self.kappa
        return out
