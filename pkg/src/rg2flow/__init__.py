"""RG-2 and Ricci flow on homogeneous 3-geometries: integration, regimes and separatrices."""

from .geometry import (CurvatureSummary, DiagonalMetric, StructureConstants, curvature_summary,
                       orthonormal_sectional_curvatures, rg2_field, rg2_rhs, ricci_diagonal,
                       rm2_diagonal, sectional_curvatures)
from .flows import (ConstCurvatureParams, LrsFamily, ReducedState, const_curvature_rhs,
                    reduced_rhs, trajectory_rhs)
from .integrate import (IntegratorConfig, Termination, TerminationKind, Trajectory,
                        estimate_singular_time, integrate)
from .separatrix import SeparatrixCurve, build_sl2r_separatrix, sl2r_g, sl2r_h
from .systems import FlowProblem, Mode
from .classify import (Regime, classify_constant_curvature, classify_nil, classify_sl2r,
                       classify_sol, classify_su2, predict_regime, verify_classification)

__version__ = "0.1.0"
