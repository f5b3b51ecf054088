"""Piecewise-Bezier interpolating curves with parabola-shaped per-segment
curvature, built incrementally with local re-optimization windows.
"""

from .builder import (
    CurveDocument,
    SegmentRecord,
    bootstrap_three_points,
    close_curve,
    document_residuals,
    fit_parabola,
    insert_point,
    move_point,
    new_document,
)
from .continuity import C1, C2, G1, G2, ContinuityMode, GeometricJointParams
from .energy import EnergyWeights, ParabolaModel, QuadratureRule
from .errors import (
    DegenerateInputError,
    DegenerateSpeedError,
    DomainError,
    InfeasibleError,
    NumericalError,
    PkcError,
    ShapeError,
)
from .geometry import BezierSegment, CurvatureSample
from .metrics import (
    CombGeometry,
    EnergyReport,
    JointDiagnostics,
    comb_geometry,
    energy_report,
    joint_report,
    monotone_interval_count,
)
from .solver import SolverSettings

__all__ = [
    "BezierSegment",
    "C1",
    "C2",
    "CombGeometry",
    "ContinuityMode",
    "CurvatureSample",
    "CurveDocument",
    "DegenerateInputError",
    "DegenerateSpeedError",
    "DomainError",
    "EnergyReport",
    "EnergyWeights",
    "G1",
    "G2",
    "GeometricJointParams",
    "InfeasibleError",
    "JointDiagnostics",
    "NumericalError",
    "ParabolaModel",
    "PkcError",
    "QuadratureRule",
    "SegmentRecord",
    "ShapeError",
    "SolverSettings",
    "bootstrap_three_points",
    "close_curve",
    "comb_geometry",
    "document_residuals",
    "energy_report",
    "fit_parabola",
    "insert_point",
    "joint_report",
    "monotone_interval_count",
    "move_point",
    "new_document",
]

__version__ = "0.1.0"
