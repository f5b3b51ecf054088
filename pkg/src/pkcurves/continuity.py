"""Residuals and direct constructions for stitching constraints between
adjacent Bezier segments: C1, C2, G1, G2, plus interpolation residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import DomainError, ShapeError
from .geometry import BezierSegment

# Numerical stand-in for the open condition alpha > 0.
ALPHA_MIN = 1e-6


@dataclass(frozen=True)
class ContinuityMode:
    """One of the four joint smoothness modes."""

    order: int  # 1 or 2
    kind: str  # "parametric" or "geometric"

    def __post_init__(self):
        if self.order not in (1, 2) or self.kind not in ("parametric", "geometric"):
            raise DomainError(f"invalid continuity mode ({self.order}, {self.kind})")

    @property
    def degree(self) -> int:
        """Segment degree used by documents in this mode."""
        return 4 if self.order == 1 else 5

    @property
    def is_geometric(self) -> bool:
        return self.kind == "geometric"

    @property
    def label(self) -> str:
        return ("G" if self.is_geometric else "C") + str(self.order)

    @staticmethod
    def from_label(label: str) -> "ContinuityMode":
        label = label.upper()
        if len(label) != 2 or label[0] not in "CG" or label[1] not in "12":
            raise DomainError(f"unknown continuity label {label!r}")
        return ContinuityMode(int(label[1]), "geometric" if label[0] == "G" else "parametric")


C1 = ContinuityMode(1, "parametric")
C2 = ContinuityMode(2, "parametric")
G1 = ContinuityMode(1, "geometric")
G2 = ContinuityMode(2, "geometric")


@dataclass(frozen=True)
class GeometricJointParams:
    """Free parameters of a geometric joint: tangent ratio alpha (> 0) and
    the second-order coefficient eta."""

    alpha: float
    eta: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0):
            raise DomainError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class ConstraintResidual:
    """Flat residual vector with one label per entry; zero iff satisfied."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (len(self.labels),):
            raise ShapeError("residual/label length mismatch")
        object.__setattr__(self, "values", vals)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if len(self.labels) else 0.0


def _vec_entries(name: str, v: np.ndarray):
    return [float(v[0]), float(v[1])], [f"{name}.x", f"{name}.y"]


def joint_residual(
    left: BezierSegment,
    right: BezierSegment,
    mode: ContinuityMode,
    params: GeometricJointParams | None = None,
) -> ConstraintResidual:
    """Stacked residual of the joint constraints between two segments."""
    if left.degree != right.degree:
        raise ShapeError(f"degree mismatch {left.degree} vs {right.degree}")
    if mode.is_geometric and params is None:
        raise DomainError("geometric mode requires joint params")
    cl = left.control_points
    cr = right.control_points
    k = left.degree
    values: list[float] = []
    labels: list[str] = []

    v, l = _vec_entries("position", cl[k] - cr[0])
    values += v
    labels += l

    left_leg = cl[k] - cl[k - 1]
    right_leg = cr[1] - cr[0]
    if mode.is_geometric:
        v, l = _vec_entries("tangent_g", params.alpha * left_leg - right_leg)
    else:
        v, l = _vec_entries("tangent", left_leg - right_leg)
    values += v
    labels += l

    if mode.order == 2:
        if mode.is_geometric:
            second = (
                -params.alpha**2 * (cl[k - 1] - cl[k - 2])
                + params.eta * left_leg
                - (cr[2] - cr[1])
            )
            v, l = _vec_entries("second_g", second)
        else:
            second = (cl[k - 2] - 2 * cl[k - 1]) - (cr[2] - 2 * cr[1])
            v, l = _vec_entries("second", second)
        values += v
        labels += l

    return ConstraintResidual(np.array(values), tuple(labels))


def interpolation_residual(seg: BezierSegment, t: float, target) -> ConstraintResidual:
    """Residual of the point-interpolation constraint P(t) = target."""
    target = geometry.as_point(target)
    diff = geometry.evaluate(seg, t) - target
    v, l = _vec_entries("interpolation", diff)
    return ConstraintResidual(np.array(v), tuple(l))


def enforce_c2_forward(left: BezierSegment, right_tail) -> BezierSegment:
    """Build the right segment whose leading control points are forced by C2
    continuity with `left`; `right_tail` supplies the remaining points."""
    tail = np.asarray(right_tail, dtype=float)
    k = left.degree
    if tail.shape != (k - 2, 2):
        raise ShapeError(f"tail must supply {k - 2} points, got shape {tail.shape}")
    cl = left.control_points
    c0 = cl[k]
    c1 = 2 * cl[k] - cl[k - 1]
    c2 = cl[k - 2] - 2 * cl[k - 1] + 2 * c1
    return BezierSegment(np.vstack([c0, c1, c2, tail]))


def enforce_c1_forward(left: BezierSegment, right_tail) -> BezierSegment:
    """C1 analogue of :func:`enforce_c2_forward`; tail supplies points 2..k."""
    tail = np.asarray(right_tail, dtype=float)
    k = left.degree
    if tail.shape != (k - 1, 2):
        raise ShapeError(f"tail must supply {k - 1} points, got shape {tail.shape}")
    cl = left.control_points
    c0 = cl[k]
    c1 = 2 * cl[k] - cl[k - 1]
    return BezierSegment(np.vstack([c0, c1, tail]))


def recover_joint_params(left: BezierSegment, right: BezierSegment) -> GeometricJointParams:
    """Best-fit (alpha, eta) for the geometric constraints at a joint; exact
    when the joint is geometrically continuous."""
    alpha = recover_alpha(left, right)
    cl = left.control_points
    cr = right.control_points
    k = left.degree
    left_leg = cl[k] - cl[k - 1]
    denom = float(np.dot(left_leg, left_leg))
    if denom == 0.0:
        return GeometricJointParams(alpha, 0.0)
    rhs = (cr[2] - cr[1]) + alpha**2 * (cl[k - 1] - cl[k - 2])
    eta = float(np.dot(left_leg, rhs)) / denom
    return GeometricJointParams(alpha, eta)


def recover_alpha(left: BezierSegment, right: BezierSegment) -> float:
    """Leg-length ratio giving the best G1 tangent match at the joint."""
    left_leg = left.control_points[-1] - left.control_points[-2]
    right_leg = right.control_points[1] - right.control_points[0]
    denom = float(np.dot(left_leg, left_leg))
    if denom == 0.0:
        raise DomainError("zero-length left leg, alpha undefined")
    return max(float(np.dot(left_leg, right_leg)) / denom, ALPHA_MIN)
