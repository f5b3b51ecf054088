"""Quality reporting: energy aggregates, per-joint smoothness diagnostics,
curvature-monotonicity counts, and curvature-comb geometry for rendering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import continuity, energy, geometry
from .builder import CurveDocument
from .energy import EnergyWeights, QuadratureRule
from .errors import DomainError
from .geometry import BezierSegment

# Relative curvature-gap threshold under which a joint counts as
# second-order-smooth in the geometric sense.
CURVATURE_GAP_TOLERANCE = 1e-4

# Curvature differences smaller than this fraction of the segment's maximum
# |curvature| do not start a new monotone run.
MONOTONE_NOISE_REL = 1e-9


@dataclass(frozen=True)
class SegmentEnergies:
    """The three energy terms and their weighted total for one segment."""

    parabolic: float
    edge_length: float
    curve_length: float
    total: float


@dataclass(frozen=True)
class EnergyReport:
    """Per-segment energies plus the average/maximum parabolic energy."""

    per_segment: tuple[SegmentEnergies, ...]
    average_parabolic: float
    max_parabolic: float


@dataclass(frozen=True)
class JointDiagnostics:
    """Numeric smoothness measurements at one joint."""

    index: int
    position_gap: float
    tangent_angle_gap: float
    curvature_gap: float
    mode_residual: float


@dataclass(frozen=True)
class CombGeometry:
    """Curvature comb: base points on the curve and tips offset along the
    left-hand normal by scale * kappa."""

    base_points: np.ndarray
    tip_points: np.ndarray
    scale: float

    def __post_init__(self):
        base = np.asarray(self.base_points, dtype=float)
        tip = np.asarray(self.tip_points, dtype=float)
        if base.shape != tip.shape or base.ndim != 2 or base.shape[1] != 2:
            raise DomainError("comb base/tip arrays must be matching (m, 2) arrays")
        object.__setattr__(self, "base_points", base)
        object.__setattr__(self, "tip_points", tip)


def energy_report(
    doc: CurveDocument,
    weights: EnergyWeights | None = None,
    rule: QuadratureRule | None = None,
) -> EnergyReport:
    """Evaluate every segment's energies against its stored target parabola."""
    weights = weights if weights is not None else doc.weights
    rule = rule if rule is not None else doc.rule
    per = []
    for rec in doc.records:
        ep = energy.parabolic_energy(rec.segment, rec.parabola, rule)
        ee = energy.edge_length_energy(rec.segment)
        ec = energy.curve_length_energy(rec.segment)
        per.append(
            SegmentEnergies(ep, ee, ec, ep + weights.lambda_e * ee + weights.lambda_c * ec)
        )
    if not per:
        return EnergyReport((), 0.0, 0.0)
    eps = [s.parabolic for s in per]
    return EnergyReport(tuple(per), float(np.mean(eps)), float(np.max(eps)))


def joint_report(doc: CurveDocument) -> list[JointDiagnostics]:
    """Position, tangent-angle, and curvature gaps at every joint, plus the
    residual of the document's declared continuity mode."""
    out = []
    n_rec = len(doc.records)
    for ji in range(doc.n_joints):
        left = doc.records[ji].segment
        right = doc.records[(ji + 1) % n_rec].segment
        cl = left.control_points
        cr = right.control_points
        position_gap = float(np.linalg.norm(cl[-1] - cr[0]))

        d_left = geometry.evaluate(geometry.derivative_segment(left), 1.0)
        d_right = geometry.evaluate(geometry.derivative_segment(right), 0.0)
        nl = np.linalg.norm(d_left)
        nr = np.linalg.norm(d_right)
        if nl > 0 and nr > 0:
            cross = d_left[0] * d_right[1] - d_left[1] * d_right[0]
            dot = float(np.dot(d_left, d_right))
            angle_gap = abs(float(np.arctan2(cross, dot)))
        else:
            angle_gap = float("nan")
        curvature_gap = abs(geometry.curvature(left, 1.0) - geometry.curvature(right, 0.0))

        params = None
        if doc.mode.is_geometric:
            alpha, eta = doc.joint_params[ji]
            params = continuity.GeometricJointParams(alpha, eta)
        resid = continuity.joint_residual(left, right, doc.mode, params)
        out.append(JointDiagnostics(ji, position_gap, angle_gap, curvature_gap, resid.max_abs))
    return out


def monotone_interval_count(seg: BezierSegment, rule: QuadratureRule | None = None) -> int:
    """Number of maximal monotone runs in the curvature sequence sampled at
    the quadrature nodes, ignoring changes below a noise floor."""
    rule = rule if rule is not None else QuadratureRule()
    nodes, _w = rule.nodes_weights()
    kappa, _speed = geometry.curvature_speed_many(seg, nodes)
    tol = MONOTONE_NOISE_REL * float(np.max(np.abs(kappa)))
    diffs = np.diff(kappa)
    count = 1
    direction = 0
    for d in diffs:
        if abs(d) <= tol:
            continue
        s = 1 if d > 0 else -1
        if direction == 0:
            direction = s
        elif s != direction:
            count += 1
            direction = s
    return count


def comb_geometry(doc: CurveDocument, samples_per_segment: int, scale: float) -> CombGeometry:
    """Curvature comb over the whole document: base on the curve, tip offset
    by scale * kappa along the left-hand normal of the tangent."""
    if samples_per_segment < 2:
        raise DomainError("samples_per_segment must be >= 2")
    if not (scale > 0):
        raise DomainError("scale must be positive")
    bases = []
    tips = []
    ts = np.linspace(0.0, 1.0, samples_per_segment)
    for rec in doc.records:
        seg = rec.segment
        pts = geometry.evaluate_many(seg, ts)
        kappa, speed = geometry.curvature_speed_many(seg, ts)
        d1 = geometry.evaluate_many(geometry.derivative_segment(seg), ts)
        tangent = d1 / speed[:, None]
        normal = np.column_stack([-tangent[:, 1], tangent[:, 0]])
        bases.append(pts)
        tips.append(pts + scale * kappa[:, None] * normal)
    base = np.vstack(bases) if bases else np.zeros((0, 2))
    tip = np.vstack(tips) if tips else np.zeros((0, 2))
    return CombGeometry(base, tip, scale)
