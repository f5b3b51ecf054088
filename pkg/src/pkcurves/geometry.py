"""Polynomial Bezier kernel: evaluation, derivatives, curvature, degree
elevation, subdivision, and curvature sampling.

Segments are immutable value objects; every operation returns new data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateSpeedError, DomainError, ShapeError

# Relative threshold below which the curve speed is treated as degenerate
# (curvature would divide by ~0).
SPEED_EPSILON_REL = 1e-9


def as_point(p) -> np.ndarray:
    """Coerce a 2-tuple / array into a finite (2,) float array."""
    a = np.asarray(p, dtype=float)
    if a.shape != (2,):
        raise ShapeError(f"expected a 2D point, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"non-finite point {a}")
    return a


@dataclass(frozen=True)
class BezierSegment:
    """A degree-k polynomial Bezier segment given by k+1 control points."""

    control_points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
            raise ShapeError(f"control points must be (k+1, 2) with k>=0, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("non-finite control point")
        pts.setflags(write=False)
        object.__setattr__(self, "control_points", pts)

    @property
    def degree(self) -> int:
        return self.control_points.shape[0] - 1

    def bbox_diagonal(self) -> float:
        pts = self.control_points
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))

    def reversed(self) -> "BezierSegment":
        return BezierSegment(self.control_points[::-1])


@dataclass(frozen=True)
class CurvatureSample:
    """Signed curvature and parametric speed at one parameter value."""

    t: float
    kappa: float
    speed: float


def _check_t(t: float) -> float:
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"parameter {t} outside [0, 1]")
    return t


def evaluate(seg: BezierSegment, t: float) -> np.ndarray:
    """Evaluate the segment at t via the de Casteljau recursion."""
    t = _check_t(t)
    pts = seg.control_points.copy()
    for _ in range(seg.degree):
        pts = (1.0 - t) * pts[:-1] + t * pts[1:]
    return pts[0]


def evaluate_many(seg: BezierSegment, ts: np.ndarray) -> np.ndarray:
    """Vectorized de Casteljau evaluation; returns an (m, 2) array."""
    ts = np.asarray(ts, dtype=float)
    if ts.size and (ts.min() < 0.0 or ts.max() > 1.0):
        raise DomainError("parameter outside [0, 1]")
    w = ts[None, :, None]
    pts = np.broadcast_to(seg.control_points[:, None, :], (seg.degree + 1, ts.size, 2)).copy()
    for _ in range(seg.degree):
        pts = (1.0 - w) * pts[:-1] + w * pts[1:]
    return pts[0]


def derivative_segment(seg: BezierSegment, order: int = 1) -> BezierSegment:
    """Hodograph: the degree-(k-order) segment evaluating to the order-th
    parametric derivative."""
    order = int(order)
    k = seg.degree
    if order < 1 or order > k:
        raise DomainError(f"derivative order {order} not in [1, {k}]")
    pts = seg.control_points
    for i in range(order):
        deg = k - i
        pts = deg * np.diff(pts, axis=0)
    return BezierSegment(pts)


def _derivatives_at(seg: BezierSegment, t: float):
    d1 = evaluate(derivative_segment(seg, 1), t)
    if seg.degree >= 2:
        d2 = evaluate(derivative_segment(seg, 2), t)
    else:
        d2 = np.zeros(2)
    return d1, d2


def speed_epsilon(seg: BezierSegment) -> float:
    return SPEED_EPSILON_REL * seg.bbox_diagonal()


def curvature(seg: BezierSegment, t: float) -> float:
    """Signed curvature det(P', P'') / |P'|^3 at t."""
    t = _check_t(t)
    d1, d2 = _derivatives_at(seg, t)
    speed = float(np.hypot(d1[0], d1[1]))
    if speed <= speed_epsilon(seg):
        raise DegenerateSpeedError(t)
    det = d1[0] * d2[1] - d1[1] * d2[0]
    return float(det / speed**3)


def elevate_degree(seg: BezierSegment) -> BezierSegment:
    """Exact degree elevation from k to k+1."""
    k = seg.degree
    pts = seg.control_points
    out = np.empty((k + 2, 2))
    out[0] = pts[0]
    out[k + 1] = pts[k]
    l = np.arange(1, k + 1, dtype=float)[:, None]
    out[1 : k + 1] = (l / (k + 1)) * pts[:-1] + (1.0 - l / (k + 1)) * pts[1:]
    return BezierSegment(out)


def elevate_to(seg: BezierSegment, degree: int) -> BezierSegment:
    """Elevate repeatedly until the segment has the requested degree."""
    if degree < seg.degree:
        raise DomainError(f"cannot lower degree {seg.degree} to {degree}")
    while seg.degree < degree:
        seg = elevate_degree(seg)
    return seg


@lru_cache(maxsize=64)
def _subdivision_matrix(k: int, z: float) -> np.ndarray:
    """Lower-triangular matrix M with left control points = M @ c."""
    m = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        for j in range(i + 1):
            m[i, j] = math.comb(i, j) * z**j * (1.0 - z) ** (i - j)
    return m


def subdivide(seg: BezierSegment, z: float):
    """Split at parameter z into (left, right) segments.

    left reparameterizes [0, z] so left(t) = seg(t*z); the right half is
    obtained by the reversal symmetry of the basis.
    """
    z = float(z)
    if not (0.0 < z < 1.0):
        raise DomainError(f"subdivision parameter {z} outside (0, 1)")
    k = seg.degree
    left = BezierSegment(_subdivision_matrix(k, z) @ seg.control_points)
    right = BezierSegment(
        (_subdivision_matrix(k, 1.0 - z) @ seg.control_points[::-1])[::-1]
    )
    return left, right


def sample_curvature(seg: BezierSegment, count: int) -> list[CurvatureSample]:
    """Curvature and speed at count uniformly spaced parameters."""
    count = int(count)
    if count < 2:
        raise DomainError("count must be >= 2")
    ts = np.linspace(0.0, 1.0, count)
    kappas, speeds = curvature_speed_many(seg, ts)
    return [CurvatureSample(float(t), float(k), float(s)) for t, k, s in zip(ts, kappas, speeds)]


def curvature_speed_many(seg: BezierSegment, ts: np.ndarray):
    """Vectorized signed curvature and speed at the given parameters."""
    ts = np.asarray(ts, dtype=float)
    d1 = evaluate_many(derivative_segment(seg, 1), ts)
    if seg.degree >= 2:
        d2 = evaluate_many(derivative_segment(seg, 2), ts)
    else:
        d2 = np.zeros_like(d1)
    speeds = np.hypot(d1[:, 0], d1[:, 1])
    eps = speed_epsilon(seg)
    bad = np.nonzero(speeds <= eps)[0]
    if bad.size:
        raise DegenerateSpeedError(float(ts[bad[0]]))
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    return det / speeds**3, speeds


@lru_cache(maxsize=256)
def _bernstein_row_cache(k: int, t: float) -> np.ndarray:
    return _bernstein_rows(k, np.array([t]))[0]


def _bernstein_rows(k: int, ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    j = np.arange(k + 1)
    coef = np.array([math.comb(k, jj) for jj in j], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rows = coef * ts[:, None] ** j * (1.0 - ts[:, None]) ** (k - j)
    return rows


def bernstein_matrix(k: int, ts: np.ndarray) -> np.ndarray:
    """Matrix B with B[q, j] = degree-k Bernstein basis j at ts[q]."""
    return _bernstein_rows(k, ts)


def bernstein_derivative_matrix(k: int, ts: np.ndarray, order: int) -> np.ndarray:
    """Matrix D with (D @ c)[q] = order-th derivative of the curve at ts[q].

    Built by forward-differencing the degree-(k-order) basis, matching the
    hodograph construction exactly.
    """
    if order == 0:
        return bernstein_matrix(k, ts)
    if order > k:
        return np.zeros((len(np.atleast_1d(ts)), k + 1))
    lower = _bernstein_rows(k - order, ts)
    # difference operator mapping c (k+1 pts) to order-th forward differences
    diff = np.eye(k + 1)
    scale = 1.0
    for i in range(order):
        deg = k - i
        scale *= deg
        d = np.zeros((deg, deg + 1))
        for r in range(deg):
            d[r, r] = -1.0
            d[r, r + 1] = 1.0
        diff = d @ diff
    return scale * (lower @ diff)
