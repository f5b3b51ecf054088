"""Energy terms for one Bezier segment: the parabolic-curvature misfit, the
edge-length regularizer, the control-polygon length term, their weighted sum,
and analytic gradients consistent with the fixed quadrature rule.

The gradient differentiates the discretized objective (the quadrature sum
itself), so objective and gradient always agree for the solver's line search.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import geometry
from .errors import DegenerateSpeedError, DomainError
from .geometry import BezierSegment

# Below this |a2| (after unit-bbox normalization) the parabola has no usable
# interior extremum and the vertex formula -a1/(2*a2) is not applied.
A2_MIN = 1e-8

DEFAULT_LAMBDA = 0.1


@dataclass(frozen=True)
class ParabolaModel:
    """Target curvature parabola a0 + a1*t + a2*t^2."""

    a0: float
    a1: float
    a2: float

    def __post_init__(self):
        if not all(np.isfinite([self.a0, self.a1, self.a2])):
            raise DomainError("non-finite parabola coefficients")

    def __call__(self, t):
        return self.a0 + self.a1 * t + self.a2 * t * t

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2])

    def extremum(self) -> float | None:
        """Vertex parameter, or None when a2 is below the degeneracy guard."""
        if abs(self.a2) < A2_MIN:
            return None
        return -self.a1 / (2.0 * self.a2)


@dataclass(frozen=True)
class EnergyWeights:
    """Weights of the edge-length and curve-length terms."""

    lambda_e: float = DEFAULT_LAMBDA
    lambda_c: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.lambda_e < 0 or self.lambda_c < 0:
            raise DomainError("weights must be nonnegative")

    @staticmethod
    def zero() -> "EnergyWeights":
        return EnergyWeights(0.0, 0.0)


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Simpson rule over equal sub-intervals of [0, 1]."""

    subintervals: int = 100

    def __post_init__(self):
        if self.subintervals < 1:
            raise DomainError("subintervals must be >= 1")

    def nodes_weights(self):
        return _simpson_nodes_weights(self.subintervals)


@lru_cache(maxsize=32)
def _simpson_nodes_weights(m: int):
    nodes = np.linspace(0.0, 1.0, 2 * m + 1)
    w = np.full(2 * m + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w /= 6.0 * m
    nodes.setflags(write=False)
    w.setflags(write=False)
    return nodes, w


@lru_cache(maxsize=64)
def _basis_matrices(degree: int, m: int):
    nodes, w = _simpson_nodes_weights(m)
    d1 = geometry.bernstein_derivative_matrix(degree, nodes, 1)
    d2 = geometry.bernstein_derivative_matrix(degree, nodes, 2)
    d1.setflags(write=False)
    d2.setflags(write=False)
    return nodes, w, d1, d2


def _node_kinematics(seg: BezierSegment, rule: QuadratureRule, clamp: bool = False):
    nodes, w, d1m, d2m = _basis_matrices(seg.degree, rule.subintervals)
    c = seg.control_points
    d1 = d1m @ c
    d2 = d2m @ c
    speed = np.hypot(d1[:, 0], d1[:, 1])
    eps = geometry.speed_epsilon(seg)
    bad = np.nonzero(speed <= eps)[0]
    if bad.size:
        if not clamp:
            raise DegenerateSpeedError(float(nodes[bad[0]]))
        # optimizer iterates may pass through near-cusps; clamp the speed so
        # the objective stays finite and the line search can back off
        speed = np.maximum(speed, max(eps, 1e-300))
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    kappa = det / speed**3
    return nodes, w, d1m, d2m, d1, d2, speed, det, kappa


def parabolic_energy(seg: BezierSegment, parabola: ParabolaModel, rule: QuadratureRule) -> float:
    """Quadrature of (kappa - Q)^2 * speed over [0, 1]."""
    nodes, w, *_rest, speed, _det, kappa = _node_kinematics(seg, rule)
    resid = kappa - parabola(nodes)
    return float(np.sum(w * resid**2 * speed))


def edge_length_energy(seg: BezierSegment) -> float:
    """Squared differences of consecutive squared control-leg lengths."""
    legs = np.diff(seg.control_points, axis=0)
    sq = np.sum(legs**2, axis=1)
    return float(np.sum(np.diff(sq) ** 2))


def curve_length_energy(seg: BezierSegment) -> float:
    """Sum of squared control-leg lengths."""
    legs = np.diff(seg.control_points, axis=0)
    return float(np.sum(legs**2))


def segment_energy(
    seg: BezierSegment,
    parabola: ParabolaModel,
    weights: EnergyWeights,
    rule: QuadratureRule,
) -> float:
    e = parabolic_energy(seg, parabola, rule)
    if weights.lambda_e:
        e += weights.lambda_e * edge_length_energy(seg)
    if weights.lambda_c:
        e += weights.lambda_c * curve_length_energy(seg)
    return e


def parabolic_energy_with_grad(
    seg: BezierSegment,
    parabola: ParabolaModel,
    rule: QuadratureRule,
    clamp: bool = False,
):
    """Value plus gradients wrt control points ((k+1, 2) array) and the three
    parabola coefficients."""
    nodes, w, d1m, d2m, d1, d2, speed, det, kappa = _node_kinematics(seg, rule, clamp)
    q = parabola(nodes)
    resid = kappa - q
    value = float(np.sum(w * resid**2 * speed))

    # d(det)/dc and d(speed)/dc per node and control point
    # det = x'y'' - y'x'';  speed = |P'|
    ddet_dx = d1m * d2[:, 1][:, None] - d1[:, 1][:, None] * d2m  # (q, k+1)
    ddet_dy = d1[:, 0][:, None] * d2m - d1m * d2[:, 0][:, None]
    dspeed_dx = d1[:, 0][:, None] * d1m / speed[:, None]
    dspeed_dy = d1[:, 1][:, None] * d1m / speed[:, None]

    s3 = speed**3
    dkappa_dx = (ddet_dx - 3.0 * (kappa * speed**2)[:, None] * dspeed_dx) / s3[:, None]
    dkappa_dy = (ddet_dy - 3.0 * (kappa * speed**2)[:, None] * dspeed_dy) / s3[:, None]

    coef_k = 2.0 * w * resid * speed  # multiplies dkappa
    coef_s = w * resid**2  # multiplies dspeed
    gx = coef_k @ dkappa_dx + coef_s @ dspeed_dx
    gy = coef_k @ dkappa_dy + coef_s @ dspeed_dy
    grad_c = np.stack([gx, gy], axis=1)

    base = -2.0 * w * resid * speed
    grad_a = np.array([np.sum(base), np.sum(base * nodes), np.sum(base * nodes**2)])
    return value, grad_c, grad_a


def edge_length_energy_with_grad(seg: BezierSegment):
    c = seg.control_points
    legs = np.diff(c, axis=0)
    sq = np.sum(legs**2, axis=1)
    diffs = np.diff(sq)
    value = float(np.sum(diffs**2))
    grad = np.zeros_like(c)
    for j in range(len(diffs)):
        f = 2.0 * diffs[j]
        # d(sq_j)/dc: 2*legs[j] at c_j, -2*legs[j] at c_{j+1}
        grad[j] += f * 2.0 * legs[j]
        grad[j + 1] += -f * 2.0 * legs[j]
        grad[j + 1] += -f * 2.0 * legs[j + 1]
        grad[j + 2] += f * 2.0 * legs[j + 1]
    return value, grad


def curve_length_energy_with_grad(seg: BezierSegment):
    c = seg.control_points
    legs = np.diff(c, axis=0)
    value = float(np.sum(legs**2))
    grad = np.zeros_like(c)
    grad[:-1] += -2.0 * legs
    grad[1:] += 2.0 * legs
    return value, grad


def segment_energy_with_grad(
    seg: BezierSegment,
    parabola: ParabolaModel,
    weights: EnergyWeights,
    rule: QuadratureRule,
    clamp: bool = False,
):
    """Weighted-sum value plus gradients wrt control points and parabola."""
    value, grad_c, grad_a = parabolic_energy_with_grad(seg, parabola, rule, clamp)
    if weights.lambda_e:
        ve, ge = edge_length_energy_with_grad(seg)
        value += weights.lambda_e * ve
        grad_c = grad_c + weights.lambda_e * ge
    if weights.lambda_c:
        vc, gc = curve_length_energy_with_grad(seg)
        value += weights.lambda_c * vc
        grad_c = grad_c + weights.lambda_c * gc
    return value, grad_c, grad_a


def segment_energy_gradient(
    seg: BezierSegment,
    parabola: ParabolaModel,
    weights: EnergyWeights,
    rule: QuadratureRule,
) -> np.ndarray:
    """Gradient wrt the flattened vector (x0, y0, ..., xk, yk, a0, a1, a2)."""
    _value, grad_c, grad_a = segment_energy_with_grad(seg, parabola, weights, rule)
    return np.concatenate([grad_c.ravel(), grad_a])
