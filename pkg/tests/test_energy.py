"""Energy tests: quadrature against an adaptive oracle, closed-form
regularizer values, and analytic gradients against central differences."""

import numpy as np
import pytest
from scipy import integrate

from pkcurves import energy, geometry
from pkcurves.energy import (
    EnergyWeights,
    ParabolaModel,
    QuadratureRule,
    curve_length_energy,
    edge_length_energy,
    parabolic_energy,
    segment_energy,
    segment_energy_gradient,
)
from pkcurves.errors import DegenerateSpeedError, DomainError
from pkcurves.geometry import BezierSegment


def rand_smooth_segment(rng, degree=5):
    """Random gently varying segment: evenly spaced x with small jitter and
    moderate y amplitude, keeping speed and curvature well behaved."""
    x = np.linspace(0, 4, degree + 1) + rng.uniform(-0.1, 0.1, degree + 1)
    y = rng.uniform(-0.3, 0.3, degree + 1)
    return BezierSegment(np.column_stack([x, y]))


def adaptive_parabolic_energy(seg, parabola, tol=1e-10):
    """Adaptive-quadrature oracle for the parabolic misfit energy."""

    def f(t):
        kappa = geometry.curvature(seg, t)
        d1 = geometry.evaluate(geometry.derivative_segment(seg), t)
        speed = np.hypot(*d1)
        q = parabola.a0 + parabola.a1 * t + parabola.a2 * t * t
        return (kappa - q) ** 2 * speed

    value, _err = integrate.quad(f, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    return value


# --- types ----------------------------------------------------------------


def test_parabola_model_call_and_extremum():
    p = ParabolaModel(1.0, -2.0, 1.0)
    assert p(0.0) == 1.0 and p(1.0) == 0.0
    assert p.extremum() == pytest.approx(1.0)
    flat = ParabolaModel(2.0, 0.5, 0.0)
    assert flat.extremum() is None


def test_parabola_model_rejects_nonfinite():
    with pytest.raises(DomainError):
        ParabolaModel(np.inf, 0.0, 0.0)


def test_weights_validation_and_zero():
    with pytest.raises(DomainError):
        EnergyWeights(-0.1, 0.0)
    z = EnergyWeights.zero()
    assert z.lambda_e == 0.0 and z.lambda_c == 0.0


def test_quadrature_rule_nodes_weights():
    rule = QuadratureRule(2)
    nodes, w = rule.nodes_weights()
    assert len(nodes) == 5
    # composite Simpson weights over 2 sub-intervals: [1,4,2,4,1] / 12
    assert np.allclose(w, np.array([1, 4, 2, 4, 1]) / 12.0)
    assert w.sum() == pytest.approx(1.0)
    with pytest.raises(DomainError):
        QuadratureRule(0)


def test_quadrature_rule_exact_for_cubics():
    """Simpson's rule integrates polynomials of degree <= 3 exactly."""
    nodes, w = QuadratureRule(100).nodes_weights()
    for p in range(4):
        assert np.sum(w * nodes**p) == pytest.approx(1.0 / (p + 1), rel=1e-13)


# --- closed-form regularizers ---------------------------------------------


def test_edge_length_energy_closed_form():
    # legs: (1,0), (2,0) -> squared lengths 1, 4 -> one difference: 9
    seg = BezierSegment([[0, 0], [1, 0], [3, 0]])
    assert edge_length_energy(seg) == pytest.approx(9.0)


def test_edge_length_energy_zero_for_uniform_polygon():
    seg = BezierSegment([[0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [5, 0]])
    assert edge_length_energy(seg) == 0.0


def test_curve_length_energy_closed_form():
    seg = BezierSegment([[0, 0], [3, 4], [3, 4]])
    # legs: length 5 and 0 -> 25 + 0
    assert curve_length_energy(seg) == pytest.approx(25.0)


def test_straight_segment_zero_parabolic_energy():
    seg = BezierSegment([[0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [5, 0]])
    assert parabolic_energy(seg, ParabolaModel(0, 0, 0), QuadratureRule()) == pytest.approx(
        0.0, abs=1e-15
    )


def test_degenerate_speed_raises_with_node():
    seg = BezierSegment([[0, 0], [1, 0], [0, 0], [1, 0], [0, 0], [1, 0]])
    with pytest.raises(DegenerateSpeedError):
        parabolic_energy(seg, ParabolaModel(0, 0, 0), QuadratureRule())


# --- quadrature fidelity --------------------------------------------------


def test_parabolic_energy_matches_adaptive_oracle():
    rng = np.random.default_rng(31)
    rule = QuadratureRule(100)
    for _ in range(50):
        seg = rand_smooth_segment(rng)
        parabola = ParabolaModel(*rng.uniform(-1, 1, 3))
        ours = parabolic_energy(seg, parabola, rule)
        oracle = adaptive_parabolic_energy(seg, parabola)
        assert ours == pytest.approx(oracle, rel=1e-6, abs=1e-12)


def test_segment_energy_is_weighted_sum():
    rng = np.random.default_rng(32)
    seg = rand_smooth_segment(rng)
    parabola = ParabolaModel(0.2, -0.1, 0.4)
    rule = QuadratureRule()
    w = EnergyWeights(0.3, 0.7)
    expected = (
        parabolic_energy(seg, parabola, rule)
        + 0.3 * edge_length_energy(seg)
        + 0.7 * curve_length_energy(seg)
    )
    assert segment_energy(seg, parabola, w, rule) == pytest.approx(expected, rel=1e-14)


# --- gradients ------------------------------------------------------------


def flat_energy(x, degree, weights, rule):
    cps = x[: 2 * (degree + 1)].reshape(-1, 2)
    parabola = ParabolaModel(*x[2 * (degree + 1) :])
    return segment_energy(BezierSegment(cps), parabola, weights, rule)


def fd_gradient(x, degree, weights, rule, h=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (flat_energy(xp, degree, weights, rule) - flat_energy(xm, degree, weights, rule)) / (
            2 * h
        )
    return g


@pytest.mark.parametrize("weights", [EnergyWeights(0.0, 0.0), EnergyWeights(0.1, 0.1)])
def test_gradient_matches_finite_differences(weights):
    rng = np.random.default_rng(33)
    rule = QuadratureRule()
    for _ in range(10):
        seg = rand_smooth_segment(rng)
        parabola = ParabolaModel(*rng.uniform(-1, 1, 3))
        x = np.concatenate([seg.control_points.ravel(), parabola.coefficients])
        analytic = segment_energy_gradient(seg, parabola, weights, rule)
        numeric = fd_gradient(x, 5, weights, rule)
        scale = np.maximum(np.abs(numeric), 1.0)
        assert np.max(np.abs(analytic - numeric) / scale) <= 1e-5


def test_gradient_of_quartic_segments():
    rng = np.random.default_rng(34)
    rule = QuadratureRule()
    weights = EnergyWeights(0.1, 0.1)
    for _ in range(5):
        seg = rand_smooth_segment(rng, degree=4)
        parabola = ParabolaModel(*rng.uniform(-1, 1, 3))
        x = np.concatenate([seg.control_points.ravel(), parabola.coefficients])
        analytic = segment_energy_gradient(seg, parabola, weights, rule)
        numeric = fd_gradient(x, 4, weights, rule)
        scale = np.maximum(np.abs(numeric), 1.0)
        assert np.max(np.abs(analytic - numeric) / scale) <= 1e-5


def test_gradient_zero_at_straight_optimum():
    """For a uniform straight control polygon and zero parabola, the energy
    is at a stationary point in the parabola coefficients."""
    seg = BezierSegment([[0, 0], [1, 0], [2, 0], [3, 0], [4, 0], [5, 0]])
    g = segment_energy_gradient(seg, ParabolaModel(0, 0, 0), EnergyWeights.zero(), QuadratureRule())
    # parabola part of the gradient vanishes (residual is identically zero)
    assert np.allclose(g[-3:], 0.0, atol=1e-14)
