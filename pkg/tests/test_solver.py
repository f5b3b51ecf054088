"""Window-solver tests: constraint satisfaction by construction, two-stage
behavior, cyclic windows, and the KKT report."""

import numpy as np
import pytest

from pkcurves import continuity, energy, geometry
from pkcurves.continuity import C1, C2, G1, G2, GeometricJointParams
from pkcurves.energy import EnergyWeights, ParabolaModel, QuadratureRule
from pkcurves.errors import DomainError, InfeasibleError, ShapeError
from pkcurves.geometry import BezierSegment
from pkcurves.solver import (
    InterpolationSpec,
    SegmentProblem,
    SolverSettings,
    WindowSegment,
    kkt_report,
    solve_stage,
    solve_two_stage,
)


def arc_segment(degree, start=(0.0, 0.0), mid=(1.0, 0.6), end=(2.0, 0.0), t=0.5):
    b = geometry.bernstein_matrix(2, np.array([t]))[0]
    c1 = (np.asarray(mid) - b[0] * np.asarray(start) - b[2] * np.asarray(end)) / b[1]
    quad = BezierSegment(np.vstack([start, c1, end]))
    return geometry.elevate_to(quad, degree)


def single_segment_problem(mode, mid=(1.0, 0.6), weights=None):
    seg = arc_segment(mode.degree, mid=mid)
    mask = np.ones(mode.degree + 1, dtype=bool)
    mask[0] = mask[-1] = False
    from pkcurves.builder import fit_parabola

    par = fit_parabola(seg, 0.5)
    return SegmentProblem(
        segments=(
            WindowSegment(seg.control_points, mask, par.coefficients,
                          InterpolationSpec(mid, 0.5)),
        ),
        mode=mode,
        weights=weights or EnergyWeights(),
    )


def joint_residual_max(outcome, mode):
    worst = 0.0
    for i in range(len(outcome.segments) - 1):
        params = None
        if mode.is_geometric:
            params = GeometricJointParams(*outcome.joint_params[i])
        r = continuity.joint_residual(outcome.segments[i], outcome.segments[i + 1], mode, params)
        worst = max(worst, r.max_abs)
    return worst


# --- validation -----------------------------------------------------------


def test_interpolation_spec_bounds():
    spec = InterpolationSpec((1.0, 2.0), 0.4)
    assert spec.t_bounds == (0.2, 0.7)
    with pytest.raises(DomainError):
        InterpolationSpec((0, 0), 1.5)


def test_settings_must_be_positive():
    with pytest.raises(DomainError):
        SolverSettings(epsilon=0.0)


def test_non_first_segments_must_have_derived_leads():
    seg = arc_segment(5)
    all_free = np.ones(6, dtype=bool)
    ok = all_free.copy()
    ok[:3] = False
    with pytest.raises(ShapeError):
        SegmentProblem(
            segments=(
                WindowSegment(seg.control_points, ok, np.zeros(3)),
                WindowSegment(seg.control_points, all_free, np.zeros(3)),
            ),
            mode=C2,
        )


def test_geometric_mode_needs_joint_params():
    seg = arc_segment(5)
    mask = np.ones(6, dtype=bool)
    mask2 = mask.copy()
    mask2[:3] = False
    with pytest.raises(ShapeError):
        SegmentProblem(
            segments=(
                WindowSegment(seg.control_points, mask, np.zeros(3)),
                WindowSegment(seg.control_points, mask2, np.zeros(3)),
            ),
            mode=G2,
        )


# --- single-segment solves ------------------------------------------------


@pytest.mark.parametrize("mode", [C1, C2, G1, G2])
def test_single_segment_constraints_hold(mode):
    problem = single_segment_problem(mode)
    outcome = solve_two_stage(problem)
    seg = outcome.segments[0]
    # endpoints frozen
    assert np.allclose(seg.control_points[0], [0, 0], atol=1e-12)
    assert np.allclose(seg.control_points[-1], [2, 0], atol=1e-12)
    # interpolation within tolerance
    t = outcome.t_values[0]
    assert np.linalg.norm(geometry.evaluate(seg, t) - [1.0, 0.6]) <= 1e-8
    lo, hi = problem.segments[0].interpolation.t_bounds
    assert lo <= t <= hi
    # vertex coupling (normalized by the window scale ~2)
    a0, a1, a2 = outcome.parabolas[0].coefficients
    assert abs(a1 + 2 * a2 * t) * 2.0 <= 1e-6


def test_fixed_t_keeps_parameter():
    seg = arc_segment(5, mid=(1.0, 0.0), end=(2.0, 0.0))  # straight line
    mask = np.ones(6, dtype=bool)
    mask[0] = mask[-1] = False
    problem = SegmentProblem(
        segments=(
            WindowSegment(seg.control_points, mask, np.zeros(3),
                          InterpolationSpec((1.0, 0.0), 0.5, fixed_t=True)),
        ),
        mode=C2,
    )
    outcome = solve_two_stage(problem)
    assert outcome.t_values[0] == pytest.approx(0.5)
    assert np.linalg.norm(geometry.evaluate(outcome.segments[0], 0.5) - [1, 0]) <= 1e-8


def test_infeasible_start_raises():
    seg = arc_segment(5)
    mask = np.zeros(6, dtype=bool)  # nothing free
    problem = SegmentProblem(
        segments=(
            WindowSegment(seg.control_points, mask, np.zeros(3),
                          InterpolationSpec((40.0, 40.0), 0.5, fixed_t=True)),
        ),
        mode=C2,
    )
    with pytest.raises(InfeasibleError):
        solve_two_stage(problem)


# --- multi-segment windows ------------------------------------------------


def window_problem(mode, n_segments=2, cyclic=False):
    """Chain of gentle arcs with derived leading control points."""
    from pkcurves.builder import fit_parabola

    k = mode.degree
    rng = np.random.default_rng(41)
    window = []
    joint_inits = []
    prev = None
    targets = [(1.0 + 2.0 * i, 0.5 + 0.1 * (i % 2)) for i in range(n_segments)]
    for i, target in enumerate(targets):
        start = (2.0 * i, 0.0)
        end = (2.0 * i + 2.0, 0.0)
        seg = arc_segment(k, start=start, mid=target, end=end)
        mask = np.ones(k + 1, dtype=bool)
        if i == 0 and not cyclic:
            mask[0] = False
        if i > 0:
            mask[: mode.order + 1] = False
        if i == n_segments - 1 and not cyclic:
            mask[-1] = False
        par = fit_parabola(seg, 0.5)
        window.append(
            WindowSegment(seg.control_points, mask, par.coefficients,
                          InterpolationSpec(target, 0.5))
        )
        if i > 0 and mode.is_geometric:
            joint_inits.append((1.0, 2.0))
        prev = seg
    if cyclic and mode.is_geometric:
        joint_inits.append((1.0, 2.0))
    return SegmentProblem(
        segments=tuple(window),
        mode=mode,
        joint_params_init=tuple(joint_inits),
        cyclic=cyclic,
    )


@pytest.mark.parametrize("mode", [C1, C2, G1, G2])
def test_two_segment_joint_continuity(mode):
    outcome = solve_two_stage(window_problem(mode))
    assert joint_residual_max(outcome, mode) <= 1e-8
    for seg, t, target in zip(outcome.segments, outcome.t_values,
                              [(1.0, 0.5), (3.0, 0.6)]):
        assert np.linalg.norm(geometry.evaluate(seg, t) - target) <= 1e-8


@pytest.mark.parametrize("mode", [C2, G2])
def test_cyclic_window_closes_the_loop(mode):
    outcome = solve_two_stage(window_problem(mode, n_segments=3, cyclic=True))
    params = None
    if mode.is_geometric:
        params = GeometricJointParams(*outcome.joint_params[-1])
    r = continuity.joint_residual(outcome.segments[-1], outcome.segments[0], mode, params)
    assert r.max_abs <= 1e-8
    assert joint_residual_max(outcome, mode) <= 1e-8


def test_two_stage_does_not_increase_parabolic_energy():
    problem = single_segment_problem(C2)
    stage1 = solve_stage(problem)
    full = solve_two_stage(problem)

    def ep(outcome):
        return energy.parabolic_energy(outcome.segments[0], outcome.parabolas[0], problem.rule)

    assert ep(full) <= ep(stage1) * (1.0 + 1e-9) + 1e-12


def test_alpha_stays_positive():
    outcome = solve_two_stage(window_problem(G2))
    for alpha, _eta in outcome.joint_params:
        assert alpha > 0


def test_stage_reports_present():
    outcome = solve_two_stage(single_segment_problem(C2))
    assert 1 <= len(outcome.stage_reports) <= 2
    for rep in outcome.stage_reports:
        assert rep.termination in ("tolerance", "iteration_cap", "stalled")
        assert rep.iterations >= 0


def test_kkt_report_small_at_solution():
    problem = single_segment_problem(C2)
    outcome = solve_two_stage(problem)
    rep = kkt_report(problem, outcome.unknowns)
    assert rep["max_equality_violation"] <= 1e-7
    assert rep["max_bound_violation"] <= 1e-12
    assert rep["projected_gradient_norm"] < 1.0  # near-stationary

    # a clearly non-optimal point scores worse
    x_bad = outcome.unknowns + 0.5
    rep_bad = kkt_report(problem, x_bad)
    assert rep_bad["max_equality_violation"] > rep["max_equality_violation"]
