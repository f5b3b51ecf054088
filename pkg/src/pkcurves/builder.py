"""Incremental curve construction: three-point bootstrap, point insertion
with a three-segment re-optimization window, curve closure, and local point
editing.  Documents are immutable values; every operation returns a new one,
leaving out-of-window segments bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import continuity, geometry
from .continuity import ALPHA_MIN, ContinuityMode
from .energy import A2_MIN, EnergyWeights, ParabolaModel, QuadratureRule
from .errors import DegenerateInputError, DomainError, InfeasibleError, PkcError
from .geometry import BezierSegment
from .solver import (
    InterpolationSpec,
    SegmentProblem,
    SolveOutcome,
    SolverSettings,
    WindowSegment,
    solve_two_stage,
)

PARABOLA_SAMPLES = 100

# Normalized per-segment objective above which an insertion/closure solve is
# retried from a gentler (elevated-quadratic) window initialization.
RETRY_OBJECTIVE = 0.02


@dataclass(frozen=True)
class SegmentRecord:
    """One stitched segment plus its interpolation data."""

    segment: BezierSegment
    point_index: int
    t: float
    parabola: ParabolaModel


@dataclass(frozen=True)
class CurveDocument:
    """Ordered interpolation points and the stitched segment list."""

    mode: ContinuityMode
    points: tuple = ()
    records: tuple[SegmentRecord, ...] = ()
    topology: str = "open"
    joint_params: tuple[tuple[float, float], ...] = ()
    weights: EnergyWeights = field(default_factory=EnergyWeights)
    rule: QuadratureRule = field(default_factory=QuadratureRule)
    settings: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(geometry.as_point(p) for p in self.points))
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "joint_params", tuple(tuple(jp) for jp in self.joint_params))
        if self.topology not in ("open", "closed"):
            raise DomainError(f"unknown topology {self.topology!r}")

    @property
    def segments(self) -> tuple[BezierSegment, ...]:
        return tuple(r.segment for r in self.records)

    @property
    def n_joints(self) -> int:
        n = len(self.records)
        if n < 2:
            return 0
        return n if self.topology == "closed" else n - 1

    def bbox_diagonal(self) -> float:
        pts = np.array([p for p in self.points])
        if len(self.records):
            pts = np.vstack([pts] + [r.segment.control_points for r in self.records])
        if pts.size == 0:
            return 0.0
        return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def new_document(
    mode: ContinuityMode,
    weights: EnergyWeights | None = None,
    rule: QuadratureRule | None = None,
    settings: SolverSettings | None = None,
) -> CurveDocument:
    return CurveDocument(
        mode=mode,
        weights=weights or EnergyWeights(),
        rule=rule or QuadratureRule(),
        settings=settings or SolverSettings(),
    )


# --- parabola fitting -----------------------------------------------------


def fit_parabola(seg: BezierSegment, t_axis: float) -> ParabolaModel:
    """Least-squares parabola through uniformly sampled curvature values,
    constrained to have its vertex at t_axis (a1 = -2*a2*t_axis)."""
    ts = np.linspace(0.0, 1.0, PARABOLA_SAMPLES)
    kappa, _speed = geometry.curvature_speed_many(seg, ts)
    if np.allclose(kappa, kappa[0], rtol=0.0, atol=1e-300) or np.ptp(kappa) == 0.0:
        return ParabolaModel(float(np.mean(kappa)), 0.0, 0.0)
    design = np.column_stack([np.ones_like(ts), ts**2 - 2.0 * t_axis * ts])
    sol, *_ = np.linalg.lstsq(design, kappa, rcond=None)
    a0, a2 = float(sol[0]), float(sol[1])
    return ParabolaModel(a0, -2.0 * a2 * t_axis, a2)


def _window_scale(segs, targets) -> float:
    pts = np.vstack([s.control_points for s in segs] + [np.atleast_2d(t) for t in targets])
    return max(float(np.max(pts.max(axis=0) - pts.min(axis=0))), 1e-300)


def _interp_spec(target, t_hat, parabola: ParabolaModel, scale: float) -> InterpolationSpec:
    # The vertex coupling is dropped when the fitted parabola is too flat
    # for -a1/(2*a2) to be meaningful (measured in unit-bbox units).
    degenerate = abs(parabola.a2) * scale < A2_MIN
    return InterpolationSpec(target=target, t_hat=t_hat, fixed_t=degenerate)


# --- direct constructions -------------------------------------------------


def _quadratic_through(p0, p1, p2, t_hat) -> BezierSegment:
    b = geometry.bernstein_matrix(2, np.array([t_hat]))[0]
    if b[1] < 1e-12:
        raise DegenerateInputError("interpolation parameter collapsed to an endpoint")
    c1 = (p1 - b[0] * p0 - b[2] * p2) / b[1]
    return BezierSegment(np.vstack([p0, c1, p2]))


def _chord_t(a, b, c) -> float:
    la = float(np.linalg.norm(b - a))
    lb = float(np.linalg.norm(c - b))
    if la + lb <= 0.0 or la <= 0.0 or lb <= 0.0:
        raise DegenerateInputError("zero chord length")
    return la / (la + lb)


def _build_last_segment(prev: BezierSegment, p_interp, p_end, t_hat, order: int) -> BezierSegment:
    """Unique new trailing segment: continuity with `prev` at the joint, end
    point p_end, midpoint rule on the second-to-last leg, interpolation of
    p_interp at t_hat."""
    k = prev.degree
    b = geometry.bernstein_matrix(k, np.array([t_hat]))[0]
    if order == 2:
        lead = continuity.enforce_c2_forward(prev, np.zeros((k - 2, 2))).control_points[:3]
        free_idx = k - 2
    else:
        lead = continuity.enforce_c1_forward(prev, np.zeros((k - 1, 2))).control_points[:2]
        free_idx = k - 2
    # c_{k-1} = (c_{k-2} + c_k) / 2 with c_k = p_end; solve for c_{k-2}
    known = sum(b[j] * lead[j] for j in range(len(lead)))
    denom = b[free_idx] + 0.5 * b[k - 1]
    rhs = p_interp - known - (0.5 * b[k - 1] + b[k]) * p_end
    c_free = rhs / denom
    pts = np.zeros((k + 1, 2))
    pts[: len(lead)] = lead
    pts[free_idx] = c_free
    pts[k] = p_end
    pts[k - 1] = 0.5 * (c_free + p_end)
    return BezierSegment(pts)


def _restore_joint_parametric(left: BezierSegment, right: BezierSegment, order: int):
    """After subdividing the right-hand curve, re-establish parametric
    continuity at the joint by moving the joint to the midpoint of the
    surrounding legs and, at second order, recomputing the right segment's
    third control point."""
    cl = left.control_points.copy()
    cr = right.control_points.copy()
    k = left.degree
    joint = 0.5 * (cl[k - 1] + cr[1])
    cl[k] = joint
    cr[0] = joint
    if order == 2:
        cr[2] = cl[k - 2] - 2.0 * cl[k - 1] + 2.0 * cr[1]
    return BezierSegment(cl), BezierSegment(cr)


def _alt_segment_through(start, target, end, t_hat, degree) -> BezierSegment:
    """Elevated quadratic through three points: a gentle initialization used
    when the direct construction loops or cusps."""
    quad = _quadratic_through(start, target, end, t_hat)
    return geometry.elevate_to(quad, degree)


def _better_outcome(a: SolveOutcome, b: SolveOutcome) -> SolveOutcome:
    return min((a, b), key=lambda o: (o.degraded, o.objective))


def _joint_init(left: BezierSegment, right: BezierSegment) -> tuple[float, float]:
    try:
        alpha = continuity.recover_alpha(left, right)
    except DomainError:
        alpha = 1.0
    return (max(alpha, ALPHA_MIN), 2.0)


# --- document assembly ----------------------------------------------------


def _apply_outcome(
    doc: CurveDocument,
    outcome: SolveOutcome,
    window_list_indices: list[int],
    point_indices: list[int],
    new_topology: str | None = None,
) -> CurveDocument:
    records = list(doc.records)
    t_iter = iter(outcome.t_values)
    for wi, li in enumerate(window_list_indices):
        rec = SegmentRecord(
            segment=outcome.segments[wi],
            point_index=point_indices[wi],
            t=next(t_iter),
            parabola=outcome.parabolas[wi],
        )
        if li < len(records):
            records[li] = rec
        else:
            records.append(rec)
    topology = new_topology or doc.topology
    n_rec = len(records)
    n_joints = n_rec if topology == "closed" else max(n_rec - 1, 0)
    joint_params = list(doc.joint_params) + [(1.0, 2.0)] * max(
        n_joints - len(doc.joint_params), 0
    )
    joint_params = joint_params[:n_joints]
    # joints inside the window (between consecutive window segments)
    for wi in range(len(window_list_indices) - 1):
        joint_params[window_list_indices[wi]] = outcome.joint_params[wi]
    if len(outcome.joint_params) == len(window_list_indices):  # cyclic problem
        joint_params[window_list_indices[-1]] = outcome.joint_params[-1]
    return replace(
        doc, records=tuple(records), joint_params=tuple(joint_params), topology=topology
    )


# --- public operations ----------------------------------------------------


def bootstrap_three_points(p0, p1, p2, mode: ContinuityMode, doc: CurveDocument | None = None) -> CurveDocument:
    """Single-segment curve through three points."""
    p0, p1, p2 = (geometry.as_point(p) for p in (p0, p1, p2))
    doc = doc or new_document(mode)
    t_hat = _chord_t(p0, p1, p2)
    quad = _quadratic_through(p0, p1, p2, t_hat)
    init = geometry.elevate_to(quad, mode.degree)
    parabola = fit_parabola(init, t_hat)
    scale = _window_scale([init], [p1])
    mask = np.ones(mode.degree + 1, dtype=bool)
    mask[0] = mask[-1] = False
    problem = SegmentProblem(
        segments=(
            WindowSegment(init.control_points, mask, parabola.coefficients,
                          _interp_spec(p1, t_hat, parabola, scale)),
        ),
        mode=mode,
        weights=doc.weights,
        rule=doc.rule,
    )
    outcome = solve_two_stage(problem, doc.settings)
    doc = replace(doc, points=(p0, p1, p2), records=(), joint_params=())
    return _apply_outcome(doc, outcome, [0], [1])


def init_open_window(doc: CurveDocument, p_new):
    """Initial segments, t_hat values, and parabolas for inserting p_new.

    Returns (segments, t_hats, parabolas, n_reoptimized) where n_reoptimized
    is the number of trailing document segments replaced by the window.
    """
    p_new = geometry.as_point(p_new)
    mode = doc.mode
    records = doc.records
    p_last = doc.points[-1]
    if float(np.linalg.norm(p_new - p_last)) == 0.0:
        raise DegenerateInputError("new point coincides with the last point")

    old_last = records[-1]
    t_ring = old_last.t
    if not (0.0 < t_ring < 1.0):
        raise PkcError(f"stored interpolation parameter {t_ring} outside (0, 1)")
    z = (1.0 + t_ring) / 2.0
    seg_b, _ = geometry.subdivide(old_last.segment, z)
    t_hat_b = t_ring / z

    joint = seg_b.control_points[-1]
    t_hat_c = _chord_t(joint, p_last, p_new)
    seg_c = _build_last_segment(seg_b, p_last, p_new, t_hat_c, mode.order)

    segs = [seg_b, seg_c]
    t_hats = [t_hat_b, t_hat_c]
    n_reopt = 1
    if len(records) >= 2:
        seg_a = records[-2].segment
        if not mode.is_geometric:
            seg_a, seg_b = _restore_joint_parametric(seg_a, seg_b, mode.order)
            seg_c = _build_last_segment(seg_b, p_last, p_new, t_hat_c, mode.order)
        segs = [seg_a, seg_b, seg_c]
        t_hats = [records[-2].t, t_hat_b, t_hat_c]
        n_reopt = 2
    parabolas = [fit_parabola(s, t) for s, t in zip(segs, t_hats)]
    return segs, t_hats, parabolas, n_reopt


def insert_point(doc: CurveDocument, p_new) -> CurveDocument:
    """Append one interpolation point, re-optimizing at most the trailing
    three segments."""
    if doc.topology != "open":
        raise DomainError("can only insert into an open document")
    p_new = geometry.as_point(p_new)
    if len(doc.points) < 2:
        for q in doc.points:
            if float(np.linalg.norm(p_new - q)) == 0.0:
                raise DegenerateInputError("coincident input points")
        return replace(doc, points=doc.points + (p_new,))
    if len(doc.points) == 2:
        return bootstrap_three_points(doc.points[0], doc.points[1], p_new, doc.mode, doc)

    segs, t_hats, parabolas, n_reopt = init_open_window(doc, p_new)
    scale = _window_scale(segs, [p_new])
    n_before = len(doc.records) - n_reopt  # untouched segments before the window

    window_segments = []
    joint_inits = []
    point_indices = []
    last_point_idx = len(doc.points) - 1
    for wi, (seg, t_hat, par) in enumerate(zip(segs, t_hats, parabolas)):
        k = seg.degree
        mask = np.ones(k + 1, dtype=bool)
        if wi == 0:
            if n_before > 0:
                mask[: doc.mode.order + 1] = False  # continuity into the frozen neighbor
            else:
                mask[0] = False  # open-curve end condition
        else:
            mask[: doc.mode.order + 1] = False  # derived from the previous window segment
        if wi == len(segs) - 1:
            mask[k] = False  # ends at the new point
        target_idx = last_point_idx - (len(segs) - 1 - wi)
        point_indices.append(target_idx)
        window_segments.append(
            WindowSegment(
                seg.control_points,
                mask,
                par.coefficients,
                _interp_spec(doc.points[target_idx] if target_idx < len(doc.points) else p_new,
                             t_hat, par, scale),
            )
        )
        if wi > 0 and doc.mode.is_geometric:
            joint_inits.append(_joint_init(segs[wi - 1], seg))

    def make_problem(window):
        return SegmentProblem(
            segments=tuple(window),
            mode=doc.mode,
            weights=doc.weights,
            rule=doc.rule,
            joint_params_init=tuple(joint_inits),
        )

    try:
        outcome = solve_two_stage(make_problem(window_segments), doc.settings)
    except PkcError:
        outcome = None
    if outcome is None or outcome.degraded or outcome.objective > RETRY_OBJECTIVE * len(segs):
        # the direct trailing-segment construction can loop back on itself
        # for sharp turns; retry from an elevated-quadratic initialization
        try:
            alt = _alt_segment_through(
                segs[-1].control_points[0], doc.points[-1], p_new, t_hats[-1], doc.mode.degree
            )
            last = window_segments[-1]
            try:
                alt_par = fit_parabola(alt, t_hats[-1])
            except PkcError:
                alt_par = parabolas[-1]
            window_segments[-1] = WindowSegment(
                alt.control_points,
                last.free_mask,
                alt_par.coefficients,
                _interp_spec(doc.points[point_indices[-1]], t_hats[-1], alt_par, scale),
            )
            alt_outcome = solve_two_stage(make_problem(window_segments), doc.settings)
            outcome = alt_outcome if outcome is None else _better_outcome(outcome, alt_outcome)
        except PkcError:
            pass
    if outcome is None or outcome.degraded or outcome.objective > RETRY_OBJECTIVE * len(segs):
        # last resort for sharp turns: restart every window segment from a
        # straight polyline through the window targets
        try:
            targets = [
                p_new if idx >= len(doc.points) else np.asarray(doc.points[idx])
                for idx in point_indices
            ]
            bounds = [segs[0].control_points[0]]
            for wi in range(len(segs) - 1):
                bounds.append(0.5 * (targets[wi] + targets[wi + 1]))
            bounds.append(p_new)
            straight = []
            for wi, ws in enumerate(window_segments):
                cps = np.linspace(bounds[wi], bounds[wi + 1], doc.mode.degree + 1)
                cps[~ws.free_mask] = segs[wi].control_points[~ws.free_mask]
                if wi == len(segs) - 1:
                    cps[-1] = p_new
                straight.append(WindowSegment(cps, ws.free_mask, ws.parabola_init, ws.interpolation))
            alt_outcome = solve_two_stage(make_problem(straight), doc.settings)
            outcome = alt_outcome if outcome is None else _better_outcome(outcome, alt_outcome)
        except PkcError:
            pass
    if outcome is None:
        raise InfeasibleError(float("nan"), "window optimization failed from both initializations")
    doc = replace(doc, points=doc.points + (p_new,))
    list_indices = list(range(n_before, n_before + len(segs)))
    return _apply_outcome(doc, outcome, list_indices, point_indices)


# --- closure --------------------------------------------------------------


def _closed_bridge_second_order(seg_a, seg_c, p_prev, p_0, p_next, t_a, t_0, t_c):
    """Solve the linear system fixing the bridging quintic's four interior
    control points: interpolation of the three window points, plus the
    midpoint pass-through condition at t = 0.5."""
    ca = seg_a.control_points
    cc = seg_c.control_points
    c00 = ca[5]
    c0k = cc[0]
    b_a = geometry.bernstein_matrix(5, np.array([t_a]))[0]
    b_0 = geometry.bernstein_matrix(5, np.array([t_0]))[0]
    b_c = geometry.bernstein_matrix(5, np.array([t_c]))[0]
    b_h = geometry.bernstein_matrix(5, np.array([0.5]))[0]

    m = np.zeros((4, 4))
    rhs = np.zeros((4, 2))
    # bridging curve ends C2-continuous into both neighbors, so the
    # neighbors' inner control points are linear in the bridge's.
    m[0, 0] = -4.0 * b_a[3] - b_a[4]
    m[0, 1] = b_a[3]
    rhs[0] = p_prev - (b_a[0] * ca[0] + b_a[1] * ca[1] + b_a[2] * ca[2]
                       + (4.0 * b_a[3] + 2.0 * b_a[4] + b_a[5]) * c00)
    m[1] = b_0[1:5]
    rhs[1] = p_0 - b_0[0] * c00 - b_0[5] * c0k
    m[2, 2] = b_c[2]
    m[2, 3] = -b_c[1] - 4.0 * b_c[2]
    rhs[2] = p_next - ((b_c[0] + 2.0 * b_c[1] + 4.0 * b_c[2]) * c0k
                       + b_c[3] * cc[3] + b_c[4] * cc[4] + b_c[5] * cc[5])
    m[3] = b_h[1:5]
    rhs[3] = (c00 + 2.0 * p_0 + c0k) / 4.0 - b_h[0] * c00 - b_h[5] * c0k

    u = np.linalg.solve(m, rhs)
    bridge = BezierSegment(np.vstack([c00, u, c0k]))
    new_a = ca.copy()
    new_a[5] = c00
    new_a[4] = 2.0 * c00 - u[0]
    new_a[3] = 4.0 * c00 - 4.0 * u[0] + u[1]
    new_c = cc.copy()
    new_c[0] = c0k
    new_c[1] = 2.0 * c0k - u[3]
    new_c[2] = u[2] - 4.0 * u[3] + 4.0 * c0k
    return BezierSegment(new_a), bridge, BezierSegment(new_c)


def _closed_bridge_first_order(seg_a, seg_c, p_0, t_0):
    """Quartic bridge: C1 at both ends, interpolation of p_0 at t_0."""
    ca = seg_a.control_points
    cc = seg_c.control_points
    c00 = ca[4]
    c0k = cc[0]
    c1 = 2.0 * c00 - ca[3]
    c3 = 2.0 * c0k - cc[1]
    b = geometry.bernstein_matrix(4, np.array([t_0]))[0]
    c2 = (p_0 - b[0] * c00 - b[1] * c1 - b[3] * c3 - b[4] * c0k) / b[2]
    return BezierSegment(np.vstack([c00, c1, c2, c3, c0k]))


def _enforce_boundary_parametric(seg, neighbor, order, side):
    """Pin a window-boundary joint back to parametric continuity with the
    untouched neighbor, replacing the leading (side='head') or trailing
    (side='tail') control points."""
    cps = seg.control_points.copy()
    k = seg.degree
    if side == "head":
        nb = neighbor.control_points
        cps[0] = nb[k]
        cps[1] = 2.0 * nb[k] - nb[k - 1]
        if order == 2:
            cps[2] = nb[k - 2] - 2.0 * nb[k - 1] + 2.0 * cps[1]
    else:
        nb = neighbor.control_points
        cps[k] = nb[0]
        cps[k - 1] = 2.0 * nb[0] - nb[1]
        if order == 2:
            cps[k - 2] = nb[2] - 2.0 * nb[1] + 2.0 * cps[k - 1]
    return BezierSegment(cps)


def close_curve(doc: CurveDocument) -> CurveDocument:
    """Close an open curve: bring the trailing segment back to the first
    point, then re-optimize a bridging window around the seam."""
    if doc.topology != "open":
        raise DomainError("document is already closed")
    if len(doc.points) < 3 or not doc.records:
        raise DomainError("need at least three interpolated points to close")
    mode = doc.mode
    order = mode.order

    # Step 1: treat the first point as one more inserted point (C0 seam).
    tmp = insert_point(doc, doc.points[0])
    tmp = replace(tmp, points=tmp.points[:-1])
    records = tmp.records
    n_rec = len(records)  # == n + 1

    # Step 2: carve the seam window out of the two seam segments.
    ring_a = records[-1]
    z_a = (ring_a.t + 1.0) / 2.0
    seg_a, _ = geometry.subdivide(ring_a.segment, z_a)
    t_hat_a = ring_a.t / z_a
    ring_c = records[0]
    z_c = ring_c.t / 2.0
    _, seg_c = geometry.subdivide(ring_c.segment, z_c)
    t_hat_c = ring_c.t / (2.0 - 2.0 * z_c)

    cyclic = n_rec == 2  # the window is the whole (3-segment) cycle
    if not cyclic and not mode.is_geometric:
        seg_a = _enforce_boundary_parametric(seg_a, records[-2].segment, order, "head")
        seg_c = _enforce_boundary_parametric(seg_c, records[1].segment, order, "tail")

    p_0 = doc.points[0]
    c00 = seg_a.control_points[-1]
    c0k = seg_c.control_points[0]
    t_hat_b = _chord_t(c00, p_0, c0k)
    p_prev = doc.points[-1]
    p_next = doc.points[1]
    if order == 2:
        seg_a, seg_b, seg_c = _closed_bridge_second_order(
            seg_a, seg_c, p_prev, p_0, p_next, t_hat_a, t_hat_b, t_hat_c
        )
    else:
        seg_b = _closed_bridge_first_order(seg_a, seg_c, p_0, t_hat_b)

    segs = [seg_a, seg_b, seg_c]
    t_hats = [t_hat_a, t_hat_b, t_hat_c]
    parabolas = [fit_parabola(s, t) for s, t in zip(segs, t_hats)]
    targets = [p_prev, p_0, p_next]
    scale = _window_scale(segs, targets)

    window_segments = []
    for wi, (seg, t_hat, par, target) in enumerate(zip(segs, t_hats, parabolas, targets)):
        k = seg.degree
        mask = np.ones(k + 1, dtype=bool)
        if wi > 0:
            mask[: order + 1] = False
        if not cyclic:
            if wi == 0:
                mask[: order + 1] = False
            if wi == len(segs) - 1:
                mask[k - order :] = False
        window_segments.append(
            WindowSegment(seg.control_points, mask, par.coefficients,
                          _interp_spec(target, t_hat, par, scale))
        )
    joint_inits = []
    if mode.is_geometric:
        joint_inits = [_joint_init(segs[0], segs[1]), _joint_init(segs[1], segs[2])]
        if cyclic:
            joint_inits.append(_joint_init(segs[2], segs[0]))

    def make_problem(window):
        return SegmentProblem(
            segments=tuple(window),
            mode=mode,
            weights=doc.weights,
            rule=doc.rule,
            joint_params_init=tuple(joint_inits),
            cyclic=cyclic,
        )

    outcome = solve_two_stage(make_problem(window_segments), doc.settings)
    if outcome.degraded or outcome.objective > RETRY_OBJECTIVE * len(segs):
        try:
            alt = _alt_segment_through(c00, p_0, c0k, t_hat_b, mode.degree)
            mid = window_segments[1]
            try:
                alt_par = fit_parabola(alt, t_hat_b)
            except PkcError:
                alt_par = parabolas[1]
            window_segments[1] = WindowSegment(
                alt.control_points,
                mid.free_mask,
                alt_par.coefficients,
                _interp_spec(p_0, t_hat_b, alt_par, scale),
            )
            alt_outcome = solve_two_stage(make_problem(window_segments), doc.settings)
            outcome = _better_outcome(outcome, alt_outcome)
        except PkcError:
            pass
    doc2 = replace(tmp, topology="closed")
    list_indices = [n_rec - 1, n_rec, 0]
    point_indices = [len(doc.points) - 1, 0, 1]
    out = _apply_outcome(doc2, outcome, list_indices, point_indices, new_topology="closed")
    if mode.is_geometric and not cyclic:
        # subdividing the seam segments rescaled the tangent magnitudes at
        # the two window-boundary joints; refresh their stored parameters
        jp = list(out.joint_params)
        n_total = len(out.records)
        for ji in (n_rec - 2, 0):
            left = out.records[ji].segment
            right = out.records[(ji + 1) % n_total].segment
            params = continuity.recover_joint_params(left, right)
            jp[ji] = (params.alpha, params.eta)
        out = replace(out, joint_params=tuple(jp))
    return out


# --- editing --------------------------------------------------------------


def _record_index_for_point(doc: CurveDocument, point_index: int) -> int:
    for li, rec in enumerate(doc.records):
        if rec.point_index == point_index:
            return li
    raise DomainError(f"no segment interpolates point {point_index}")


def _move_window(doc: CurveDocument, index: int):
    """(list_indices, cyclic) of the re-optimization window for moving a point."""
    n_rec = len(doc.records)
    if doc.topology == "closed":
        li = _record_index_for_point(doc, index)
        if n_rec == 3:
            return [(li - 1) % 3, li, (li + 1) % 3], True
        return [(li - 1) % n_rec, li, (li + 1) % n_rec], False
    n_pts = len(doc.points)
    if index <= 1:
        return list(range(min(2, n_rec))), False
    if index >= n_pts - 2:
        return list(range(max(n_rec - 2, 0), n_rec)), False
    li = _record_index_for_point(doc, index)
    return [li - 1, li, li + 1], False


def _window_problem_from_state(doc: CurveDocument, list_indices, cyclic, fallback: bool = False):
    """Build a window problem from the document's current segments (or a
    straight-polyline fallback when the current state cannot be restored)."""
    mode = doc.mode
    order = mode.order
    n_rec = len(doc.records)
    recs = [doc.records[li] for li in list_indices]
    first_li, last_li = list_indices[0], list_indices[-1]
    if doc.topology == "closed":
        has_left = not cyclic
        has_right = not cyclic
    else:
        has_left = first_li > 0
        has_right = last_li < n_rec - 1

    segs = [r.segment for r in recs]
    t_hats = [r.t for r in recs]
    targets = [doc.points[r.point_index] for r in recs]

    # open-curve end points live in the end control points; pin them to the
    # (possibly just-moved) document points
    if doc.topology == "open":
        if not has_left:
            cps = segs[0].control_points.copy()
            cps[0] = doc.points[0]
            segs[0] = BezierSegment(cps)
        if not has_right:
            cps = segs[-1].control_points.copy()
            cps[-1] = doc.points[-1]
            segs[-1] = BezierSegment(cps)

    if fallback:
        segs, t_hats = _fallback_segments(doc, recs, targets, has_left, has_right)

    parabolas = []
    for s, t in zip(segs, t_hats):
        try:
            parabolas.append(fit_parabola(s, t))
        except PkcError:
            if not fallback:
                raise
            parabolas.append(ParabolaModel(0.0, 0.0, 0.0))
    scale = _window_scale(segs, targets)

    window_segments = []
    for wi, (seg, t_hat, par, target) in enumerate(zip(segs, t_hats, parabolas, targets)):
        k = seg.degree
        mask = np.ones(k + 1, dtype=bool)
        if wi > 0:
            mask[: order + 1] = False
        elif has_left:
            mask[: order + 1] = False
        elif doc.topology == "open":
            mask[0] = False  # end condition at the (possibly moved) first point
        if wi == len(segs) - 1:
            if has_right:
                mask[k - order :] = False
            elif doc.topology == "open":
                mask[k] = False  # end condition at the last point
        window_segments.append(
            WindowSegment(seg.control_points, mask, par.coefficients,
                          _interp_spec(target, t_hat, par, scale))
        )
    joint_inits = []
    if mode.is_geometric:
        for wi in range(1, len(segs)):
            joint_inits.append(_joint_init(segs[wi - 1], segs[wi]))
        if cyclic:
            joint_inits.append(_joint_init(segs[-1], segs[0]))
    return SegmentProblem(
        segments=tuple(window_segments),
        mode=mode,
        weights=doc.weights,
        rule=doc.rule,
        joint_params_init=tuple(joint_inits),
        cyclic=cyclic,
    )


def _fallback_segments(doc, recs, targets, has_left, has_right):
    """Straight-polyline window initialization used when the edited state is
    too far from feasibility to restore."""
    order = doc.mode.order
    k = doc.mode.degree
    starts = []
    ends = []
    first = recs[0].segment.control_points
    last = recs[-1].segment.control_points
    start = first[0] if has_left or doc.topology == "closed" else doc.points[0]
    end = last[-1] if has_right or doc.topology == "closed" else doc.points[-1]
    joints = [0.5 * (targets[i] + targets[i + 1]) for i in range(len(targets) - 1)]
    knots = [start] + joints + [end]
    segs = []
    t_hats = []
    for i, target in enumerate(targets):
        a, b = knots[i], knots[i + 1]
        try:
            t_hat = _chord_t(a, target, b)
        except DegenerateInputError:
            t_hat = 0.5
        try:
            seg = geometry.elevate_to(_quadratic_through(a, target, b, t_hat), k)
        except (DegenerateInputError, DomainError):
            line = BezierSegment(np.vstack([a, 0.5 * (a + np.asarray(b)), b]))
            seg = geometry.elevate_to(line, k)
        segs.append(seg)
        t_hats.append(t_hat)
    # pin boundary control points back onto the frozen neighbors
    if has_left:
        segs[0] = BezierSegment(np.vstack([recs[0].segment.control_points[: order + 1],
                                           segs[0].control_points[order + 1 :]]))
    if has_right:
        segs[-1] = BezierSegment(np.vstack([segs[-1].control_points[: k - order],
                                            recs[-1].segment.control_points[k - order :]]))
    return segs, t_hats


def move_point(doc: CurveDocument, index: int, new_position) -> CurveDocument:
    """Relocate one interpolation point and re-optimize its window (at most
    three segments; two at an open curve's ends)."""
    new_position = geometry.as_point(new_position)
    if not (0 <= index < len(doc.points)):
        raise DomainError(f"point index {index} out of range")
    points = list(doc.points)
    points[index] = new_position
    doc2 = replace(doc, points=tuple(points))
    if not doc.records:
        return doc2
    if len(doc.records) == 1:
        return bootstrap_three_points(points[0], points[1], points[2], doc.mode, doc2)

    list_indices, cyclic = _move_window(doc2, index)
    point_indices = [doc2.records[li].point_index for li in list_indices]
    try:
        problem = _window_problem_from_state(doc2, list_indices, cyclic)
        outcome = solve_two_stage(problem, doc2.settings)
    except PkcError:
        problem = _window_problem_from_state(doc2, list_indices, cyclic, fallback=True)
        outcome = solve_two_stage(problem, doc2.settings)
    return _apply_outcome(doc2, outcome, list_indices, point_indices)


# --- validation -----------------------------------------------------------


def document_residuals(doc: CurveDocument) -> dict:
    """Interpolation and joint residual maxima, normalized by the bbox diagonal."""
    diag = doc.bbox_diagonal() or 1.0
    interp = 0.0
    for rec in doc.records:
        r = continuity.interpolation_residual(rec.segment, rec.t, doc.points[rec.point_index])
        interp = max(interp, r.norm)
    joint = 0.0
    n_rec = len(doc.records)
    for ji in range(doc.n_joints):
        left = doc.records[ji].segment
        right = doc.records[(ji + 1) % n_rec].segment
        params = None
        if doc.mode.is_geometric:
            alpha, eta = doc.joint_params[ji]
            params = continuity.GeometricJointParams(alpha, eta)
        r = continuity.joint_residual(left, right, doc.mode, params)
        joint = max(joint, r.max_abs)
    return {
        "max_interpolation_residual": interp / diag,
        "max_joint_residual": joint / diag,
    }
