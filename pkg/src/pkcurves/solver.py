"""Constrained nonlinear solver for windowed curve optimization.

A :class:`SegmentProblem` describes up to three consecutive Bezier segments
whose free control points, per-segment parabola coefficients, interpolation
parameters, and geometric joint parameters are optimized jointly.  Linear
joint constraints (and the position part of geometric joints) are eliminated
by construction: the leading control points of every non-first segment are
derived from its left neighbor, so continuity holds exactly at every iterate.
The remaining constraints (point interpolation, parabola-vertex coupling) are
solved as explicit equalities with analytic Jacobians.

Geometry is affinely normalized to a unit bounding box before solving, which
makes all tolerances scale-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import energy as energy_mod
from . import geometry
from .continuity import ALPHA_MIN, ContinuityMode
from .energy import EnergyWeights, ParabolaModel, QuadratureRule
from .errors import DomainError, InfeasibleError, NumericalError, ShapeError
from .geometry import BezierSegment

# Box for free control points in unit-bbox normalized coordinates.
CP_BOX_LO = -2.0
CP_BOX_HI = 3.0


@dataclass(frozen=True)
class InterpolationSpec:
    """One point-interpolation constraint P(t) = target.

    When ``fixed_t`` is set the parameter is pinned to ``t_hat`` (used when
    the fitted parabola is too flat for the vertex coupling); otherwise t is a
    bounded unknown in [t_hat/2, (t_hat+1)/2] tied to the parabola vertex.
    """

    target: np.ndarray
    t_hat: float
    fixed_t: bool = False

    def __post_init__(self):
        object.__setattr__(self, "target", geometry.as_point(self.target))
        if not (0.0 <= self.t_hat <= 1.0):
            raise DomainError(f"t_hat {self.t_hat} outside [0, 1]")

    @property
    def t_bounds(self):
        return (self.t_hat / 2.0, (self.t_hat + 1.0) / 2.0)


@dataclass(frozen=True)
class WindowSegment:
    """One segment slot of a window problem."""

    init_control_points: np.ndarray  # (k+1, 2)
    free_mask: np.ndarray  # (k+1,) bool; derived leading points must be False
    parabola_init: np.ndarray  # (3,)
    interpolation: InterpolationSpec | None = None

    def __post_init__(self):
        cps = np.array(self.init_control_points, dtype=float)
        mask = np.array(self.free_mask, dtype=bool)
        if cps.ndim != 2 or cps.shape[1] != 2:
            raise ShapeError("init_control_points must be (k+1, 2)")
        if mask.shape != (cps.shape[0],):
            raise ShapeError("free_mask length mismatch")
        cps.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "init_control_points", cps)
        object.__setattr__(self, "free_mask", mask)
        object.__setattr__(self, "parabola_init", np.array(self.parabola_init, dtype=float))

    @property
    def degree(self) -> int:
        return self.init_control_points.shape[0] - 1


@dataclass(frozen=True)
class SegmentProblem:
    """A window of consecutive segments with joints of one continuity mode."""

    segments: tuple[WindowSegment, ...]
    mode: ContinuityMode
    weights: EnergyWeights = field(default_factory=EnergyWeights)
    rule: QuadratureRule = field(default_factory=QuadratureRule)
    joint_params_init: tuple[tuple[float, float], ...] = ()  # (alpha, eta) per joint
    cyclic: bool = False  # extra joint closing segments[-1] -> segments[0]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        jp = tuple(self.joint_params_init)
        if self.mode.is_geometric:
            if len(jp) != self.n_joints:
                raise ShapeError("need one (alpha, eta) pair per joint in geometric mode")
        object.__setattr__(self, "joint_params_init", jp)
        for s in self.segments[1:]:
            if np.any(s.free_mask[: self.mode.order + 1]):
                raise ShapeError("leading control points of non-first segments are derived")

    @property
    def n_joints(self) -> int:
        """Joints between consecutive segments; the cyclic closing joint is
        the last one when `cyclic` is set."""
        return len(self.segments) - 1 + (1 if self.cyclic else 0)


@dataclass(frozen=True)
class SolverSettings:
    epsilon: float = 1e-12
    max_iterations: int = 1000
    kkt_tolerance: float = 1e-6
    constraint_tolerance: float = 1e-10

    def __post_init__(self):
        if min(self.epsilon, self.max_iterations, self.kkt_tolerance, self.constraint_tolerance) <= 0:
            raise DomainError("solver settings must be positive")


@dataclass(frozen=True)
class StageReport:
    iterations: int
    objective: float
    max_constraint_violation: float
    termination: str  # tolerance | iteration_cap | stalled


@dataclass(frozen=True)
class SolveOutcome:
    unknowns: np.ndarray
    objective: float
    segments: tuple[BezierSegment, ...]
    parabolas: tuple[ParabolaModel, ...]
    t_values: tuple[float, ...]  # per interpolated segment, in segment order
    joint_params: tuple[tuple[float, float], ...]
    stage_reports: tuple[StageReport, ...]
    degraded: bool = False


class _Workspace:
    """Index bookkeeping and value/Jacobian assembly for one problem."""

    def __init__(self, problem: SegmentProblem):
        self.problem = problem
        order = problem.mode.order
        self.order = order
        nx = 0
        self.cp_slots = []  # per segment: dict cp_index -> x slot of its x coord
        for si, seg in enumerate(problem.segments):
            slots = {}
            for j in range(seg.degree + 1):
                if seg.free_mask[j]:
                    slots[j] = nx
                    nx += 2
            self.cp_slots.append(slots)
        self.parabola_slots = []
        for seg in problem.segments:
            self.parabola_slots.append(nx)
            nx += 3
        self.t_slots = []
        for seg in problem.segments:
            if seg.interpolation is not None and not seg.interpolation.fixed_t:
                self.t_slots.append(nx)
                nx += 1
            else:
                self.t_slots.append(None)
        self.joint_slots = []
        for _ in range(problem.n_joints):
            if problem.mode.is_geometric:
                a = nx
                nx += 1
                e = None
                if order == 2:
                    e = nx
                    nx += 1
                self.joint_slots.append((a, e))
            else:
                self.joint_slots.append(None)
        self.nx = nx

    def initial_vector(self) -> np.ndarray:
        p = self.problem
        x = np.zeros(self.nx)
        for si, seg in enumerate(p.segments):
            for j, slot in self.cp_slots[si].items():
                x[slot : slot + 2] = seg.init_control_points[j]
            x[self.parabola_slots[si] : self.parabola_slots[si] + 3] = seg.parabola_init
            if self.t_slots[si] is not None:
                x[self.t_slots[si]] = seg.interpolation.t_hat
        for ji, slot in enumerate(self.joint_slots):
            if slot is not None:
                a, e = slot
                alpha, eta = p.joint_params_init[ji]
                x[a] = max(alpha, ALPHA_MIN)
                if e is not None:
                    x[e] = eta
        return x

    def bounds(self):
        lo = np.full(self.nx, -np.inf)
        hi = np.full(self.nx, np.inf)
        # The window is normalized to the unit box; boxing the control points
        # with generous slack blocks the escape to infinity that makes the
        # pure curvature term arbitrarily small by inflating the curve.
        for slots in self.cp_slots:
            for slot in slots.values():
                lo[slot : slot + 2] = CP_BOX_LO
                hi[slot : slot + 2] = CP_BOX_HI
        for si, seg in enumerate(self.problem.segments):
            if self.t_slots[si] is not None:
                lo[self.t_slots[si]], hi[self.t_slots[si]] = seg.interpolation.t_bounds
        for slot in self.joint_slots:
            if slot is not None:
                lo[slot[0]] = ALPHA_MIN
        return lo, hi

    def build(self, x: np.ndarray, with_jac: bool = True):
        """Assemble full control-point arrays (and Jacobians wrt x)."""
        p = self.problem
        order = self.order
        values = []
        jacs = [] if with_jac else None
        for si, seg in enumerate(p.segments):
            k = seg.degree
            v = seg.init_control_points.copy()
            jac = np.zeros((k + 1, 2, self.nx)) if with_jac else None
            for j, slot in self.cp_slots[si].items():
                v[j] = x[slot : slot + 2]
                if with_jac:
                    jac[j, 0, slot] = 1.0
                    jac[j, 1, slot + 1] = 1.0
            if si > 0:
                lv = values[si - 1]
                lj = jacs[si - 1] if with_jac else None
                lk = p.segments[si - 1].degree
                leg = lv[lk] - lv[lk - 1]
                v[0] = lv[lk]
                if with_jac:
                    jac[0] = lj[lk]
                slot = self.joint_slots[si - 1]
                if slot is None:
                    v[1] = 2.0 * lv[lk] - lv[lk - 1]
                    if with_jac:
                        jac[1] = 2.0 * lj[lk] - lj[lk - 1]
                    if order == 2:
                        v[2] = lv[lk - 2] - 2.0 * lv[lk - 1] + 2.0 * v[1]
                        if with_jac:
                            jac[2] = lj[lk - 2] - 2.0 * lj[lk - 1] + 2.0 * jac[1]
                else:
                    a_slot, e_slot = slot
                    alpha = x[a_slot]
                    v[1] = v[0] + alpha * leg
                    if with_jac:
                        jac[1] = jac[0] + alpha * (lj[lk] - lj[lk - 1])
                        jac[1, 0, a_slot] += leg[0]
                        jac[1, 1, a_slot] += leg[1]
                    if order == 2:
                        eta = x[e_slot]
                        back = lv[lk - 1] - lv[lk - 2]
                        v[2] = v[1] - alpha**2 * back + eta * leg
                        if with_jac:
                            jac[2] = (
                                jac[1]
                                - alpha**2 * (lj[lk - 1] - lj[lk - 2])
                                + eta * (lj[lk] - lj[lk - 1])
                            )
                            jac[2, 0, a_slot] += -2.0 * alpha * back[0]
                            jac[2, 1, a_slot] += -2.0 * alpha * back[1]
                            jac[2, 0, e_slot] += leg[0]
                            jac[2, 1, e_slot] += leg[1]
            values.append(v)
            if with_jac:
                jacs.append(jac)
        return values, jacs

    def parabola(self, x, si):
        s = self.parabola_slots[si]
        return x[s : s + 3]

    # --- objective -------------------------------------------------------

    def objective(self, x, weights: EnergyWeights):
        values, jacs = self.build(x, with_jac=True)
        total = 0.0
        grad = np.zeros(self.nx)
        for si, seg in enumerate(self.problem.segments):
            a = self.parabola(x, si)
            bseg = BezierSegment(values[si])
            val, gc, ga = energy_mod.segment_energy_with_grad(
                bseg, ParabolaModel(*a), weights, self.problem.rule, clamp=True
            )
            total += val
            grad += np.einsum("jc,jcn->n", gc, jacs[si])
            s = self.parabola_slots[si]
            grad[s : s + 3] += ga
        if not np.isfinite(total):
            raise NumericalError(message="non-finite objective")
        return total, grad

    # --- equality constraints -------------------------------------------

    def constraints(self, x, with_jac: bool = True):
        values, jacs = self.build(x, with_jac=with_jac)
        g = []
        jrows = [] if with_jac else None
        for si, seg in enumerate(self.problem.segments):
            spec = seg.interpolation
            if spec is None:
                continue
            k = seg.degree
            t = x[self.t_slots[si]] if self.t_slots[si] is not None else spec.t_hat
            b = geometry.bernstein_matrix(k, np.array([t]))[0]
            pt = b @ values[si]
            g.extend(pt - spec.target)
            if with_jac:
                rowx = np.einsum("j,jn->n", b, jacs[si][:, 0, :])
                rowy = np.einsum("j,jn->n", b, jacs[si][:, 1, :])
                if self.t_slots[si] is not None:
                    d1 = geometry.bernstein_derivative_matrix(k, np.array([t]), 1)[0]
                    dpt = d1 @ values[si]
                    rowx = rowx.copy()
                    rowy = rowy.copy()
                    rowx[self.t_slots[si]] += dpt[0]
                    rowy[self.t_slots[si]] += dpt[1]
                jrows.append(rowx)
                jrows.append(rowy)
            if self.t_slots[si] is not None:
                s = self.parabola_slots[si]
                a1, a2 = x[s + 1], x[s + 2]
                g.append(a1 + 2.0 * a2 * t)
                if with_jac:
                    row = np.zeros(self.nx)
                    row[s + 1] = 1.0
                    row[s + 2] = 2.0 * t
                    row[self.t_slots[si]] = 2.0 * a2
                    jrows.append(row)
        if self.problem.cyclic:
            self._cyclic_joint_rows(x, values, jacs, g, jrows, with_jac)
        gv = np.array(g)
        if with_jac:
            jm = np.array(jrows) if jrows else np.zeros((0, self.nx))
            return gv, jm
        return gv

    def _cyclic_joint_rows(self, x, values, jacs, g, jrows, with_jac):
        """Equality rows for the joint closing segments[-1] -> segments[0]."""
        order = self.order
        lk = self.problem.segments[-1].degree
        lv, rv = values[-1], values[0]
        lj = jacs[-1] if with_jac else None
        rj = jacs[0] if with_jac else None
        slot = self.joint_slots[-1] if self.problem.mode.is_geometric else None

        def emit(val, jac_row):
            for c in range(2):
                g.append(val[c])
                if with_jac:
                    jrows.append(jac_row[c])

        emit(lv[lk] - rv[0], (lj[lk] - rj[0]) if with_jac else None)
        leg = lv[lk] - lv[lk - 1]
        if slot is None:
            emit(leg - (rv[1] - rv[0]), (lj[lk] - lj[lk - 1] - rj[1] + rj[0]) if with_jac else None)
            if order == 2:
                emit(
                    (lv[lk - 2] - 2 * lv[lk - 1]) - (rv[2] - 2 * rv[1]),
                    (lj[lk - 2] - 2 * lj[lk - 1] - rj[2] + 2 * rj[1]) if with_jac else None,
                )
        else:
            a_slot, e_slot = slot
            alpha = x[a_slot]
            row = None
            if with_jac:
                row = alpha * (lj[lk] - lj[lk - 1]) - rj[1] + rj[0]
                row = row.copy()
                row[0, a_slot] += leg[0]
                row[1, a_slot] += leg[1]
            emit(alpha * leg - (rv[1] - rv[0]), row)
            if order == 2:
                eta = x[e_slot]
                back = lv[lk - 1] - lv[lk - 2]
                row = None
                if with_jac:
                    row = (
                        -(alpha**2) * (lj[lk - 1] - lj[lk - 2])
                        + eta * (lj[lk] - lj[lk - 1])
                        - rj[2]
                        + rj[1]
                    ).copy()
                    row[0, a_slot] += -2.0 * alpha * back[0]
                    row[1, a_slot] += -2.0 * alpha * back[1]
                    row[0, e_slot] += leg[0]
                    row[1, e_slot] += leg[1]
                emit(-(alpha**2) * back + eta * leg - (rv[2] - rv[1]), row)


def _normalize_problem(problem: SegmentProblem):
    """Map the window geometry to a unit bounding box; returns the scaled
    problem plus (origin, scale) to undo the mapping."""
    pts = [s.init_control_points for s in problem.segments]
    pts += [s.interpolation.target[None, :] for s in problem.segments if s.interpolation]
    allp = np.vstack(pts)
    origin = allp.min(axis=0)
    scale = float(np.max(allp.max(axis=0) - origin))
    if scale <= 0:
        scale = 1.0
    segs = []
    for s in problem.segments:
        interp = s.interpolation
        if interp is not None:
            interp = replace(interp, target=(interp.target - origin) / scale)
        segs.append(
            WindowSegment(
                (s.init_control_points - origin) / scale,
                s.free_mask,
                s.parabola_init * scale,  # curvature scales by `scale`
                interp,
            )
        )
    return replace(problem, segments=tuple(segs)), origin, scale


def _denormalize_outcome(outcome: SolveOutcome, origin, scale) -> SolveOutcome:
    segs = tuple(BezierSegment(s.control_points * scale + origin) for s in outcome.segments)
    paras = tuple(ParabolaModel(p.a0 / scale, p.a1 / scale, p.a2 / scale) for p in outcome.parabolas)
    return replace(outcome, segments=segs, parabolas=paras)


def _restore_feasibility(ws: _Workspace, x, lo, hi, tol, max_iter=30):
    """Gauss-Newton projection onto the equality constraints, clipped to the
    bounds. Returns (x, max_violation)."""
    x = np.clip(x, lo, hi)
    for _ in range(max_iter):
        g, j = ws.constraints(x, with_jac=True)
        if g.size == 0:
            return x, 0.0
        worst = float(np.max(np.abs(g)))
        if worst <= tol:
            return x, worst
        step, *_ = np.linalg.lstsq(j, -g, rcond=None)
        x = np.clip(x + step, lo, hi)
    g = ws.constraints(x, with_jac=False)
    return x, float(np.max(np.abs(g))) if g.size else 0.0


def _outcome_from_vector(ws: _Workspace, x, weights, reports, degraded=False) -> SolveOutcome:
    values, _ = ws.build(x, with_jac=False)
    segs = tuple(BezierSegment(v) for v in values)
    paras = tuple(ParabolaModel(*ws.parabola(x, si)) for si in range(len(ws.problem.segments)))
    ts = []
    for si, seg in enumerate(ws.problem.segments):
        if seg.interpolation is None:
            continue
        ts.append(float(x[ws.t_slots[si]]) if ws.t_slots[si] is not None else seg.interpolation.t_hat)
    jp = []
    for slot in ws.joint_slots:
        if slot is None:
            jp.append((1.0, 2.0))
        else:
            a, e = slot
            jp.append((float(x[a]), float(x[e]) if e is not None else 0.0))
    obj, _ = ws.objective(x, weights)
    return SolveOutcome(
        unknowns=x.copy(),
        objective=obj,
        segments=segs,
        parabolas=paras,
        t_values=tuple(ts),
        joint_params=tuple(jp),
        stage_reports=tuple(reports),
        degraded=degraded,
    )


def _solve_raw(ws: _Workspace, weights, settings: SolverSettings, start):
    """One SLSQP solve plus feasibility restoration and descent guard."""
    lo, hi = ws.bounds()
    x0 = np.clip(start, lo, hi)
    x0, start_viol = _restore_feasibility(ws, x0, lo, hi, settings.constraint_tolerance)
    if ws.nx == 0:
        return x0, StageReport(0, 0.0, 0.0, "tolerance")
    if start_viol > 1e-3:
        raise InfeasibleError(start_viol, "could not restore feasibility of the start point")
    f0, _ = ws.objective(x0, weights)

    cons = []
    g0 = ws.constraints(x0, with_jac=False)
    if g0.size:
        cons = [
            {
                "type": "eq",
                "fun": lambda x: ws.constraints(x, with_jac=False),
                "jac": lambda x: ws.constraints(x, with_jac=True)[1],
            }
        ]
    res = minimize(
        lambda x: ws.objective(x, weights),
        x0,
        jac=True,
        bounds=list(zip(lo, hi)),
        constraints=cons,
        method="SLSQP",
        options={"maxiter": settings.max_iterations, "ftol": settings.epsilon},
    )
    x = np.clip(res.x, lo, hi)
    x, viol = _restore_feasibility(ws, x, lo, hi, settings.constraint_tolerance)
    f, _ = ws.objective(x, weights)
    # Feasible-descent guard: never return a point worse than the projected start.
    if (viol > settings.constraint_tolerance or f > f0) and start_viol <= settings.constraint_tolerance:
        x, viol, f = x0, start_viol, f0
    if viol > settings.constraint_tolerance:
        raise InfeasibleError(viol)
    if res.status == 0:
        term = "tolerance"
    elif res.status == 9:
        term = "iteration_cap"
    else:
        term = "stalled"
    return x, StageReport(int(res.nit), float(f), float(viol), term)


def solve_stage(problem: SegmentProblem, settings: SolverSettings | None = None, start=None) -> SolveOutcome:
    """Minimize the weighted objective subject to the problem constraints."""
    settings = settings or SolverSettings()
    norm_problem, origin, scale = _normalize_problem(problem)
    ws = _Workspace(norm_problem)
    x0 = ws.initial_vector() if start is None else np.asarray(start, dtype=float)
    x, report = _solve_raw(ws, norm_problem.weights, settings, x0)
    outcome = _outcome_from_vector(ws, x, norm_problem.weights, [report])
    return _denormalize_outcome(outcome, origin, scale)


def solve_two_stage(problem: SegmentProblem, settings: SolverSettings | None = None, start=None) -> SolveOutcome:
    """Stage 1 minimizes the weighted objective; stage 2 restarts from its
    result minimizing the parabolic term alone under the same constraints."""
    settings = settings or SolverSettings()
    norm_problem, origin, scale = _normalize_problem(problem)
    ws = _Workspace(norm_problem)
    x0 = ws.initial_vector() if start is None else np.asarray(start, dtype=float)
    x1, rep1 = _solve_raw(ws, norm_problem.weights, settings, x0)
    try:
        x2, rep2 = _solve_raw(ws, EnergyWeights.zero(), settings, x1)
        outcome = _outcome_from_vector(ws, x2, EnergyWeights.zero(), [rep1, rep2])
    except (InfeasibleError, NumericalError):
        outcome = _outcome_from_vector(ws, x1, norm_problem.weights, [rep1], degraded=True)
    return _denormalize_outcome(outcome, origin, scale)


def kkt_report(problem: SegmentProblem, point) -> dict:
    """Max equality violation, max bound violation, and projected-gradient
    norm at the given unknown vector (normalized units)."""
    norm_problem, _origin, _scale = _normalize_problem(problem)
    ws = _Workspace(norm_problem)
    x = np.asarray(point, dtype=float)
    if x.shape != (ws.nx,):
        raise ShapeError(f"point has dimension {x.shape}, problem needs ({ws.nx},)")
    lo, hi = ws.bounds()
    bound_viol = float(np.max(np.maximum(lo - x, x - hi), initial=0.0))
    g = ws.constraints(x, with_jac=False)
    eq_viol = float(np.max(np.abs(g))) if g.size else 0.0
    _f, grad = ws.objective(x, norm_problem.weights)
    if g.size:
        _gv, jac = ws.constraints(x, with_jac=True)
        lam, *_ = np.linalg.lstsq(jac.T, grad, rcond=None)
        proj = grad - jac.T @ lam
    else:
        proj = grad.copy()
    # remove components blocked by active bounds
    at_lo = x <= lo + 1e-12
    at_hi = x >= hi - 1e-12
    proj[at_lo & (proj > 0)] = 0.0
    proj[at_hi & (proj < 0)] = 0.0
    return {
        "max_equality_violation": eq_viol,
        "max_bound_violation": bound_viol,
        "projected_gradient_norm": float(np.linalg.norm(proj)),
    }
