"""SVG export: segments as dense polylines, interpolation points, joints,
and an optional curvature comb.

Quintic segments exceed SVG's cubic path commands, so each segment is
flattened to a 256-point polyline instead of a lossy degree reduction.
"""

from __future__ import annotations

import numpy as np

from . import geometry
from .builder import CurveDocument
from .metrics import comb_geometry

POLYLINE_POINTS = 256

CURVE_COLOR = "#222222"
POINT_COLOR = "#d62728"  # red interpolation points
JOINT_COLOR = "#e6c719"  # yellow joint markers
COMB_COLOR = "#f279c0"  # pink curvature comb


def _fmt(x: float) -> str:
    return repr(float(x))


def _polyline(points: np.ndarray, color: str, width: float) -> str:
    coords = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return (
        f'<polyline fill="none" stroke="{color}" stroke-width="{_fmt(width)}" '
        f'points="{coords}"/>'
    )


def document_svg(doc: CurveDocument, comb_scale: float | None = None) -> str:
    """Standalone SVG drawing of the document.

    The drawing is emitted in a y-up coordinate system via a flip transform
    so curve orientation matches mathematical convention.
    """
    pts = np.array(doc.points, dtype=float).reshape(-1, 2)
    if len(doc.records):
        all_pts = np.vstack([pts] + [r.segment.control_points for r in doc.records])
    else:
        all_pts = pts if pts.size else np.zeros((1, 2))
    lo = all_pts.min(axis=0)
    hi = all_pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = 0.05 * float(span.max())
    lo = lo - margin
    hi = hi + margin
    width, height = hi - lo
    stroke = 0.004 * float(max(width, height))
    marker = 2.0 * stroke

    body = []
    ts = np.linspace(0.0, 1.0, POLYLINE_POINTS)
    for rec in doc.records:
        body.append(_polyline(geometry.evaluate_many(rec.segment, ts), CURVE_COLOR, stroke))

    if comb_scale is not None and len(doc.records):
        comb = comb_geometry(doc, 32, comb_scale)
        for base, tip in zip(comb.base_points, comb.tip_points):
            body.append(_polyline(np.vstack([base, tip]), COMB_COLOR, 0.5 * stroke))

    n_rec = len(doc.records)
    for ji in range(doc.n_joints):
        j = doc.records[ji].segment.control_points[-1]
        body.append(
            f'<circle cx="{_fmt(j[0])}" cy="{_fmt(j[1])}" r="{_fmt(marker)}" '
            f'fill="{JOINT_COLOR}"/>'
        )
    for p in doc.points:
        body.append(
            f'<circle cx="{_fmt(p[0])}" cy="{_fmt(p[1])}" r="{_fmt(marker)}" '
            f'fill="{POINT_COLOR}"/>'
        )

    flip = f'translate(0,{_fmt(lo[1] + hi[1])}) scale(1,-1)'
    content = "\n".join(f"  {line}" for line in body)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(lo[0])} {_fmt(lo[1])} {_fmt(width)} {_fmt(height)}">\n'
        f'<g transform="{flip}">\n{content}\n</g>\n</svg>\n'
    )


def write_svg(doc: CurveDocument, path, comb_scale: float | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(document_svg(doc, comb_scale))
