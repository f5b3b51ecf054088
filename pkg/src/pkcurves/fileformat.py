"""JSON file formats: point-set inputs and curve outputs.

Floats are serialized as shortest round-trip decimals (Python's repr), so
write -> read reproduces every coordinate bitwise and identical documents
produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .builder import CurveDocument, SegmentRecord
from .continuity import ContinuityMode
from .energy import EnergyWeights, ParabolaModel, QuadratureRule
from .errors import DomainError
from .geometry import BezierSegment
from .metrics import energy_report
from .solver import SolverSettings

FILE_VERSION = 1


@dataclass(frozen=True)
class PointSetFile:
    """Input description: points to insert in order plus curve options."""

    points: tuple
    topology: str = "open"
    continuity: str = "C2"
    weights: EnergyWeights = field(default_factory=EnergyWeights)
    settings: SolverSettings = field(default_factory=SolverSettings)
    version: int = FILE_VERSION

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.points)
        if len(pts) < 3:
            raise DomainError("point set needs at least 3 points")
        if any(len(p) != 2 or not all(np.isfinite(p)) for p in pts):
            raise DomainError("points must be finite [x, y] pairs")
        if self.topology not in ("open", "closed"):
            raise DomainError(f"unknown topology {self.topology!r}")
        ContinuityMode.from_label(self.continuity)  # validates
        object.__setattr__(self, "points", pts)

    @property
    def mode(self) -> ContinuityMode:
        return ContinuityMode.from_label(self.continuity)


def point_set_from_dict(data: dict) -> PointSetFile:
    if not isinstance(data, dict):
        raise DomainError("point-set file must be a JSON object")
    if data.get("version") != FILE_VERSION:
        raise DomainError(f"unsupported file version {data.get('version')!r}")
    weights = EnergyWeights()
    if "weights" in data:
        w = data["weights"]
        weights = EnergyWeights(float(w.get("lambda_e", 0.1)), float(w.get("lambda_c", 0.1)))
    settings = SolverSettings()
    if "settings" in data:
        s = data["settings"]
        settings = SolverSettings(
            epsilon=float(s.get("epsilon", settings.epsilon)),
            max_iterations=int(s.get("max_iterations", settings.max_iterations)),
        )
    try:
        return PointSetFile(
            points=tuple(data["points"]),
            topology=data.get("topology", "open"),
            continuity=data.get("continuity", "C2"),
            weights=weights,
            settings=settings,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed point-set file: {exc}") from exc


def point_set_to_dict(ps: PointSetFile) -> dict:
    return {
        "version": ps.version,
        "topology": ps.topology,
        "continuity": ps.continuity,
        "points": [list(p) for p in ps.points],
        "weights": {"lambda_e": ps.weights.lambda_e, "lambda_c": ps.weights.lambda_c},
        "settings": {
            "epsilon": ps.settings.epsilon,
            "max_iterations": ps.settings.max_iterations,
        },
    }


def read_point_set(path) -> PointSetFile:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read point-set file: {exc}") from exc
    return point_set_from_dict(data)


def write_point_set(ps: PointSetFile, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(point_set_to_dict(ps)))


# --- curve files ----------------------------------------------------------


def segment_to_dict(rec: SegmentRecord) -> dict:
    return {
        "degree": rec.segment.degree,
        "control_points": rec.segment.control_points.tolist(),
        "t_interp": rec.t,
        "point_index": rec.point_index,
        "parabola": [rec.parabola.a0, rec.parabola.a1, rec.parabola.a2],
    }


def document_to_dict(doc: CurveDocument) -> dict:
    report = energy_report(doc)
    return {
        "version": FILE_VERSION,
        "continuity": doc.mode.label,
        "topology": doc.topology,
        "points": [list(p) for p in doc.points],
        "segments": [segment_to_dict(r) for r in doc.records],
        "joint_params": [list(jp) for jp in doc.joint_params],
        "weights": {"lambda_e": doc.weights.lambda_e, "lambda_c": doc.weights.lambda_c},
        "energy_report": {
            "per_segment": [
                [s.parabolic, s.edge_length, s.curve_length, s.total]
                for s in report.per_segment
            ],
            "average_Ep": report.average_parabolic,
            "max_Ep": report.max_parabolic,
        },
    }


def document_from_dict(data: dict) -> CurveDocument:
    if not isinstance(data, dict):
        raise DomainError("curve file must be a JSON object")
    if data.get("version") != FILE_VERSION:
        raise DomainError(f"unsupported file version {data.get('version')!r}")
    try:
        mode = ContinuityMode.from_label(data["continuity"])
        weights = EnergyWeights(**data.get("weights", {}))
        records = tuple(
            SegmentRecord(
                segment=BezierSegment(np.array(s["control_points"], dtype=float)),
                point_index=int(s["point_index"]),
                t=float(s["t_interp"]),
                parabola=ParabolaModel(*s["parabola"]),
            )
            for s in data["segments"]
        )
        return CurveDocument(
            mode=mode,
            points=tuple(tuple(p) for p in data["points"]),
            records=records,
            topology=data["topology"],
            joint_params=tuple(tuple(jp) for jp in data.get("joint_params", [])),
            weights=weights,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed curve file: {exc}") from exc


def dumps(data: dict) -> str:
    """Deterministic JSON serialization used for all files and byte diffs."""
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def write_curve_file(doc: CurveDocument, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(document_to_dict(doc)))


def read_curve_file(path) -> CurveDocument:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read curve file: {exc}") from exc
    return document_from_dict(data)
