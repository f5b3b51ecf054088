"""HTTP/JSON session service for interactive editing.

Each document lives in memory under an id with a monotonically increasing
revision. Edits to one document are applied one at a time under a lock;
requests may cite the revision they were based on, and a stale revision is
rejected with 409 so clients can refetch and retry.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import builder, fileformat
from .builder import CurveDocument
from .continuity import ContinuityMode
from .energy import EnergyWeights
from .errors import DomainError, PkcError
from .metrics import comb_geometry, energy_report


class CreateDocRequest(BaseModel):
    continuity: str = "C2"
    lambda_e: float = 0.1
    lambda_c: float = 0.1


class PointRequest(BaseModel):
    point: list[float]
    revision: int | None = None


class MoveRequest(BaseModel):
    index: int
    point: list[float]
    revision: int | None = None


class RevisionRequest(BaseModel):
    revision: int | None = None


@dataclass
class _DocState:
    doc: CurveDocument
    revision: int = 0
    undo_stack: list[CurveDocument] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _segment_payload(doc: CurveDocument) -> list[dict]:
    return [fileformat.segment_to_dict(r) for r in doc.records]


def _delta(state: _DocState, before: CurveDocument) -> dict:
    """Response payload: full geometry plus the indices whose serialized
    bytes differ from the previous revision."""
    old = _segment_payload(before)
    new = _segment_payload(state.doc)
    changed = [
        i
        for i in range(max(len(old), len(new)))
        if i >= len(old) or i >= len(new) or fileformat.dumps(old[i]) != fileformat.dumps(new[i])
    ]
    report = energy_report(state.doc)
    return {
        "revision": state.revision,
        "topology": state.doc.topology,
        "points": [list(p) for p in state.doc.points],
        "segments": new,
        "changed_segment_indices": changed,
        "report": {
            "average_Ep": report.average_parabolic,
            "max_Ep": report.max_parabolic,
        },
    }


def create_app(snapshot_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="curve session service")
    docs: dict[str, _DocState] = {}
    ids = itertools.count(1)
    registry_lock = threading.Lock()
    snap_path = Path(snapshot_dir) if snapshot_dir else None
    if snap_path:
        snap_path.mkdir(parents=True, exist_ok=True)

    def get_state(doc_id: str) -> _DocState:
        state = docs.get(doc_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id}")
        return state

    def check_revision(state: _DocState, revision: int | None):
        if revision is not None and revision != state.revision:
            raise HTTPException(
                status_code=409,
                detail=f"stale revision {revision}, current is {state.revision}",
            )

    def commit(state: _DocState, doc_id: str, before: CurveDocument, new_doc: CurveDocument) -> dict:
        state.undo_stack.append(before)
        state.doc = new_doc
        state.revision += 1
        if snap_path:
            fileformat.write_curve_file(new_doc, snap_path / f"{doc_id}_r{state.revision}.json")
        return _delta(state, before)

    def run_edit(doc_id: str, revision: int | None, edit) -> dict:
        state = get_state(doc_id)
        with state.lock:
            check_revision(state, revision)
            before = state.doc
            try:
                new_doc = edit(before)
            except DomainError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            except PkcError as exc:
                raise HTTPException(status_code=422, detail=f"solver failure: {exc}") from exc
            return commit(state, doc_id, before, new_doc)

    @app.post("/doc")
    def create_doc(req: CreateDocRequest):
        try:
            mode = ContinuityMode.from_label(req.continuity)
            weights = EnergyWeights(req.lambda_e, req.lambda_c)
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with registry_lock:
            doc_id = str(next(ids))
            docs[doc_id] = _DocState(doc=builder.new_document(mode, weights))
        return {"id": doc_id, "revision": 0}

    @app.post("/doc/{doc_id}/point")
    def insert(doc_id: str, req: PointRequest):
        return run_edit(doc_id, req.revision, lambda d: builder.insert_point(d, req.point))

    @app.post("/doc/{doc_id}/move")
    def move(doc_id: str, req: MoveRequest):
        return run_edit(doc_id, req.revision, lambda d: builder.move_point(d, req.index, req.point))

    @app.post("/doc/{doc_id}/close")
    def close(doc_id: str, req: RevisionRequest):
        return run_edit(doc_id, req.revision, builder.close_curve)

    @app.post("/doc/{doc_id}/undo")
    def undo(doc_id: str, req: RevisionRequest):
        state = get_state(doc_id)
        with state.lock:
            check_revision(state, req.revision)
            if not state.undo_stack:
                raise HTTPException(status_code=422, detail="nothing to undo")
            before = state.doc
            state.doc = state.undo_stack.pop()
            state.revision += 1
            return _delta(state, before)

    @app.get("/doc/{doc_id}")
    def get_doc(doc_id: str):
        state = get_state(doc_id)
        with state.lock:
            data = fileformat.document_to_dict(state.doc)
            data["revision"] = state.revision
            return data

    @app.get("/doc/{doc_id}/comb")
    def get_comb(doc_id: str, scale: float = 0.1, samples: int = 32):
        state = get_state(doc_id)
        with state.lock:
            doc = state.doc
        try:
            comb = comb_geometry(doc, samples, scale)
        except PkcError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "base_points": comb.base_points.tolist(),
            "tip_points": comb.tip_points.tolist(),
            "scale": comb.scale,
        }

    return app
