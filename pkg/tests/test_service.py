"""Session-service tests: revisions, optimistic concurrency, undo snapshots,
deltas, and error codes."""

import json

import pytest
from fastapi.testclient import TestClient

from pkcurves.service import create_app

ARC = [[0, 0], [1, 0.6], [2, 0.9], [3, 0.7], [4, 0.1]]


@pytest.fixture
def client():
    return TestClient(create_app())


def make_doc(client, continuity="C2"):
    r = client.post("/doc", json={"continuity": continuity})
    assert r.status_code == 200
    return r.json()["id"]


def insert_all(client, doc_id, points=ARC):
    rev = None
    for p in points:
        r = client.post(f"/doc/{doc_id}/point", json={"point": p, "revision": rev})
        assert r.status_code == 200, r.text
        rev = r.json()["revision"]
    return rev


# --- lifecycle ------------------------------------------------------------

def test_create_and_fetch_document(client):
    doc_id = make_doc(client)
    data = client.get(f"/doc/{doc_id}").json()
    assert data["revision"] == 0
    assert data["segments"] == []


def test_unknown_document_404(client):
    assert client.get("/doc/nope").status_code == 404
    assert client.post("/doc/nope/point", json={"point": [0, 0]}).status_code == 404


def test_invalid_continuity_422(client):
    assert client.post("/doc", json={"continuity": "C7"}).status_code == 422


def test_revisions_strictly_increase(client):
    doc_id = make_doc(client)
    revs = []
    rev = None
    for p in ARC:
        r = client.post(f"/doc/{doc_id}/point", json={"point": p, "revision": rev})
        rev = r.json()["revision"]
        revs.append(rev)
    assert revs == sorted(set(revs))


# --- deltas ---------------------------------------------------------------

def test_insert_delta_bounded_window(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    r = client.post(f"/doc/{doc_id}/point", json={"point": [5, -0.2], "revision": rev})
    delta = r.json()
    assert len(delta["changed_segment_indices"]) <= 3


def test_changed_indices_match_byte_diff(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    before = client.get(f"/doc/{doc_id}").json()["segments"]
    r = client.post(f"/doc/{doc_id}/move", json={"index": 2, "point": [2.1, 1.0], "revision": rev})
    delta = r.json()
    after = delta["segments"]
    diff = [
        i for i in range(max(len(before), len(after)))
        if i >= len(before) or i >= len(after)
        or json.dumps(before[i]) != json.dumps(after[i])
    ]
    assert delta["changed_segment_indices"] == diff


def test_move_delta_bounded(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    r = client.post(f"/doc/{doc_id}/move", json={"index": 2, "point": [2.05, 0.95], "revision": rev})
    assert len(r.json()["changed_segment_indices"]) <= 3


# --- optimistic concurrency -----------------------------------------------

def test_stale_revision_409(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    ok = client.post(f"/doc/{doc_id}/move", json={"index": 2, "point": [2.1, 1.0], "revision": rev})
    assert ok.status_code == 200
    stale = client.post(f"/doc/{doc_id}/move", json={"index": 2, "point": [2.2, 1.0], "revision": rev})
    assert stale.status_code == 409


def test_same_revision_twice_one_wins(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    r1 = client.post(f"/doc/{doc_id}/move", json={"index": 1, "point": [1.1, 0.7], "revision": rev})
    r2 = client.post(f"/doc/{doc_id}/move", json={"index": 3, "point": [3.1, 0.6], "revision": rev})
    assert sorted([r1.status_code, r2.status_code]) == [200, 409]


def test_revision_optional(client):
    doc_id = make_doc(client)
    insert_all(client, doc_id)
    r = client.post(f"/doc/{doc_id}/move", json={"index": 2, "point": [2.1, 1.0]})
    assert r.status_code == 200


# --- undo -----------------------------------------------------------------

def test_undo_restores_geometry_bitwise(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    snapshot = client.get(f"/doc/{doc_id}").json()
    r = client.post(f"/doc/{doc_id}/move", json={"index": 2, "point": [2.3, 1.2], "revision": rev})
    rev = r.json()["revision"]
    u = client.post(f"/doc/{doc_id}/undo", json={"revision": rev})
    assert u.status_code == 200
    restored = client.get(f"/doc/{doc_id}").json()
    snapshot.pop("revision")
    restored.pop("revision")
    assert json.dumps(snapshot) == json.dumps(restored)


def test_undo_empty_stack_422(client):
    doc_id = make_doc(client)
    assert client.post(f"/doc/{doc_id}/undo", json={}).status_code == 422


# --- close and comb -------------------------------------------------------

def test_close_endpoint(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id)
    r = client.post(f"/doc/{doc_id}/close", json={"revision": rev})
    assert r.status_code == 200
    assert r.json()["topology"] == "closed"


def test_degenerate_input_422_with_reason(client):
    doc_id = make_doc(client)
    rev = insert_all(client, doc_id, ARC[:3])
    r = client.post(f"/doc/{doc_id}/point", json={"point": ARC[2], "revision": rev})
    assert r.status_code == 422
    assert r.json()["detail"]


def test_comb_endpoint(client):
    doc_id = make_doc(client)
    insert_all(client, doc_id)
    r = client.get(f"/doc/{doc_id}/comb", params={"scale": 0.25})
    assert r.status_code == 200
    data = r.json()
    assert len(data["base_points"]) == len(data["tip_points"]) > 0
    assert data["scale"] == 0.25


# --- snapshots ------------------------------------------------------------

def test_snapshot_dir_written(tmp_path):
    client = TestClient(create_app(snapshot_dir=str(tmp_path)))
    doc_id = make_doc(client)
    insert_all(client, doc_id, ARC[:3])
    files = sorted(tmp_path.glob("*.json"))
    assert len(files) == 3  # one per accepted edit
