"""HTTP surface tests with the in-process test client (no sockets)."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from writelens.api import ApiConfig, create_app
from writelens.synthetic import synthetic_csv

TEAMS = 8
SEED = 21


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    config = ApiConfig(data_dir=tmp_path_factory.mktemp("data"))
    app = create_app(config)
    with TestClient(app) as client:
        yield client


@pytest.fixture(scope="module")
def dataset_id(client) -> str:
    response = client.post(
        "/datasets",
        files={"file": ("demo.csv", synthetic_csv(teams=TEAMS, seed=SEED), "text/csv")},
    )
    assert response.status_code == 200, response.text
    body = response.json()
    assert body["teams"] == TEAMS
    return body["id"]


@pytest.fixture()
def session_id(client, dataset_id) -> str:
    response = client.post(
        "/sessions",
        json={"dataset_id": dataset_id, "role": "NNS", "stage": "collaborative"},
    )
    assert response.status_code == 200, response.text
    return response.json()["id"]


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_dataset_listing(client, dataset_id):
    body = client.get("/datasets").json()
    assert any(d["id"] == dataset_id for d in body["datasets"])


def test_upload_is_idempotent(client, dataset_id):
    response = client.post(
        "/datasets",
        files={"file": ("demo.csv", synthetic_csv(teams=TEAMS, seed=SEED), "text/csv")},
    )
    assert response.json()["id"] == dataset_id


def test_upload_rejects_bad_rows(client):
    bad = b"team_id,author_role,turn,event_category,activity_label,start_s,end_s\n1,NS,0,Chatting,x,0,5\n"
    response = client.post("/datasets", files={"file": ("bad.csv", bad, "text/csv")})
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "UnknownCategory"


def test_stats_endpoint(client, dataset_id):
    body = client.get(f"/datasets/{dataset_id}/stats").json()
    assert set(body["activity"]) == {"NS", "NNS"}
    for cells in body["activity"].values():
        assert sum(c["duration_pct"] for c in cells.values()) == pytest.approx(100, abs=0.1)
    assert f"NS-individual" in body["sequences"]


def test_consensus_endpoint_matches_engine(client, dataset_id):
    from writelens.consensus import consensus_partition
    from writelens.ingest import assemble_collections, parse_event_log, Role, StageKind
    from writelens.serialize import consensus_json
    from writelens.synopsis import max_pattern_count

    body = client.get(
        f"/datasets/{dataset_id}/collections/NNS/collaborative/consensus?k=3"
    ).json()
    collections = assemble_collections(
        parse_event_log(synthetic_csv(teams=TEAMS, seed=SEED), "csv")
    )
    collection = collections[(Role.NNS, StageKind.COLLABORATIVE)]
    expected = consensus_json(
        collection, consensus_partition(collection, 3), max_pattern_count(collection)
    )
    assert body == json.loads(json.dumps(expected))


def test_consensus_unknown_dataset(client):
    response = client.get("/datasets/nope/collections/NS/individual/consensus")
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "UnknownDataset"


def test_consensus_bad_k(client, dataset_id):
    response = client.get(
        f"/datasets/{dataset_id}/collections/NS/individual/consensus?k=99"
    )
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "KOutOfRange"


def test_transitions_endpoint(client, dataset_id):
    body = client.get(f"/datasets/{dataset_id}/authors/NNS-1/collaborative/transitions").json()
    assert body["author"] == "NNS-1"
    assert body["display_hint"] == {"hide_arcs_from_source": "Writing"}
    if body["total_transitions"]:
        total = sum(e["frequency"] for e in body["entries"])
        assert total == pytest.approx(1.0, abs=1e-4)


def test_session_lifecycle(client, dataset_id, session_id):
    snapshot = client.get(f"/sessions/{session_id}").json()
    assert snapshot["id"] == session_id
    assert snapshot["k"] >= 2
    assert snapshot["clusters"]

    placed = set(snapshot["singletons"])
    for cluster in snapshot["clusters"]:
        placed.update(cluster["members"])
    assert len(placed) == TEAMS  # one NNS per team


def test_edit_endpoint_set_k(client, session_id):
    before = client.get(f"/sessions/{session_id}").json()
    target_k = 2 if before["k"] != 2 else min(3, before["k_max"])
    body = client.post(
        f"/sessions/{session_id}/edits",
        json={"kind": "SetK", "payload": {"k": target_k}},
    ).json()
    assert body["k"] == target_k
    assert body["edit_count"] == before["edit_count"] + 1


def test_edit_endpoint_move_author(client, session_id):
    snapshot = client.get(f"/sessions/{session_id}").json()
    cluster = snapshot["clusters"][0]
    author = cluster["members"][0]
    body = client.post(
        f"/sessions/{session_id}/edits",
        json={"kind": "MoveAuthor", "payload": {"author": author, "target": "singletons"}},
    ).json()
    assert author in body["singletons"]


def test_edit_unknown_author_404(client, session_id):
    response = client.post(
        f"/sessions/{session_id}/edits",
        json={"kind": "MoveAuthor", "payload": {"author": "NNS-999", "target": "singletons"}},
    )
    assert response.status_code == 404
    assert response.json()["error"]["code"] == "UnknownAuthor"


def test_edit_bad_kind_400(client, session_id):
    response = client.post(
        f"/sessions/{session_id}/edits", json={"kind": "Explode", "payload": {}}
    )
    assert response.status_code == 400
    assert response.json()["error"]["code"] == "BadEdit"


def test_recommendations_endpoint(client, session_id):
    snapshot = client.get(f"/sessions/{session_id}").json()
    author = snapshot["clusters"][0]["members"][0]
    body = client.get(
        f"/sessions/{session_id}/authors/{author}/recommendations?k=5"
    ).json()
    recs = body["recommendations"]
    assert len(recs) <= 5
    scores = [r["score"] for r in recs]
    assert scores == sorted(scores)
    assert all(r["candidate"] not in snapshot["clusters"][0]["members"] for r in recs)


def test_scatter_endpoint(client, session_id):
    snapshot = client.get(f"/sessions/{session_id}").json()
    author = snapshot["clusters"][0]["members"][0]
    body = client.get(f"/sessions/{session_id}/authors/{author}/scatter").json()
    assert len(body["points"]) == TEAMS - 1
    for point in body["points"]:
        assert point["d1"] >= 0
        assert 0 <= point["d2"] <= 1


def test_summary_endpoint_offline(client, session_id):
    snapshot = client.get(f"/sessions/{session_id}").json()
    cluster_id = snapshot["clusters"][0]["id"]
    body = client.post(
        f"/sessions/{session_id}/clusters/{cluster_id}/summary?offline=true"
    ).json()
    assert body["summary"]["source"] == "fallback"
    assert body["summary"]["name"]
    updated = [c for c in body["session"]["clusters"] if c["id"] == cluster_id][0]
    assert updated["name"] == body["summary"]["name"]
    assert updated["summary_source"] == "fallback"


def test_summaries_not_regenerated_by_edits(client, dataset_id):
    created = client.post(
        "/sessions", json={"dataset_id": dataset_id, "role": "NS", "stage": "individual"}
    ).json()
    sid = created["id"]
    cluster_id = created["clusters"][0]["id"]
    with_summary = client.post(
        f"/sessions/{sid}/clusters/{cluster_id}/summary?offline=true"
    ).json()
    name = with_summary["summary"]["name"]
    after_edit = client.post(
        f"/sessions/{sid}/edits", json={"kind": "AddCluster", "payload": {"name": "x"}}
    ).json()
    kept = [c for c in after_edit["clusters"] if c["id"] == cluster_id][0]
    assert kept["name"] == name  # edit did not touch the summary


def test_comparison_endpoint(client, dataset_id):
    body = client.get(
        f"/datasets/{dataset_id}/comparison?left=NS-individual&right=NNS-individual"
    ).json()
    assert len(body["left_order"]) == TEAMS
    assert len(body["right_order"]) == TEAMS
    assert len(body["arrows"]) == TEAMS  # every team present on both sides
    assert body["crossings"] >= 0
    teams = [a["team"] for a in body["arrows"]]
    assert teams == sorted(teams)


def test_comparison_same_author_both_sides(client, dataset_id):
    body = client.get(
        f"/datasets/{dataset_id}/comparison?left=NS-individual&right=NS-collaborative"
    ).json()
    assert {a["left"] for a in body["arrows"]} == {a["right"] for a in body["arrows"]}


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404
