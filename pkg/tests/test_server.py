import pytest
from fastapi.testclient import TestClient

from travelkit.server import create_app

QUERY = "one day in New York around the bridge, $150 for 1 person"
IMAGE = "img/brooklyn-bridge-street-01.jpg"


@pytest.fixture()
def client(nyc_fixtures):
    return TestClient(create_app(nyc_fixtures))


def create_session(client, **overrides):
    body = {"query": QUERY, "image": IMAGE}
    body.update(overrides)
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()


def test_health(client):
    resp = client.get("/tools/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"
    assert "x-request-id" in resp.headers


def test_session_end_to_end(client):
    created = create_session(client)
    session_id = created["session_id"]
    assert created["outcome"] == "complete"

    trace = client.get(f"/sessions/{session_id}/trace").json()
    assert trace["outcome"] == "complete"
    assert trace["events"][0][0]["tool"] == "map_locate"
    assert trace["chain"]["spatial"]

    plan = client.get(f"/sessions/{session_id}/plan").json()
    assert plan["itinerary"]["visits"]
    assert plan["verdicts"] == []
    assert plan["itinerary"]["total_cost"]["amount"] <= 15000


def test_malformed_session_body_is_400(client):
    resp = client.post("/sessions", json={"query": 42})
    assert resp.status_code == 400
    body = resp.json()
    assert body["error"] and body["field"] == "query"
    resp = client.post("/sessions", json={})
    assert resp.status_code == 400
    resp = client.post("/sessions", content=b"not json", headers={"content-type": "application/json"})
    assert resp.status_code == 400


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope/trace").status_code == 404
    assert client.get("/sessions/nope/plan").status_code == 404
    assert client.post("/sessions/nope/refine", json={}).status_code == 404


def test_refine_round_trip(client):
    session_id = create_session(client)["session_id"]
    before = client.get(f"/sessions/{session_id}/plan").json()
    victim = before["itinerary"]["visits"][0][0]

    refined = client.post(f"/sessions/{session_id}/refine", json={"exclude": [victim]})
    assert refined.status_code == 200
    body = refined.json()
    assert body["outcome"] == "complete"
    assert victim not in [v[0] for v in body["itinerary"]["visits"]]

    after = client.get(f"/sessions/{session_id}/plan").json()
    assert victim not in [v[0] for v in after["itinerary"]["visits"]]


def test_refine_contradiction_is_400(client):
    session_id = create_session(client)["session_id"]
    resp = client.post(
        f"/sessions/{session_id}/refine",
        json={"lock": ["nyc-katzs-deli"], "exclude": ["nyc-katzs-deli"]},
    )
    assert resp.status_code == 400
    assert "lock and exclude" in resp.json()["error"]


def test_sessions_are_isolated(client):
    a = create_session(client)["session_id"]
    b = create_session(client, query="best wheelchair day in new york for $45", image=None)["session_id"]
    assert a != b

    # interleave requests across the two sessions
    plan_a1 = client.get(f"/sessions/{a}/plan").json()
    plan_b1 = client.get(f"/sessions/{b}/plan").json()
    client.post(f"/sessions/{a}/refine", json={"new_budget": 3000})
    plan_b2 = client.get(f"/sessions/{b}/plan").json()
    plan_a2 = client.get(f"/sessions/{a}/plan").json()

    assert plan_b2 == plan_b1  # refining a never touches b
    assert plan_a2 != plan_a1
    assert plan_a2["itinerary"]["total_cost"]["amount"] <= 3000
    costs_b = plan_b1["itinerary"]["total_cost"]["amount"]
    assert costs_b <= 4500


def test_session_files_persisted(tmp_path, nyc_fixtures):
    client = TestClient(create_app(nyc_fixtures, session_dir=tmp_path))
    session_id = create_session(client)["session_id"]
    saved = tmp_path / f"{session_id}.json"
    assert saved.exists()
    client.post(f"/sessions/{session_id}/refine", json={"new_budget": 8000})
    assert saved.read_text().count('"refinements":[{') == 1
