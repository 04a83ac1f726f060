"""Regenerate the golden API payloads used by the frontend tests.

Captures real responses from the backend HTTP facade over the bundled city
fixtures, so the frontend renders and tests against exact wire payloads.

Usage (from the repository root, backend installed):
    python frontend/scripts/generate_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from travelkit.server import create_app
from travelkit.tools import CityFixtures

ROOT = Path(__file__).resolve().parent.parent.parent
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

QUERY = "a full day around this landmark, $150 for 1 person"
IMAGE = "img/brooklyn-bridge-street-01.jpg"


def dump(name: str, payload) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")
    print(f"wrote {name}")


def main() -> None:
    fixtures = CityFixtures.load(ROOT / "fixtures" / "nyc")
    client = TestClient(create_app(fixtures))

    created = client.post("/sessions", json={"query": QUERY, "image": IMAGE}).json()
    session_id = created["session_id"]
    trace = client.get(f"/sessions/{session_id}/trace").json()
    dump("trace_complete.json", trace)

    victim = trace["itinerary"]["visits"][0][0]
    refined = client.post(f"/sessions/{session_id}/refine", json={"exclude": [victim]}).json()
    dump("trace_refined_exclude.json", refined)
    dump("refine_meta.json", {"excluded": victim, "session_id": "fixture-session"})

    # fresh session so later refinements start from the complete state
    session_id = client.post("/sessions", json={"query": QUERY, "image": IMAGE}).json()["session_id"]
    locked = client.post(
        f"/sessions/{session_id}/refine",
        json={"lock": ["nyc-empire-state"], "new_budget": 1000},
    ).json()
    dump("trace_infeasible_lock.json", locked)

    session_id = client.post("/sessions", json={"query": QUERY, "image": IMAGE}).json()["session_id"]
    no_plan = client.post(f"/sessions/{session_id}/refine", json={"shift_window": [300, 300]}).json()
    dump("trace_no_plan.json", no_plan)

    created = client.post(
        "/sessions",
        json={"query": QUERY, "image": IMAGE, "config": {"max_steps": 3}},
    ).json()
    incomplete = client.get(f"/sessions/{created['session_id']}/trace").json()
    dump("trace_incomplete.json", incomplete)


if __name__ == "__main__":
    main()
