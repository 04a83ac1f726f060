"""Simulated external services behind a uniform tool-call envelope.

Five tools (hours, price, reviews, transit, map_locate) are served from an
immutable per-city fixture directory, so every call is a pure function of
(call, fixtures). Optional failure injection exists for resilience tests and
is off by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .dataset import PoiStore, ingest_pois, stable_hash
from .mcq import normalize_text
from .model import read_jsonl
from .solver.planner import default_travel_time

TOOLS = ("hours", "price", "reviews", "transit", "map_locate")

STATUS_OK = "ok"
STATUS_NOT_FOUND = "not_found"
STATUS_BAD_REQUEST = "bad_request"
STATUS_UNAVAILABLE = "unavailable"


@dataclass(frozen=True)
class ToolCall:
    tool: str
    args: dict
    request_id: str

    def to_record(self) -> dict:
        return {"tool": self.tool, "args": dict(sorted(self.args.items())), "request_id": self.request_id}

    @classmethod
    def from_record(cls, r: dict) -> "ToolCall":
        return cls(tool=r["tool"], args=dict(r["args"]), request_id=r["request_id"])


@dataclass(frozen=True)
class ToolResponse:
    request_id: str
    status: str
    payload: dict | list | None = None

    def __post_init__(self):
        if (self.status == STATUS_OK) != (self.payload is not None):
            raise ValueError("payload present iff status is ok")

    def to_record(self) -> dict:
        return {"request_id": self.request_id, "status": self.status, "payload": self.payload}

    @classmethod
    def from_record(cls, r: dict) -> "ToolResponse":
        return cls(request_id=r["request_id"], status=r["status"], payload=r.get("payload"))


@dataclass(frozen=True)
class FaultConfig:
    """Resilience-test knobs; all disabled by default for determinism."""

    offline_tools: frozenset[str] = frozenset()
    failure_rate: float = 0.0   # deterministic per request id
    latency_ms: int = 0


@dataclass
class CityFixtures:
    """One city's simulated service data, immutable after load."""

    store: PoiStore
    transit_edges: dict[tuple[str, str], int] = field(default_factory=dict)
    reviews: dict[str, list[dict]] = field(default_factory=dict)
    poi_aliases: dict[str, str] = field(default_factory=dict)    # normalized alias -> poi_id
    city_aliases: dict[str, str] = field(default_factory=dict)   # normalized alias -> city name
    image_index: dict[str, str] = field(default_factory=dict)    # image uri -> poi_id
    faults: FaultConfig = FaultConfig()

    @classmethod
    def load(cls, directory: str | Path, faults: FaultConfig | None = None) -> "CityFixtures":
        directory = Path(directory)
        store = ingest_pois(read_jsonl(directory / "pois.jsonl"))
        edges: dict[tuple[str, str], int] = {}
        edges_path = directory / "transit_edges.jsonl"
        if edges_path.exists():
            for r in read_jsonl(edges_path):
                edges[(r["a"], r["b"])] = int(r["minutes"])
                edges.setdefault((r["b"], r["a"]), int(r["minutes"]))
        reviews: dict[str, list[dict]] = {}
        reviews_path = directory / "reviews.jsonl"
        if reviews_path.exists():
            for r in read_jsonl(reviews_path):
                reviews.setdefault(r["poi_id"], []).append({"rating": r["rating"], "text": r["text"]})
        poi_aliases: dict[str, str] = {}
        city_aliases: dict[str, str] = {}
        image_index: dict[str, str] = {}
        gaz_path = directory / "gazetteer.jsonl"
        if gaz_path.exists():
            for r in read_jsonl(gaz_path):
                kind = r.get("kind")
                if kind == "poi_alias":
                    poi_aliases[normalize_text(r["alias"])] = r["poi_id"]
                elif kind == "city_alias":
                    city_aliases[normalize_text(r["alias"])] = r["city"]
                elif kind == "image":
                    image_index[r["image_uri"]] = r["poi_id"]
        for poi in store.pois:
            poi_aliases.setdefault(normalize_text(poi.name), poi.id)
            city_aliases.setdefault(normalize_text(poi.city), poi.city)
            for img in poi.images:
                image_index.setdefault(img.uri, poi.id)
        return cls(
            store=store,
            transit_edges=edges,
            reviews=reviews,
            poi_aliases=poi_aliases,
            city_aliases=city_aliases,
            image_index=image_index,
            faults=faults or FaultConfig(),
        )

    def locate(self, text: str | None = None, image_uri: str | None = None) -> str | None:
        if image_uri is not None and image_uri in self.image_index:
            return self.image_index[image_uri]
        if text:
            normalized = normalize_text(text)
            if normalized in self.poi_aliases:
                return self.poi_aliases[normalized]
            # longest alias contained in the text wins
            hits = [a for a in self.poi_aliases if f" {a} " in f" {normalized} "]
            if hits:
                return self.poi_aliases[max(hits, key=lambda a: (len(a), a))]
        return None


def call(tc: ToolCall, fixtures: CityFixtures) -> ToolResponse:
    """Serve one tool call from the fixtures; pure and deterministic."""
    faults = fixtures.faults
    if tc.tool in faults.offline_tools:
        return ToolResponse(tc.request_id, STATUS_UNAVAILABLE)
    if faults.failure_rate > 0:
        if stable_hash("fault", tc.request_id) % 1_000_000 < faults.failure_rate * 1_000_000:
            return ToolResponse(tc.request_id, STATUS_UNAVAILABLE)
    if tc.tool not in TOOLS:
        return ToolResponse(tc.request_id, STATUS_BAD_REQUEST)

    if tc.tool in ("hours", "price", "reviews"):
        poi_id = tc.args.get("poi_id")
        if not isinstance(poi_id, str) or not poi_id:
            return ToolResponse(tc.request_id, STATUS_BAD_REQUEST)
        poi = fixtures.store.get(poi_id)
        if poi is None:
            return ToolResponse(tc.request_id, STATUS_NOT_FOUND)
        if tc.tool == "hours":
            payload = {"poi_id": poi_id, "hours": [[d, w.start, w.end] for d, w in poi.hours]}
        elif tc.tool == "price":
            payload = {"poi_id": poi_id, "amount": poi.price.amount, "currency": poi.price.currency}
        else:
            payload = {"poi_id": poi_id, "reviews": fixtures.reviews.get(poi_id, [])}
        return ToolResponse(tc.request_id, STATUS_OK, payload)

    if tc.tool == "transit":
        a, b = tc.args.get("from"), tc.args.get("to")
        if not isinstance(a, str) or not isinstance(b, str) or not a or not b:
            return ToolResponse(tc.request_id, STATUS_BAD_REQUEST)
        pa, pb = fixtures.store.get(a), fixtures.store.get(b)
        if pa is None or pb is None:
            return ToolResponse(tc.request_id, STATUS_NOT_FOUND)
        edge = fixtures.transit_edges.get((a, b))
        if edge is not None:
            return ToolResponse(tc.request_id, STATUS_OK, {"from": a, "to": b, "minutes": edge, "source": "table"})
        return ToolResponse(
            tc.request_id,
            STATUS_OK,
            {"from": a, "to": b, "minutes": default_travel_time(pa, pb), "source": "estimate"},
        )

    # map_locate
    text = tc.args.get("text")
    image_uri = tc.args.get("image_uri")
    if text is None and image_uri is None:
        return ToolResponse(tc.request_id, STATUS_BAD_REQUEST)
    poi_id = fixtures.locate(text=text, image_uri=image_uri)
    if poi_id is None:
        return ToolResponse(tc.request_id, STATUS_NOT_FOUND)
    poi = fixtures.store[poi_id]
    return ToolResponse(
        tc.request_id,
        STATUS_OK,
        {"poi_id": poi_id, "name": poi.name, "city": poi.city},
    )
