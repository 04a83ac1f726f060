"""Shared domain types, validation, and canonical record serialization.

Every value type here is an immutable dataclass. Constructors only coerce
shape (types, tuples); domain rules are checked by the validate_* functions
so that malformed records can be represented, inspected, and reported
instead of blowing up at parse time.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

CATEGORIES = (
    "Attractions",
    "Dining",
    "Living",
    "Transportation",
    "Cultural",
    "Practical",
)

IMAGE_KINDS = ("map", "street")

TIME_GRID_MINUTES = 5
DAY_MINUTES = 1440

# Full-day scheduling defaults when a query leaves them open: 09:00-21:00.
DEFAULT_DAY_WINDOW = (540, 1260)


class RecordError(ValueError):
    """A record could not be decoded into its domain type."""


class CurrencyMismatchError(ValueError):
    """Arithmetic attempted between two different currencies."""


@dataclass(frozen=True, order=True)
class GeoPoint:
    """WGS84 coordinate with fixed 6-decimal precision.

    Coordinates are rounded at construction so equality is exact on the
    stored decimal values.
    """

    lat: float
    lon: float

    def __post_init__(self):
        object.__setattr__(self, "lat", round(float(self.lat), 6))
        object.__setattr__(self, "lon", round(float(self.lon), 6))

    def violations(self) -> list[str]:
        out = []
        if not -90.0 <= self.lat <= 90.0:
            out.append(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            out.append(f"longitude {self.lon} outside [-180, 180]")
        return out


@dataclass(frozen=True, order=True)
class TimeWindow:
    """Half-inclusive slot [start, end] in minutes since midnight."""

    start: int
    end: int

    def __post_init__(self):
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "end", int(self.end))

    @property
    def length(self) -> int:
        return self.end - self.start

    def violations(self) -> list[str]:
        out = []
        if not 0 <= self.start <= DAY_MINUTES:
            out.append(f"window start {self.start} outside [0, {DAY_MINUTES}]")
        if not 0 <= self.end <= DAY_MINUTES:
            out.append(f"window end {self.end} outside [0, {DAY_MINUTES}]")
        if self.start > self.end:
            out.append(f"window inverted: start {self.start} > end {self.end}")
        if self.start % TIME_GRID_MINUTES or self.end % TIME_GRID_MINUTES:
            out.append(f"window [{self.start}, {self.end}] off the {TIME_GRID_MINUTES}-minute grid")
        return out

    def contains(self, other: "TimeWindow") -> bool:
        return self.start <= other.start and other.end <= self.end


def window_overlap(a: TimeWindow, b: TimeWindow) -> TimeWindow | None:
    """Intersection of two valid windows, or None when disjoint.

    A zero-length touch (a.end == b.start) counts as an overlap of length 0.
    """
    lo = max(a.start, b.start)
    hi = min(a.end, b.end)
    if lo > hi:
        return None
    return TimeWindow(lo, hi)


@dataclass(frozen=True)
class Money:
    """Amount in integer minor units (cents) of one ISO-4217 currency."""

    amount: int
    currency: str = "USD"

    def __post_init__(self):
        object.__setattr__(self, "amount", int(self.amount))
        object.__setattr__(self, "currency", str(self.currency))

    def violations(self) -> list[str]:
        out = []
        if self.amount < 0:
            out.append(f"negative amount {self.amount}")
        if len(self.currency) != 3 or not self.currency.isalpha() or not self.currency.isupper():
            out.append(f"currency {self.currency!r} is not an ISO-4217 code")
        return out

    def _check(self, other: "Money") -> None:
        if self.currency != other.currency:
            raise CurrencyMismatchError(f"{self.currency} vs {other.currency}")

    def __add__(self, other: "Money") -> "Money":
        self._check(other)
        return Money(self.amount + other.amount, self.currency)

    def __sub__(self, other: "Money") -> "Money":
        self._check(other)
        return Money(self.amount - other.amount, self.currency)

    def scaled(self, k: int) -> "Money":
        return Money(self.amount * k, self.currency)

    def __le__(self, other: "Money") -> bool:
        self._check(other)
        return self.amount <= other.amount


@dataclass(frozen=True)
class ImageRef:
    """Opaque image descriptor; pixels never enter this system."""

    uri: str
    kind: str  # "map" | "street"


@dataclass(frozen=True)
class Poi:
    """Point of interest: the atomic unit of the dataset and of split disjointness."""

    id: str
    name: str
    category: str
    city: str
    location: GeoPoint
    hours: tuple[tuple[int, TimeWindow], ...] = ()  # (day-of-week 0=Mon, window)
    price: Money = Money(0)
    visit_duration: int = 60  # minutes
    utility: float = 1.0
    accessibility: frozenset[str] = frozenset()
    images: tuple[ImageRef, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "hours", tuple((int(d), w) for d, w in self.hours))
        object.__setattr__(self, "visit_duration", int(self.visit_duration))
        object.__setattr__(self, "utility", float(self.utility))
        object.__setattr__(self, "accessibility", frozenset(self.accessibility))
        object.__setattr__(self, "images", tuple(self.images))

    def hours_on(self, day: int) -> tuple[TimeWindow, ...]:
        """Open windows on one day-of-week, sorted by start."""
        return tuple(sorted(w for d, w in self.hours if d == day))


def validate_poi(poi: Poi) -> list[str]:
    """Every violated invariant of the POI, empty list when well-formed."""
    out: list[str] = []
    if not poi.id:
        out.append("empty id")
    if not poi.name:
        out.append("empty name")
    if poi.category not in CATEGORIES:
        out.append(f"category {poi.category!r} not in the six-category vocabulary")
    if not poi.city:
        out.append("empty city")
    out.extend(poi.location.violations())
    for day, window in poi.hours:
        if not 0 <= day <= 6:
            out.append(f"day-of-week {day} outside 0..6")
        out.extend(window.violations())
    out.extend(poi.price.violations())
    if poi.visit_duration <= 0:
        out.append(f"visit_duration {poi.visit_duration} not positive")
    elif poi.visit_duration % TIME_GRID_MINUTES:
        out.append(f"visit_duration {poi.visit_duration} off the {TIME_GRID_MINUTES}-minute grid")
    if not poi.utility >= 0:
        out.append(f"utility {poi.utility} negative")
    for img in poi.images:
        if img.kind not in IMAGE_KINDS:
            out.append(f"image kind {img.kind!r} not in {IMAGE_KINDS}")
        if not img.uri:
            out.append("image with empty uri")
    return out


MODALITIES = ("text", "vision-language")
VL_TYPES = ("identification", "experience", "practical")
SPLITS = ("train", "test")


@dataclass(frozen=True)
class QaPair:
    id: str
    question: str
    answer: str
    modality: str = "text"
    poi_id: str | None = None
    vl_type: str | None = None
    source_fact_id: str | None = None
    split: str | None = None
    image_uri: str | None = None  # source image for vision-language pairs

    def violations(self) -> list[str]:
        out = []
        if not self.id:
            out.append("empty id")
        if not self.question.strip():
            out.append("empty question")
        if not self.answer.strip():
            out.append("empty answer")
        if self.modality not in MODALITIES:
            out.append(f"modality {self.modality!r} unknown")
        if (self.modality == "vision-language") != (self.vl_type is not None):
            out.append("vl_type must be present iff modality is vision-language")
        if self.vl_type is not None and self.vl_type not in VL_TYPES:
            out.append(f"vl_type {self.vl_type!r} unknown")
        if self.split is not None and self.split not in SPLITS:
            out.append(f"split {self.split!r} unknown")
        return out


@dataclass(frozen=True)
class ReasoningStep:
    """One reasoning step: free text, entity references, optional numeric data.

    `data` holds only ints, floats, or flat lists of them, keyed by what the
    number means (e.g. "km", "window", "items", "total").
    """

    text: str
    refs: tuple[str, ...] = ()
    data: dict[str, Any] | None = None

    def __post_init__(self):
        object.__setattr__(self, "refs", tuple(self.refs))

    def __eq__(self, other):
        if not isinstance(other, ReasoningStep):
            return NotImplemented
        return (self.text, self.refs, self.data) == (other.text, other.refs, other.data)

    def __hash__(self):
        return hash((self.text, self.refs, _freeze(self.data)))


def _freeze(value):
    if isinstance(value, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in value.items()))
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


@dataclass(frozen=True)
class CoTChain:
    """Structured reasoning chain with spatial, temporal, and practical parts."""

    spatial: tuple[ReasoningStep, ...]
    temporal: tuple[ReasoningStep, ...]
    practical: tuple[ReasoningStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "spatial", tuple(self.spatial))
        object.__setattr__(self, "temporal", tuple(self.temporal))
        object.__setattr__(self, "practical", tuple(self.practical))

    def components(self) -> dict[str, tuple[ReasoningStep, ...]]:
        return {"spatial": self.spatial, "temporal": self.temporal, "practical": self.practical}


@dataclass(frozen=True)
class ConstraintSet:
    """Planning constraints shared by the reasoner and the itinerary solver."""

    day: int = 0  # day-of-week, 0=Mon
    day_window: TimeWindow = TimeWindow(*DEFAULT_DAY_WINDOW)
    budget: Money | None = None
    group_size: int = 1
    required_access: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "required_access", frozenset(self.required_access))


# ---------------------------------------------------------------------------
# Canonical record encoding: one JSON object per line, fixed field order.
# ---------------------------------------------------------------------------


def geopoint_to_record(p: GeoPoint) -> dict:
    return {"lat": p.lat, "lon": p.lon}


def geopoint_from_record(r: dict) -> GeoPoint:
    return GeoPoint(r["lat"], r["lon"])


def window_to_record(w: TimeWindow) -> list:
    return [w.start, w.end]


def money_to_record(m: Money) -> dict:
    return {"amount": m.amount, "currency": m.currency}


def money_from_record(r: dict) -> Money:
    return Money(r["amount"], r["currency"])


def poi_to_record(p: Poi) -> dict:
    return {
        "id": p.id,
        "name": p.name,
        "category": p.category,
        "city": p.city,
        "location": geopoint_to_record(p.location),
        "hours": [[d, w.start, w.end] for d, w in p.hours],
        "price": money_to_record(p.price),
        "visit_duration": p.visit_duration,
        "utility": p.utility,
        "accessibility": sorted(p.accessibility),
        "images": [{"uri": i.uri, "kind": i.kind} for i in p.images],
    }


def poi_from_record(r: dict) -> Poi:
    try:
        return Poi(
            id=r["id"],
            name=r["name"],
            category=r["category"],
            city=r["city"],
            location=geopoint_from_record(r["location"]),
            hours=tuple((h[0], TimeWindow(h[1], h[2])) for h in r.get("hours", [])),
            price=money_from_record(r.get("price", {"amount": 0, "currency": "USD"})),
            visit_duration=r.get("visit_duration", 60),
            utility=r.get("utility", 1.0),
            accessibility=frozenset(r.get("accessibility", [])),
            images=tuple(ImageRef(i["uri"], i["kind"]) for i in r.get("images", [])),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise RecordError(f"malformed POI record: {exc}") from exc


def qa_to_record(q: QaPair) -> dict:
    return {
        "id": q.id,
        "poi_id": q.poi_id,
        "modality": q.modality,
        "vl_type": q.vl_type,
        "question": q.question,
        "answer": q.answer,
        "source_fact_id": q.source_fact_id,
        "split": q.split,
        "image_uri": q.image_uri,
    }


def qa_from_record(r: dict) -> QaPair:
    try:
        return QaPair(
            id=r["id"],
            question=r["question"],
            answer=r["answer"],
            modality=r.get("modality", "text"),
            poi_id=r.get("poi_id"),
            vl_type=r.get("vl_type"),
            source_fact_id=r.get("source_fact_id"),
            split=r.get("split"),
            image_uri=r.get("image_uri"),
        )
    except (KeyError, TypeError) as exc:
        raise RecordError(f"malformed QA record: {exc}") from exc


def step_to_record(s: ReasoningStep) -> dict:
    return {"text": s.text, "refs": list(s.refs), "data": s.data}


def step_from_record(r: dict) -> ReasoningStep:
    return ReasoningStep(text=r["text"], refs=tuple(r.get("refs", [])), data=r.get("data"))


def chain_to_record(c: CoTChain) -> dict:
    return {
        "spatial": [step_to_record(s) for s in c.spatial],
        "temporal": [step_to_record(s) for s in c.temporal],
        "practical": [step_to_record(s) for s in c.practical],
    }


def chain_from_record(r: dict) -> CoTChain:
    try:
        return CoTChain(
            spatial=tuple(step_from_record(s) for s in r["spatial"]),
            temporal=tuple(step_from_record(s) for s in r["temporal"]),
            practical=tuple(step_from_record(s) for s in r["practical"]),
        )
    except (KeyError, TypeError) as exc:
        raise RecordError(f"malformed chain record: {exc}") from exc


def encode_line(record: dict | list) -> str:
    """Canonical single-line JSON: no spaces, preserved key order, raw unicode."""
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def decode_line(line: str) -> Any:
    try:
        return json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordError(f"invalid JSON: {exc}") from exc


def read_jsonl(path: str | Path) -> Iterator[Any]:
    """Yield decoded records; RecordError carries the 1-based line number."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield decode_line(line)
            except RecordError as exc:
                raise RecordError(f"{path}:{lineno}: {exc}") from exc


def write_jsonl(path: str | Path, records: Iterable[dict | list]) -> None:
    """Write records atomically (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(encode_line(record))
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
