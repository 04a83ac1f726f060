"""Dataset construction pipeline: fact expansion, per-image QA generation,
three-layer verification, POI-disjoint splitting, and composition reporting.

The question generator is an adapter boundary. Production systems plug in a
language model; the bundled ReferenceGenerator is rule-based and
deterministic so the whole pipeline is reproducible at desk scale.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Iterable, Protocol

from .mcq import normalize_text
from .model import (
    CATEGORIES,
    ImageRef,
    Poi,
    QaPair,
    RecordError,
    validate_poi,
)

AUGMENT_TOPICS = ("safety", "cost", "accessibility")

QUESTIONS_PER_FACT = 5
QA_TYPES_PER_IMAGE = 3


class IngestError(ValueError):
    """A POI record stream could not be ingested."""


class GeneratorError(RuntimeError):
    """Transient generator failure; carries the unit id for retries."""

    def __init__(self, message: str, unit_id: str = ""):
        super().__init__(message)
        self.unit_id = unit_id


class DuplicateQuestionsError(ValueError):
    """Generator kept producing duplicate question texts after retries."""


class SplitError(ValueError):
    """Split requested over unusable inputs."""


def stable_hash(*parts: str) -> int:
    """64-bit keyed hash, stable across runs and processes."""
    h = hashlib.blake2b(":".join(parts).encode("utf-8"), digest_size=8)
    return int.from_bytes(h.digest(), "big")


@dataclass(frozen=True)
class Fact:
    id: str
    text: str
    poi_id: str | None = None
    source: str = ""

    def violations(self) -> list[str]:
        out = []
        if not self.id:
            out.append("empty id")
        if not self.text.strip():
            out.append("empty text")
        return out


def fact_to_record(f: Fact) -> dict:
    return {"id": f.id, "poi_id": f.poi_id, "text": f.text, "source": f.source}


def fact_from_record(r: dict) -> Fact:
    try:
        return Fact(id=r["id"], text=r["text"], poi_id=r.get("poi_id"), source=r.get("source", ""))
    except (KeyError, TypeError) as exc:
        raise RecordError(f"malformed fact record: {exc}") from exc


class PoiStore:
    """POIs indexed by id, city, and category; iteration order is sorted by id."""

    def __init__(self, pois: Iterable[Poi]):
        self._by_id: dict[str, Poi] = {}
        for p in pois:
            if p.id in self._by_id:
                raise IngestError(f"duplicate POI id {p.id!r}")
            self._by_id[p.id] = p
        self._ids = sorted(self._by_id)
        self.by_city: dict[str, list[Poi]] = {}
        self.by_category: dict[str, list[Poi]] = {}
        for pid in self._ids:
            p = self._by_id[pid]
            self.by_city.setdefault(p.city, []).append(p)
            self.by_category.setdefault(p.category, []).append(p)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, poi_id: str) -> bool:
        return poi_id in self._by_id

    def __getitem__(self, poi_id: str) -> Poi:
        return self._by_id[poi_id]

    def get(self, poi_id: str) -> Poi | None:
        return self._by_id.get(poi_id)

    @property
    def pois(self) -> list[Poi]:
        return [self._by_id[i] for i in self._ids]

    @property
    def cities(self) -> list[str]:
        return sorted(self.by_city)


def ingest_pois(records: Iterable[dict]) -> PoiStore:
    """Build a PoiStore from decoded records, rejecting malformed ones.

    Errors name the 1-based record position and, for duplicates, both records.
    """
    from .model import poi_from_record

    pois: list[Poi] = []
    seen_at: dict[str, int] = {}
    for pos, record in enumerate(records, start=1):
        try:
            poi = poi_from_record(record)
        except RecordError as exc:
            raise IngestError(f"record {pos}: {exc}") from exc
        problems = validate_poi(poi)
        if problems:
            raise IngestError(f"record {pos} ({poi.id!r}): " + "; ".join(problems))
        if poi.id in seen_at:
            raise IngestError(
                f"duplicate POI id {poi.id!r}: records {seen_at[poi.id]} and {pos}"
            )
        seen_at[poi.id] = pos
        pois.append(poi)
    return PoiStore(pois)


class QuestionGenerator(Protocol):
    """Adapter contract for question generation."""

    def text_questions(self, fact: Fact, k: int) -> list[str]: ...

    def vl_qa(self, poi: Poi, image: ImageRef) -> dict[str, tuple[str, str]]: ...

    def augmented_qa(self, poi: Poi, topic: str) -> tuple[str, str]: ...


class ReferenceGenerator:
    """Deterministic rule-based generator used for tests and desk-scale runs."""

    _TEXT_TEMPLATES = (
        "What should a visitor know: {t}",
        "Which fact applies here? {t}",
        "Can you confirm the following detail? {t}",
        "A traveler asks about this; what is the answer? {t}",
        "Summarize the key point: {t}",
        "What does the guide say? {t}",
        "Is this accurate for planning a visit? {t}",
    )

    def text_questions(self, fact: Fact, k: int) -> list[str]:
        if k > len(self._TEXT_TEMPLATES):
            raise GeneratorError(
                f"reference generator caps at {len(self._TEXT_TEMPLATES)} variants, asked for {k}",
                unit_id=fact.id,
            )
        subject = fact.text.rstrip(".")
        return [tpl.format(t=subject) for tpl in self._TEXT_TEMPLATES[:k]]

    def vl_qa(self, poi: Poi, image: ImageRef) -> dict[str, tuple[str, str]]:
        place = "map view" if image.kind == "map" else "street view"
        hours = poi.hours[0][1] if poi.hours else None
        when = (
            f"It opens at {hours.start // 60:02d}:{hours.start % 60:02d}."
            if hours
            else "Hours vary by day."
        )
        price = poi.price.amount
        cost = "Entry is free." if price == 0 else f"Expect about {price / 100:.2f} {poi.price.currency} per person."
        return {
            "identification": (
                f"Which place is shown in this {place}?",
                f"This is {poi.name} in {poi.city}.",
            ),
            "experience": (
                f"What is it like to visit the place in this {place}?",
                f"{poi.name} is a {poi.category.lower()} spot in {poi.city}; most visits take about {poi.visit_duration} minutes.",
            ),
            "practical": (
                f"What practical details matter for the place in this {place}?",
                f"{when} {cost}",
            ),
        }

    def augmented_qa(self, poi: Poi, topic: str) -> tuple[str, str]:
        if topic == "safety":
            return (
                f"Is {poi.name} safe to visit?",
                f"{poi.name} in {poi.city} is routinely visited; use normal city precautions.",
            )
        if topic == "cost":
            amount = poi.price.amount
            answer = (
                f"{poi.name} is free to enter."
                if amount == 0
                else f"A visit to {poi.name} costs {amount / 100:.2f} {poi.price.currency} per person."
            )
            return (f"How much does {poi.name} cost?", answer)
        if topic == "accessibility":
            flags = ", ".join(sorted(poi.accessibility)) if poi.accessibility else "no recorded accommodations"
            return (f"How accessible is {poi.name}?", f"{poi.name} offers: {flags}.")
        raise GeneratorError(f"unknown augmentation topic {topic!r}", unit_id=poi.id)


def expand_fact(
    fact: Fact,
    generator: QuestionGenerator,
    k: int = QUESTIONS_PER_FACT,
    max_attempts: int = 3,
) -> list[QaPair]:
    """Expand one fact into exactly k QA pairs with pairwise-distinct questions."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    last_exc: Exception | None = None
    for _ in range(max_attempts):
        try:
            questions = generator.text_questions(fact, k)
        except GeneratorError as exc:
            last_exc = exc
            continue
        if len(questions) != k:
            last_exc = GeneratorError(
                f"generator returned {len(questions)} questions, wanted {k}", unit_id=fact.id
            )
            continue
        if len({normalize_text(q) for q in questions}) != k:
            last_exc = DuplicateQuestionsError(
                f"fact {fact.id}: duplicate question texts after normalization"
            )
            continue
        return [
            QaPair(
                id=f"{fact.id}-q{i}",
                question=q,
                answer=fact.text,
                modality="text",
                poi_id=fact.poi_id,
                source_fact_id=fact.id,
            )
            for i, q in enumerate(questions, start=1)
        ]
    raise last_exc if last_exc is not None else GeneratorError("generation failed", fact.id)


def generate_vl_qa(poi: Poi, image: ImageRef, generator: QuestionGenerator, max_attempts: int = 3) -> list[QaPair]:
    """Exactly three vision-language QA pairs (identification, experience,
    practical) for one image of the POI."""
    if image not in poi.images:
        raise ValueError(f"image {image.uri!r} does not belong to POI {poi.id!r}")
    idx = poi.images.index(image)
    last_exc: Exception | None = None
    for _ in range(max_attempts):
        try:
            triple = generator.vl_qa(poi, image)
        except GeneratorError as exc:
            last_exc = exc
            continue
        missing = [t for t in ("identification", "experience", "practical") if t not in triple]
        if missing:
            last_exc = GeneratorError(f"generator omitted vl types {missing}", unit_id=poi.id)
            continue
        return [
            QaPair(
                id=f"{poi.id}-img{idx}-{vl_type}",
                question=triple[vl_type][0],
                answer=triple[vl_type][1],
                modality="vision-language",
                vl_type=vl_type,
                poi_id=poi.id,
                image_uri=image.uri,
            )
            for vl_type in ("identification", "experience", "practical")
        ]
    raise last_exc if last_exc is not None else GeneratorError("generation failed", poi.id)


def build_augmented(store: PoiStore, count: int, generator: QuestionGenerator, topics=AUGMENT_TOPICS) -> list[QaPair]:
    """Practical-constraint QA pairs cycling (poi, topic) deterministically."""
    out: list[QaPair] = []
    pois = store.pois
    if count > 0 and not pois:
        raise SplitError("cannot build augmented QAs over an empty store")
    i = 0
    while len(out) < count:
        poi = pois[i % len(pois)]
        topic = topics[(i // len(pois)) % len(topics)]
        q, a = generator.augmented_qa(poi, topic)
        out.append(
            QaPair(
                id=f"aug-{topic}-{poi.id}-{i}",
                question=q,
                answer=a,
                modality="text",
                poi_id=poi.id,
            )
        )
        i += 1
    return out


# --- verification -----------------------------------------------------------


@dataclass(frozen=True)
class VerificationVerdict:
    rule_pass: bool
    semantic_pass: bool
    manual_queue: bool
    reasons: tuple[str, ...] = ()

    def __post_init__(self):
        if self.manual_queue and not (self.rule_pass and self.semantic_pass):
            raise ValueError("manual review queues only QAs that passed the first two layers")


_HOURS_RE = re.compile(r"\b(?:opens?|opening) at (\d{1,2}):(\d{2})\b", re.IGNORECASE)
_CLOSES_RE = re.compile(r"\bcloses? at (\d{1,2}):(\d{2})\b", re.IGNORECASE)
_PRICE_RE = re.compile(r"\b(?:costs?|price of|priced at)\s*\$?\s*(\d+(?:\.\d{1,2})?)", re.IGNORECASE)


def keyed_field_checker(qa: QaPair, poi: Poi, store: PoiStore) -> list[str]:
    """Reference semantic checker: hours/price/city stated in the answer must
    match the POI record."""
    out = []
    starts = {w.start for _, w in poi.hours}
    ends = {w.end for _, w in poi.hours}
    for m in _HOURS_RE.finditer(qa.answer):
        minutes = int(m.group(1)) * 60 + int(m.group(2))
        if minutes not in starts:
            out.append(f"answer says opens at {m.group(1)}:{m.group(2)}, record has no such opening")
    for m in _CLOSES_RE.finditer(qa.answer):
        minutes = int(m.group(1)) * 60 + int(m.group(2))
        if minutes not in ends:
            out.append(f"answer says closes at {m.group(1)}:{m.group(2)}, record has no such closing")
    for m in _PRICE_RE.finditer(qa.answer):
        minor = round(float(m.group(1)) * 100)
        if minor != poi.price.amount:
            out.append(f"answer states price {m.group(1)}, record says {poi.price.amount} minor units")
    answer_norm = f" {normalize_text(qa.answer)} "
    for city in store.cities:
        if city != poi.city and f" {normalize_text(city)} " in answer_norm:
            out.append(f"answer mentions city {city!r}, record places the POI in {poi.city!r}")
    return out


def verify_qa(
    qa: QaPair,
    store: PoiStore,
    semantic_checker=keyed_field_checker,
    manual_rate: float = 0.0,
    seed: int = 0,
    max_answer_words: int = 200,
) -> VerificationVerdict:
    """Three-layer verification: structural rules, semantic consistency with
    the referenced POI, and deterministic sampling into the manual queue.

    A QA failing the rule layer is never evaluated by the semantic layer.
    """
    reasons: list[str] = []
    structural = qa.violations()
    reasons.extend(structural)
    if not structural:
        if len(qa.answer.split()) > max_answer_words:
            reasons.append(f"answer longer than {max_answer_words} words")
        if normalize_text(qa.answer) == normalize_text(qa.question):
            reasons.append("answer is verbatim the question")
    if reasons:
        return VerificationVerdict(rule_pass=False, semantic_pass=False, manual_queue=False, reasons=tuple(reasons))

    if qa.poi_id is not None:
        poi = store.get(qa.poi_id)
        if poi is None:
            return VerificationVerdict(
                rule_pass=True,
                semantic_pass=False,
                manual_queue=False,
                reasons=(f"unknown POI {qa.poi_id!r}",),
            )
        inconsistencies = semantic_checker(qa, poi, store)
        if inconsistencies:
            return VerificationVerdict(
                rule_pass=True, semantic_pass=False, manual_queue=False, reasons=tuple(inconsistencies)
            )

    queued = manual_rate > 0 and stable_hash(str(seed), "manual", qa.id) % 1_000_000 < manual_rate * 1_000_000
    return VerificationVerdict(rule_pass=True, semantic_pass=True, manual_queue=bool(queued))


# --- splitting ---------------------------------------------------------------


@dataclass(frozen=True)
class SplitAssignment:
    by_poi: dict[str, str]      # poi_id -> "train" | "test"
    orphans: dict[str, str]     # fact id (or qa id) -> split, for POI-less QAs

    def split_of(self, qa: QaPair) -> str:
        if qa.poi_id is not None:
            return self.by_poi[qa.poi_id]
        return self.orphans[qa.source_fact_id or qa.id]

    def to_record(self) -> dict:
        return {
            "by_poi": dict(sorted(self.by_poi.items())),
            "orphans": dict(sorted(self.orphans.items())),
        }


def _rank_split(keys: list[str], ratio: float, seed: int, salt: str) -> dict[str, str]:
    ranked = sorted(keys, key=lambda k: (stable_hash(str(seed), salt, k), k))
    n_train = int(len(ranked) * ratio + 0.5)
    return {k: ("train" if i < n_train else "test") for i, k in enumerate(ranked)}


def split_dataset(store: PoiStore, qas: Iterable[QaPair], ratio: float = 0.8, seed: int = 0) -> SplitAssignment:
    """POI-disjoint split: every POI is ranked by a stable keyed hash of
    (seed, poi_id) and the top `ratio` fraction becomes train. POI-less QAs
    are split independently by their fact id."""
    if not 0 < ratio < 1:
        raise SplitError(f"ratio must be in (0, 1), got {ratio}")
    if len(store) == 0:
        raise SplitError("cannot split an empty POI store")
    qas = list(qas)
    orphan_keys = sorted({qa.source_fact_id or qa.id for qa in qas if qa.poi_id is None})
    return SplitAssignment(
        by_poi=_rank_split(sorted(p.id for p in store.pois), ratio, seed, "poi"),
        orphans=_rank_split(orphan_keys, ratio, seed, "orphan"),
    )


def apply_split(qas: Iterable[QaPair], assignment: SplitAssignment) -> list[QaPair]:
    return [
        QaPair(
            id=qa.id,
            question=qa.question,
            answer=qa.answer,
            modality=qa.modality,
            poi_id=qa.poi_id,
            vl_type=qa.vl_type,
            source_fact_id=qa.source_fact_id,
            split=assignment.split_of(qa),
            image_uri=qa.image_uri,
        )
        for qa in qas
    ]


def check_poi_disjoint(qas: Iterable[QaPair], assignment: SplitAssignment) -> list[str]:
    """Exhaustive disjointness audit: all records of one POI share one split."""
    out = []
    seen: dict[str, str] = {}
    for qa in qas:
        if qa.poi_id is None:
            continue
        expected = assignment.by_poi.get(qa.poi_id)
        label = qa.split or expected
        if expected is None:
            out.append(f"{qa.id}: POI {qa.poi_id} missing from the assignment")
            continue
        if label != expected:
            out.append(f"{qa.id}: split {label!r} != POI split {expected!r}")
        prior = seen.setdefault(qa.poi_id, label)
        if prior != label:
            out.append(f"{qa.id}: POI {qa.poi_id} appears in both {prior!r} and {label!r}")
    return out


# --- composition reporting ---------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class CompositionStats:
    by_format: dict[str, int]                 # text / vision-language / cot
    by_split: dict[str, dict[str, int]]       # format -> split -> count
    by_category: dict[str, int]
    by_visual_kind: dict[str, int]
    mean_answer_words: dict[str, float]
    identities: tuple[IdentityCheck, ...]

    @property
    def all_identities_ok(self) -> bool:
        return all(c.ok for c in self.identities)


def composition_report(
    store: PoiStore,
    qas: Iterable[QaPair],
    chains_count: int = 0,
    n_facts: int | None = None,
    questions_per_fact: int | None = None,
    targets: dict[str, int] | None = None,
) -> CompositionStats:
    """Counts per QA format, category, visual element, and split, with the
    configured identity checks evaluated on those counts."""
    qas = list(qas)
    text_qas = [q for q in qas if q.modality == "text"]
    vl_qas = [q for q in qas if q.modality == "vision-language"]
    expanded = [q for q in text_qas if q.source_fact_id is not None]
    augmented = [q for q in text_qas if q.source_fact_id is None]

    by_format = {"text": len(text_qas), "vision-language": len(vl_qas), "cot": chains_count}
    by_split: dict[str, dict[str, int]] = {}
    for fmt, subset in (("text", text_qas), ("vision-language", vl_qas)):
        counts: dict[str, int] = {}
        for qa in subset:
            counts[qa.split or "unsplit"] = counts.get(qa.split or "unsplit", 0) + 1
        by_split[fmt] = counts

    by_category: dict[str, int] = {c: 0 for c in CATEGORIES}
    for qa in qas:
        if qa.poi_id is not None and qa.poi_id in store:
            by_category[store[qa.poi_id].category] += 1

    image_kind = {img.uri: img.kind for p in store.pois for img in p.images}
    by_visual_kind = {"map": 0, "street": 0}
    for qa in vl_qas:
        kind = image_kind.get(qa.image_uri or "")
        if kind in by_visual_kind:
            by_visual_kind[kind] += 1

    def _mean_words(subset) -> float:
        if not subset:
            return 0.0
        return sum(len(q.answer.split()) for q in subset) / len(subset)

    mean_answer_words = {"text": _mean_words(text_qas), "vision-language": _mean_words(vl_qas)}

    checks: list[IdentityCheck] = []

    def check(name: str, ok: bool, detail: str) -> None:
        checks.append(IdentityCheck(name=name, ok=ok, detail=detail))

    total = by_format["text"] + by_format["vision-language"] + by_format["cot"]
    for fmt, counts in by_split.items():
        row_sum = sum(counts.values())
        check(
            f"{fmt}: split columns sum to the row total",
            row_sum == by_format[fmt],
            f"{counts} -> {row_sum} vs {by_format[fmt]}",
        )
    check(
        "category counts cover exactly the POI-attached QAs",
        sum(by_category.values()) == sum(1 for q in qas if q.poi_id is not None and q.poi_id in store),
        f"{sum(by_category.values())} categorized",
    )
    check(
        "visual-element counts cover exactly the vision-language QAs",
        sum(by_visual_kind.values()) == len(vl_qas),
        f"{by_visual_kind} vs {len(vl_qas)} vl QAs",
    )
    if n_facts is not None and questions_per_fact is not None:
        expected = n_facts * questions_per_fact
        check(
            "text total = facts x questions-per-fact + augmented",
            len(expanded) == expected and len(text_qas) == expected + len(augmented),
            f"{len(text_qas)} = {n_facts}*{questions_per_fact} + {len(augmented)}",
        )
    expected_vl = sum(len(p.images) for p in store.pois) * QA_TYPES_PER_IMAGE
    if vl_qas:
        check(
            "vision-language total = images x 3",
            len(vl_qas) == expected_vl,
            f"{len(vl_qas)} vs {expected_vl}",
        )
    if targets:
        actual = {
            "total": total,
            "text": by_format["text"],
            "vision-language": by_format["vision-language"],
            "cot": by_format["cot"],
            "train": sum(c.get("train", 0) for c in by_split.values()) + chains_count,
            "test": sum(c.get("test", 0) for c in by_split.values()),
        }
        for key, want in targets.items():
            if key not in actual:
                check(f"target {key}", False, f"unknown target key {key!r}")
                continue
            check(f"target {key} = {want}", actual[key] == want, f"actual {actual[key]}")

    return CompositionStats(
        by_format=by_format,
        by_split=by_split,
        by_category=by_category,
        by_visual_kind=by_visual_kind,
        mean_answer_words=mean_answer_words,
        identities=tuple(checks),
    )


# --- pipeline orchestration ----------------------------------------------


@dataclass(frozen=True)
class DatasetBuild:
    qas: list[QaPair]                     # verified, split-labeled, sorted by id
    assignment: SplitAssignment
    verdicts: dict[str, VerificationVerdict]
    manual_queue: list[str]               # qa ids sampled for spot review
    rejected: list[tuple[str, tuple[str, ...]]]
    chains: list[dict]                    # cot records with id + split
    stats: CompositionStats


def build_dataset(
    store: PoiStore,
    facts: Iterable[Fact],
    generator: QuestionGenerator | None = None,
    questions_per_fact: int = QUESTIONS_PER_FACT,
    augmented: int = 0,
    ratio: float = 0.8,
    seed: int = 0,
    manual_rate: float = 0.0,
    cot_chains: int = 0,
    targets: dict[str, int] | None = None,
) -> DatasetBuild:
    """Run the full construction pipeline deterministically.

    Stages: fact expansion, per-image vision-language generation, augmented
    practical QAs, three-layer verification (failures dropped and listed),
    POI-disjoint split, optional reasoning-chain generation over train-split
    POIs, and the composition report.
    """
    generator = generator or ReferenceGenerator()
    facts = sorted(facts, key=lambda f: f.id)

    raw: list[QaPair] = []
    for fact in facts:
        raw.extend(expand_fact(fact, generator, questions_per_fact))
    for poi in store.pois:
        for image in poi.images:
            raw.extend(generate_vl_qa(poi, image, generator))
    raw.extend(build_augmented(store, augmented, generator))

    verdicts: dict[str, VerificationVerdict] = {}
    kept: list[QaPair] = []
    rejected: list[tuple[str, tuple[str, ...]]] = []
    for qa in raw:
        verdict = verify_qa(qa, store, manual_rate=manual_rate, seed=seed)
        verdicts[qa.id] = verdict
        if verdict.rule_pass and verdict.semantic_pass:
            kept.append(qa)
        else:
            rejected.append((qa.id, verdict.reasons))

    assignment = split_dataset(store, kept, ratio=ratio, seed=seed)
    labeled = sorted(apply_split(kept, assignment), key=lambda q: q.id)
    manual_queue = sorted(qa.id for qa in labeled if verdicts[qa.id].manual_queue)

    chains: list[dict] = []
    if cot_chains > 0:
        from .cot import QueryContext, reference_reason
        from .model import chain_to_record

        city_pools = []
        for city in store.cities:
            pool = [p for p in store.by_city[city] if assignment.by_poi[p.id] == "train"]
            if pool:
                city_pools.append((city, sorted(pool, key=lambda p: p.id)[:6]))
        if not city_pools:
            raise SplitError("no train-split POIs available for chain generation")
        for i in range(cot_chains):
            city, pool = city_pools[i % len(city_pools)]
            ctx = QueryContext(query=f"plan a day in {city}", candidates=tuple(pool))
            record = {"id": f"cot-{i:04d}", "split": "train"}
            record.update(chain_to_record(reference_reason(ctx)))
            chains.append(record)

    stats = composition_report(
        store,
        labeled,
        chains_count=len(chains),
        n_facts=len(facts),
        questions_per_fact=questions_per_fact,
        targets=targets,
    )
    return DatasetBuild(
        qas=labeled,
        assignment=assignment,
        verdicts=verdicts,
        manual_queue=manual_queue,
        rejected=rejected,
        chains=chains,
        stats=stats,
    )


def format_composition_report(stats: CompositionStats) -> str:
    lines = ["dataset composition", "==================="]
    lines.append("formats:")
    for fmt in ("text", "vision-language", "cot"):
        splits = stats.by_split.get(fmt, {})
        split_txt = "  ".join(f"{k}={v}" for k, v in sorted(splits.items())) or "-"
        lines.append(f"  {fmt}: {stats.by_format[fmt]}  ({split_txt})")
    lines.append("categories:")
    for cat in CATEGORIES:
        lines.append(f"  {cat}: {stats.by_category.get(cat, 0)}")
    lines.append("visual elements:")
    for kind in ("map", "street"):
        lines.append(f"  {kind}: {stats.by_visual_kind.get(kind, 0)}")
    lines.append("mean answer words:")
    for fmt, value in stats.mean_answer_words.items():
        lines.append(f"  {fmt}: {value:.1f}")
    lines.append("identity checks:")
    for c in stats.identities:
        lines.append(f"  [{'ok' if c.ok else 'FAIL'}] {c.name}: {c.detail}")
    if not stats.identities:
        lines.append("  (none configured)")
    return "\n".join(lines) + "\n"
