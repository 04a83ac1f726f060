import math

import pytest
from hypothesis import given, strategies as st

from travelkit.model import (
    CATEGORIES,
    CurrencyMismatchError,
    GeoPoint,
    ImageRef,
    Money,
    Poi,
    QaPair,
    CoTChain,
    ReasoningStep,
    TimeWindow,
    chain_from_record,
    chain_to_record,
    decode_line,
    encode_line,
    poi_from_record,
    poi_to_record,
    qa_from_record,
    qa_to_record,
    validate_poi,
    window_overlap,
)
from conftest import make_poi


def test_validate_poi_well_formed_fixture():
    assert validate_poi(make_poi("p1")) == []


def test_validate_poi_inverted_window():
    poi = make_poi("p1", open_minutes=600, close_minutes=540)
    problems = validate_poi(poi)
    assert any("inverted" in p for p in problems)


def test_validate_poi_unknown_category():
    problems = validate_poi(make_poi("p1", category="Museum"))
    assert any("category" in p for p in problems)
    assert "Museum" not in CATEGORIES


def test_validate_poi_reports_every_violation():
    poi = Poi(
        id="",
        name="",
        category="Museum",
        city="",
        location=GeoPoint(95.0, -200.0),
        hours=((9, TimeWindow(601, 540)),),
        price=Money(-5),
        visit_duration=-10,
        utility=-1.0,
        images=(ImageRef("", "aerial"),),
    )
    problems = validate_poi(poi)
    # id, name, category, city, lat, lon, dow, inverted+off-grid window,
    # price, duration, utility, image kind, image uri
    assert len(problems) >= 12


windows = st.builds(
    TimeWindow,
    st.integers(0, 288).map(lambda v: v * 5),
    st.integers(0, 288).map(lambda v: v * 5),
).filter(lambda w: w.start <= w.end)


def test_window_overlap_examples():
    a = TimeWindow(540, 1020)
    assert window_overlap(a, a) == a
    assert window_overlap(TimeWindow(540, 720), TimeWindow(720, 900)) == TimeWindow(720, 720)
    assert window_overlap(TimeWindow(540, 600), TimeWindow(660, 720)) is None


@given(windows, windows)
def test_window_overlap_commutative_and_valid(a, b):
    ab = window_overlap(a, b)
    assert ab == window_overlap(b, a)
    if ab is not None:
        assert ab.start <= ab.end
        assert ab.violations() == []


@given(windows)
def test_window_overlap_idempotent(a):
    assert window_overlap(a, a) == a


def test_money_arithmetic_same_currency_only():
    assert Money(100) + Money(250) == Money(350)
    assert Money(500, "EUR") - Money(100, "EUR") == Money(400, "EUR")
    assert Money(100).scaled(3) == Money(300)
    with pytest.raises(CurrencyMismatchError):
        Money(100, "USD") + Money(100, "EUR")


def test_geopoint_fixed_precision_equality():
    assert GeoPoint(40.7060861, -73.9968640) == GeoPoint(40.706086, -73.996864)
    assert GeoPoint(40.1, 0.0) != GeoPoint(40.100001, 0.0)


# --- serialization round-trips ------------------------------------------------

geopoints = st.builds(
    GeoPoint,
    st.floats(-90, 90, allow_nan=False),
    st.floats(-180, 180, allow_nan=False),
)
moneys = st.builds(Money, st.integers(0, 10**9), st.sampled_from(["USD", "EUR", "JPY"]))
texts = st.text(min_size=1, max_size=30).filter(lambda s: s.strip())
image_refs = st.builds(ImageRef, texts, st.sampled_from(["map", "street"]))
pois = st.builds(
    Poi,
    id=texts,
    name=texts,
    category=st.sampled_from(CATEGORIES),
    city=texts,
    location=geopoints,
    hours=st.lists(st.tuples(st.integers(0, 6), windows), max_size=3).map(tuple),
    price=moneys,
    visit_duration=st.integers(1, 48).map(lambda v: v * 5),
    utility=st.floats(0, 100, allow_nan=False),
    accessibility=st.frozensets(st.sampled_from(["wheelchair", "elder-friendly", "stroller"])),
    images=st.lists(image_refs, max_size=2).map(tuple),
)


@given(pois)
def test_poi_roundtrip_bit_exact(poi):
    line = encode_line(poi_to_record(poi))
    assert poi_from_record(decode_line(line)) == poi


qa_pairs = st.builds(
    QaPair,
    id=texts,
    question=texts,
    answer=texts,
    modality=st.just("text"),
    poi_id=st.none() | texts,
    source_fact_id=st.none() | texts,
    split=st.none() | st.sampled_from(["train", "test"]),
)


@given(qa_pairs)
def test_qa_roundtrip_bit_exact(qa):
    assert qa_from_record(decode_line(encode_line(qa_to_record(qa)))) == qa


steps = st.builds(
    ReasoningStep,
    text=texts,
    refs=st.lists(texts, max_size=2).map(tuple),
    data=st.none()
    | st.dictionaries(
        st.sampled_from(["km", "total", "spent"]),
        st.integers(0, 10**6) | st.floats(0, 1e6, allow_nan=False),
        max_size=2,
    ),
)
chains = st.builds(
    CoTChain,
    spatial=st.lists(steps, min_size=1, max_size=3).map(tuple),
    temporal=st.lists(steps, min_size=1, max_size=3).map(tuple),
    practical=st.lists(steps, min_size=1, max_size=3).map(tuple),
)


@given(chains)
def test_chain_roundtrip_bit_exact(chain):
    assert chain_from_record(decode_line(encode_line(chain_to_record(chain)))) == chain


def test_valid_poi_accepted_downstream():
    """validate_poi == ok must imply every downstream consumer accepts it."""
    from travelkit.cot import QueryContext, reference_reason, validate_chain
    from travelkit.dataset import PoiStore, verify_qa
    from travelkit.solver import PlanInstance, brute_force, feasible, solve

    poi = make_poi("ok-1", images=(ImageRef("img/x.jpg", "street"),))
    assert validate_poi(poi) == []
    store = PoiStore([poi])
    qa = QaPair(id="q1", question="What is here?", answer="A lovely place.", poi_id=poi.id)
    verdict = verify_qa(qa, store)
    assert verdict.rule_pass and verdict.semantic_pass
    inst = PlanInstance(candidates=(poi,))
    itinerary = solve(inst)
    assert feasible(itinerary, inst) == []
    assert brute_force(inst).visits == itinerary.visits
    ctx = QueryContext(query="visit", candidates=(poi,))
    assert validate_chain(reference_reason(ctx), ctx) == []


def test_encode_line_is_single_canonical_line():
    line = encode_line({"b": 1, "a": [1.5, "é"]})
    assert "\n" not in line and " " not in line
    assert "é" in line  # raw unicode, not escaped
    assert math.isclose(decode_line(line)["a"][0], 1.5)
