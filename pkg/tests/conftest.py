from __future__ import annotations

import random
from pathlib import Path

import pytest

from travelkit.model import ConstraintSet, GeoPoint, Money, Poi, TimeWindow
from travelkit.solver import PlanInstance

FIXTURES_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "nyc"


@pytest.fixture(scope="session")
def nyc_fixtures():
    from travelkit.tools import CityFixtures

    return CityFixtures.load(FIXTURES_DIR)


def make_poi(
    poi_id: str,
    lat: float = 40.0,
    lon: float = -73.0,
    category: str = "Attractions",
    city: str = "Testville",
    price: int = 1000,
    utility: float = 1.0,
    open_minutes: int = 540,
    close_minutes: int = 1260,
    duration: int = 60,
    days=range(7),
    accessibility=(),
    images=(),
    name: str | None = None,
) -> Poi:
    return Poi(
        id=poi_id,
        name=name or f"Place {poi_id}",
        category=category,
        city=city,
        location=GeoPoint(lat, lon),
        hours=tuple((d, TimeWindow(open_minutes, close_minutes)) for d in days),
        price=Money(price),
        visit_duration=duration,
        utility=utility,
        accessibility=frozenset(accessibility),
        images=tuple(images),
    )


def random_instance(rng: random.Random, n: int, with_flags: bool = False) -> PlanInstance:
    """Randomized single-day instance for solver and reasoning tests."""
    pois = []
    for i in range(n):
        open_m = 5 * rng.randrange(60, 200)
        close_m = min(1440, open_m + 5 * rng.randrange(12, 90))
        flags = set()
        if with_flags and rng.random() < 0.5:
            flags.add("wheelchair")
        pois.append(
            make_poi(
                f"p{i:02d}",
                lat=40.0 + rng.uniform(-0.04, 0.04),
                lon=-73.0 + rng.uniform(-0.04, 0.04),
                price=rng.randrange(0, 40) * 100,
                utility=round(rng.uniform(0.0, 10.0), 2),
                open_minutes=open_m,
                close_minutes=close_m,
                duration=5 * rng.randrange(6, 24),
                accessibility=flags,
            )
        )
    required = frozenset({"wheelchair"}) if with_flags and rng.random() < 0.3 else frozenset()
    constraints = ConstraintSet(
        day=0,
        day_window=TimeWindow(540, 1260),
        budget=Money(rng.randrange(20, 90) * 100),
        group_size=rng.choice([1, 1, 2]),
        required_access=required,
    )
    edges = []
    ids = [p.id for p in pois]
    if n >= 2:
        for _ in range(rng.randrange(0, n)):
            a, b = rng.sample(ids, 2)
            edges.append((a, b, 5 * rng.randrange(1, 8)))
    return PlanInstance(candidates=tuple(pois), constraints=constraints, edges=tuple(edges))


_CRITERIA = {
    "test_c1": "criterion 1: full-score arithmetic reproduces all 17 reported rows within ±0.15",
    "test_c2": "criterion 2: improvement columns reproduce within ±0.15 pp; final-row inconsistency flagged",
    "test_c3": "criterion 3: SUS column sums, all-3s midpoint, and the 83.5-vs-82.5 inconsistency flag",
    "test_c4": "criterion 4: dataset count identities and POI-disjoint 4:1 splits over 1000 datasets",
    "test_c5": "criterion 5: unbounded solver matches the exhaustive oracle on 100/100 instances",
    "test_c6": "criterion 6: matcher idempotence, random-guess score 25±2, ties scored incorrect",
    "test_c7": "criterion 7: agent end-to-end on the landmark fixture city with replayable traces",
    "test_c8": "criterion 8: reasoning-chain validation, similarity properties, loss linearity",
}

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    key = name.split("_")[0] + "_" + name.split("_")[1]
    if key not in _CRITERIA:
        return
    if report.when == "call":
        _acceptance_outcomes[key] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.outcome in ("failed", "skipped"):
        _acceptance_outcomes[key] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        if key in _acceptance_outcomes:
            terminalreporter.write_line(f"[{_acceptance_outcomes[key]}] {_CRITERIA[key]}")
