"""Acceptance suite: one test per release criterion, each printing a
pass/fail line and enforcing its stated runtime budget.

Run with `pytest tests/test_acceptance.py -v` (add -s to see the lines
inline; a summary block is always printed at the end of the session).
"""

import random
import string
import time
from fractions import Fraction

from conftest import make_poi, random_instance
from travelkit.agent import replay_itinerary, run_session, trace_bytes
from travelkit.cot import QueryContext, chain_similarity, combined_loss, reference_reason, validate_chain
from travelkit.dataset import (
    Fact,
    apply_split,
    build_dataset,
    check_poi_disjoint,
    split_dataset,
)
from travelkit.dataset import PoiStore
from travelkit.mcq import (
    McqItem,
    check_reported_deltas,
    check_reported_full_scores,
    match_answer,
    normalize_text,
    score_run,
)
from travelkit.model import CATEGORIES, ImageRef, QaPair
from travelkit.solver import brute_force, feasible, instance_from_record, solve
from travelkit.stats import REPORTED_SUS_STUDY, SusResponse, check_item_sum_consistency, sus_score


class Budget:
    """Wall-clock guard for a criterion's stated runtime limit."""

    def __init__(self, seconds: float):
        self.limit = seconds
        self.started = time.perf_counter()

    def check(self):
        elapsed = time.perf_counter() - self.started
        assert elapsed < self.limit, f"criterion exceeded its {self.limit}s budget ({elapsed:.1f}s)"
        return elapsed


def test_c1_full_score_arithmetic():
    budget = Budget(1.0)
    results = check_reported_full_scores(tol=0.15)
    assert len(results) == 17
    bad = [r for r in results if not r["ok"]]
    assert bad == [], f"full-score deviations above tolerance: {bad}"
    # the worked example: (80.4, 68.9) must land on 76.0 exactly after rounding
    from travelkit.mcq import round_half_up, weighted_full_score

    assert round_half_up(weighted_full_score(80.4, 68.9)) == 76.0
    elapsed = budget.check()
    print(f"\n[PASS] criterion 1: 17/17 full scores within ±0.15 ({elapsed:.2f}s)")


def test_c2_delta_columns():
    budget = Budget(1.0)
    results = check_reported_deltas(tol=0.15)
    baselined = [r for r in results if r["key"] != "ours-travel-cot"]
    assert len(baselined) == 24
    bad = [r for r in baselined if not r["ok"]]
    assert bad == [], f"delta deviations above tolerance: {bad}"
    # worked example: Shikra VQA 60.8 -> 66.7 prints +9.7
    shikra = next(r for r in results if r["key"] == "shikra-ft" and r["column"] == "vqa")
    assert abs(shikra["computed"] - 9.7) <= 0.15
    # the reasoning-augmented row's printed deltas are internally inconsistent
    # with every printed baseline; the harness must flag, not reproduce, them
    flagged = [r for r in results if r["key"] == "ours-travel-cot"]
    assert len(flagged) == 3 and all(not r["ok"] for r in flagged)
    elapsed = budget.check()
    print(f"\n[PASS] criterion 2: 24/24 baselined deltas within ±0.15 pp; final row flagged ({elapsed:.2f}s)")


def test_c3_sus_scoring():
    budget = Budget(1.0)
    baseline = REPORTED_SUS_STUDY["claude-3.5"]
    total = sum(Fraction(str(v)) for v in baseline["item_means"])
    assert total == Fraction("76.3")
    assert check_item_sum_consistency(baseline["item_means"], baseline["reported_total"])["ok"]

    assert sus_score(SusResponse((3,) * 10)) == 50.0

    ours = REPORTED_SUS_STUDY["ours"]
    assert sum(Fraction(str(v)) for v in ours["item_means"]) == Fraction("83.5")
    check = check_item_sum_consistency(ours["item_means"], ours["reported_total"])
    assert not check["ok"] and abs(check["gap"] - 1.0) < 1e-9
    elapsed = budget.check()
    print(f"\n[PASS] criterion 3: column sums exact; 83.5 vs 82.5 inconsistency detected ({elapsed:.2f}s)")


def test_c4_dataset_identities_and_disjointness():
    budget = Budget(30.0)
    # 1/1000-scale identity: 26 facts x 5 + 6 augmented = 136 text QAs
    store = PoiStore([make_poi(f"p{i}", category=CATEGORIES[i % 6]) for i in range(10)])
    facts = [Fact(id=f"f{i:02d}", text=f"A checkable statement number {i}.") for i in range(26)]
    build = build_dataset(store, facts, questions_per_fact=5, augmented=6, seed=101)
    text_qas = [q for q in build.qas if q.modality == "text"]
    assert len(text_qas) == 26 * 5 + 6 == 136
    assert build.stats.all_identities_ok

    # 1000 randomized datasets: exact 4:1 POI split, zero disjointness violations
    rng = random.Random(424242)
    for _ in range(1000):
        n = rng.randrange(5, 36)
        store = PoiStore([make_poi(f"p{i:02d}", category=CATEGORIES[i % 6]) for i in range(n)])
        qas = [
            QaPair(id=f"p{i:02d}-q{j}", question=f"Q{j}?", answer="An answer.", poi_id=f"p{i:02d}")
            for i in range(n)
            for j in range(rng.randrange(1, 4))
        ]
        assignment = split_dataset(store, qas, ratio=0.8, seed=rng.randrange(10**9))
        train = sum(1 for v in assignment.by_poi.values() if v == "train")
        assert train == int(n * 0.8 + 0.5)
        assert check_poi_disjoint(apply_split(qas, assignment), assignment) == []
    elapsed = budget.check()
    print(f"\n[PASS] criterion 4: identities hold; 1000/1000 splits POI-disjoint at 4:1 ({elapsed:.2f}s)")


def test_c5_solver_oracle_equivalence():
    budget = Budget(60.0)
    rng = random.Random(1234)
    agreements = 0
    for _ in range(100):
        inst = random_instance(rng, rng.randrange(1, 8), with_flags=True)  # n <= 7
        exact = brute_force(inst)
        beam = solve(inst, beam_width=None)
        assert feasible(beam, inst) == []
        assert feasible(exact, inst) == []
        assert beam.total_utility == exact.total_utility
        agreements += 1
    assert agreements == 100
    elapsed = budget.check()
    print(f"\n[PASS] criterion 5: 100/100 unbounded-beam vs oracle agreements ({elapsed:.2f}s)")


def _random_string(rng: random.Random) -> str:
    pools = [
        string.ascii_letters,
        string.digits,
        string.punctuation,
        " \t ",
        "éèüñçøß",
        "東京パリ北京",
        "—–…“”‘’",
    ]
    chars = []
    for _ in range(rng.randrange(0, 40)):
        chars.append(rng.choice(rng.choice(pools)))
    return "".join(chars)


def test_c6_matcher_properties():
    budget = Budget(30.0)
    rng = random.Random(55)
    for _ in range(100_000):
        s = _random_string(rng)
        once = normalize_text(s)
        assert normalize_text(once) == once

    # uniform-random predictions over 10^4 four-option items score 25 +/- 2
    items = [
        McqItem(
            qa_id=f"m{i}",
            question="?",
            options=(f"o{i}a", f"o{i}b", f"o{i}c", f"o{i}d"),
            correct_index=i % 4,
            modality="text" if i % 2 else "vision-language",
        )
        for i in range(10_000)
    ]
    predictions = {item.qa_id: rng.randrange(4) for item in items}
    report = score_run(predictions, items)
    assert 23.0 <= report.full_score <= 27.0

    # engineered ties always map to incorrect
    for i in range(200):
        a, b, c = f"tok{i}a", f"tok{i}b", f"tok{i}c"
        item = McqItem(
            qa_id="tie",
            question="?",
            options=(f"{a} {b} left", f"{a} {b} right", "zz one", "zz two"),
            correct_index=0,
            modality="text",
        )
        assert match_answer(f"{a} {b}", item) is None
    elapsed = budget.check()
    print(f"\n[PASS] criterion 6: idempotence 100k/100k, random score {report.full_score}, ties incorrect ({elapsed:.2f}s)")


def test_c7_agent_end_to_end(nyc_fixtures):
    budget = Budget(10.0)
    image = ImageRef("img/brooklyn-bridge-street-01.jpg", "street")
    query = "a full day around this landmark, $150 for 1 person"
    trace = run_session(query, image, fixtures=nyc_fixtures)

    assert trace.outcome == "complete"
    assert len(trace.events) <= trace.config.max_steps
    tools_used = [tc.tool for tc, _ in trace.events]
    assert tools_used[0] == "map_locate" and "hours" in tools_used

    inst = instance_from_record(trace.instance)
    assert feasible(trace.itinerary, inst) == []
    assert trace.itinerary.total_cost.amount <= 15000

    rerun = run_session(query, image, fixtures=nyc_fixtures)
    assert trace_bytes(rerun) == trace_bytes(trace)

    # generate-discipline: the itinerary is a function of (plan, observations,
    # chain) alone; the query text is not an input to the replay
    assert replay_itinerary(trace) == trace.itinerary
    elapsed = budget.check()
    print(f"\n[PASS] criterion 7: feasible plan, byte-stable trace, replay discipline ({elapsed:.2f}s)")


def test_c8_reasoning_suite():
    budget = Budget(30.0)
    rng = random.Random(77)
    contexts = []
    for _ in range(1000):
        inst = random_instance(rng, rng.randrange(1, 6), with_flags=True)
        contexts.append(QueryContext(query="plan", candidates=inst.candidates, constraints=inst.constraints))
    valid = sum(1 for ctx in contexts if validate_chain(reference_reason(ctx), ctx) == [])
    assert valid == 1000

    for ctx in contexts[:100]:
        g = reference_reason(ctx)
        assert chain_similarity(g, g) == 1.0
    for i in range(100):
        a = reference_reason(contexts[i])
        b = reference_reason(contexts[i + 100])
        assert chain_similarity(a, b) == chain_similarity(b, a)

    for i in range(10):
        for j in range(10):
            l_cot, l_ans = i * 0.31, j * 0.47
            assert combined_loss(l_cot, l_ans, 1.25).total == 1.25 * l_cot + l_ans
    elapsed = budget.check()
    print(f"\n[PASS] criterion 8: 1000/1000 chains valid; similarity and loss properties hold ({elapsed:.2f}s)")
