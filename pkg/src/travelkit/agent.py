"""Tool-using planning agent: query analysis, structured reasoning, a
deterministic tool loop, and result integration.

The loop keeps a PlanState of pending/resolved information needs. Each
iteration selects one tool call by a fixed priority policy, applies the
observation, and increments the step counter. The final itinerary is always
produced by `integrate`, which sees only (final plan state, observations,
reasoning chain) — never the raw query text.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

from . import tools as toolhub
from .cot import QueryContext, reference_reason
from .model import (
    ConstraintSet,
    CoTChain,
    DEFAULT_DAY_WINDOW,
    ImageRef,
    Money,
    Poi,
    TimeWindow,
    chain_from_record,
    chain_to_record,
    encode_line,
)
from .solver.planner import (
    Itinerary,
    PlanInstance,
    feasible,
    instance_from_record,
    instance_to_record,
    itinerary_from_record,
    itinerary_to_record,
    solve,
)
from .tools import STATUS_OK, CityFixtures, ToolCall, ToolResponse

OUTCOME_COMPLETE = "complete"
OUTCOME_INCOMPLETE = "incomplete"
OUTCOME_CLARIFICATION = "clarification-needed"
OUTCOME_INFEASIBLE_LOCK = "infeasible-lock"

# need kinds in tool-selection priority order
_NEED_PRIORITY = {"locate": 0, "hours": 1, "price": 2, "transit": 3, "reviews": 4}


class AgentProtocolError(RuntimeError):
    """An observation arrived for a need that was never requested."""


class RefineError(ValueError):
    """Contradictory refinement request."""


@dataclass(frozen=True)
class QuerySpec:
    destination: str | None = None
    days: int | None = None
    budget: Money | None = None
    group_size: int | None = None
    access_needs: frozenset[str] = frozenset()
    landmark_hint: str | None = None
    quality_requested: bool = False
    free_text: str = ""

    def resolved(self) -> bool:
        return any(
            (
                self.destination,
                self.days,
                self.budget,
                self.group_size,
                self.access_needs,
                self.landmark_hint,
            )
        )

    def to_record(self) -> dict:
        return {
            "destination": self.destination,
            "days": self.days,
            "budget": {"amount": self.budget.amount, "currency": self.budget.currency}
            if self.budget
            else None,
            "group_size": self.group_size,
            "access_needs": sorted(self.access_needs),
            "landmark_hint": self.landmark_hint,
            "quality_requested": self.quality_requested,
            "free_text": self.free_text,
        }

    @classmethod
    def from_record(cls, r: dict) -> "QuerySpec":
        return cls(
            destination=r.get("destination"),
            days=r.get("days"),
            budget=Money(r["budget"]["amount"], r["budget"]["currency"]) if r.get("budget") else None,
            group_size=r.get("group_size"),
            access_needs=frozenset(r.get("access_needs", [])),
            landmark_hint=r.get("landmark_hint"),
            quality_requested=r.get("quality_requested", False),
            free_text=r.get("free_text", ""),
        )


_DAYS_RE = re.compile(r"\b(\d+)\s*-?\s*days?\b", re.IGNORECASE)
_DOLLARS_RE = re.compile(r"\$\s*(\d+(?:\.\d{1,2})?)")
_DOLLARS_WORD_RE = re.compile(r"\b(\d+(?:\.\d{1,2})?)\s*(?:dollars|usd)\b", re.IGNORECASE)
_GROUP_RE = re.compile(r"\b(\d+)\s*(?:people|persons?|adults?|travell?ers)\b", re.IGNORECASE)
_QUALITY_RE = re.compile(r"\b(best|top|top-rated|highly rated)\b", re.IGNORECASE)


def _find_alias(text_norm: str, aliases: dict[str, str]) -> str | None:
    padded = f" {text_norm} "
    hits = [a for a in aliases if f" {a} " in padded]
    if not hits:
        return None
    return aliases[max(hits, key=lambda a: (len(a), a))]


def analyze_query(
    message: str,
    visual: ImageRef | None = None,
    fixtures: CityFixtures | None = None,
    recognizer=None,
) -> QuerySpec:
    """Grammar-based constraint extraction plus landmark resolution.

    The recognizer adapter maps an image descriptor to a POI id; the
    reference implementation is the fixtures' lookup table. An empty result
    (nothing extractable, no visual) is the clarification case, not an error.
    """
    from .mcq import normalize_text

    message = message or ""
    days = None
    m = _DAYS_RE.search(message)
    if m:
        days = int(m.group(1))
    budget = None
    m = _DOLLARS_RE.search(message) or _DOLLARS_WORD_RE.search(message)
    if m:
        budget = Money(round(float(m.group(1)) * 100), "USD")
    group = None
    m = _GROUP_RE.search(message)
    if m:
        group = int(m.group(1))
    access = set()
    if re.search(r"\bwheelchair\b", message, re.IGNORECASE):
        access.add("wheelchair")
    if re.search(r"\b(elderly|elder[- ]friendly|seniors?)\b", message, re.IGNORECASE):
        access.add("elder-friendly")

    destination = None
    landmark = None
    if fixtures is not None:
        text_norm = normalize_text(message)
        destination = _find_alias(text_norm, fixtures.city_aliases)
        landmark = _find_alias(text_norm, fixtures.poi_aliases)
    if visual is not None:
        if recognizer is not None:
            landmark = recognizer(visual) or landmark
        elif fixtures is not None:
            landmark = fixtures.image_index.get(visual.uri, landmark)

    return QuerySpec(
        destination=destination,
        days=days,
        budget=budget,
        group_size=group,
        access_needs=frozenset(access),
        landmark_hint=landmark,
        quality_requested=bool(_QUALITY_RE.search(message)),
        free_text=message,
    )


# Needs are tuples: ("locate", key) | ("hours", poi) | ("price", poi)
# | ("transit", a, b) with a < b | ("reviews", poi)
Need = tuple


def need_sort_key(need: Need):
    return (_NEED_PRIORITY[need[0]], need[1:])


@dataclass(frozen=True)
class Observation:
    """Typed result of one tool call, tagged with the loop step it answered."""

    need: Need
    tool: str
    payload: dict
    t: int


@dataclass(frozen=True)
class PlanState:
    """Evolving plan: what is still needed, what has been observed."""

    t: int = 0
    pending: frozenset = frozenset()
    resolved: dict = field(default_factory=dict)          # need -> payload
    unresolvable: frozenset = frozenset()                 # needs a tool refused
    locate_args: dict = field(default_factory=dict)       # args for the locate call

    def advance(self) -> "PlanState":
        return dataclasses.replace(self, t=self.t + 1)


def select_tool(state: PlanState) -> ToolCall | None:
    """Fixed priority policy: locate, then hours, price, transit, reviews.

    Returns None (finish) when nothing is pending.
    """
    if not state.pending:
        return None
    need = min(state.pending, key=need_sort_key)
    kind = need[0]
    if kind == "locate":
        tool, args = "map_locate", dict(state.locate_args)
    elif kind == "transit":
        tool, args = "transit", {"from": need[1], "to": need[2]}
    else:
        tool, args = kind, {"poi_id": need[1]}
    request_id = f"t{state.t}-{tool}-" + "-".join(str(p) for p in need[1:])
    return ToolCall(tool=tool, args=args, request_id=request_id)


def need_of_call(tc: ToolCall) -> Need:
    if tc.tool == "map_locate":
        return ("locate", "query")
    if tc.tool == "transit":
        return ("transit", tc.args["from"], tc.args["to"])
    return (tc.tool, tc.args["poi_id"])


def update_plan(state: PlanState, obs: Observation) -> PlanState:
    """Move the answered need from pending to resolved; duplicates only
    advance the step counter (idempotent on content)."""
    if obs.need in state.resolved:
        return state.advance()
    if obs.need not in state.pending:
        raise AgentProtocolError(f"observation for never-requested need {obs.need!r}")
    resolved = dict(state.resolved)
    resolved[obs.need] = obs.payload
    return dataclasses.replace(
        state,
        t=state.t + 1,
        pending=state.pending - {obs.need},
        resolved=resolved,
    )


def mark_unresolvable(state: PlanState, need: Need) -> PlanState:
    """A non-ok tool response: the need is flagged, never fabricated."""
    return dataclasses.replace(
        state,
        t=state.t + 1,
        pending=state.pending - {need},
        unresolvable=state.unresolvable | {need},
    )


@dataclass(frozen=True)
class SessionConfig:
    max_steps: int = 32
    beam_width: int = 8
    seed: int = 0
    shortlist_size: int = 6
    day: int = 0
    day_window: TimeWindow = TimeWindow(*DEFAULT_DAY_WINDOW)

    def to_record(self) -> dict:
        return {
            "max_steps": self.max_steps,
            "beam_width": self.beam_width,
            "seed": self.seed,
            "shortlist_size": self.shortlist_size,
            "day": self.day,
            "day_window": [self.day_window.start, self.day_window.end],
        }

    @classmethod
    def from_record(cls, r: dict) -> "SessionConfig":
        return cls(
            max_steps=r.get("max_steps", 32),
            beam_width=r.get("beam_width", 8),
            seed=r.get("seed", 0),
            shortlist_size=r.get("shortlist_size", 6),
            day=r.get("day", 0),
            day_window=TimeWindow(*r.get("day_window", DEFAULT_DAY_WINDOW)),
        )


@dataclass(frozen=True)
class SessionTrace:
    query_spec: QuerySpec
    config: SessionConfig
    outcome: str
    chain: CoTChain | None = None
    events: tuple[tuple[ToolCall, ToolResponse], ...] = ()
    instance: dict | None = None            # final plan state as an instance record
    itinerary: Itinerary | None = None
    verdicts: tuple[str, ...] = ()
    unresolved: tuple[Need, ...] = ()
    notes: tuple[str, ...] = ()
    summary: tuple[str, ...] = ()
    refinements: tuple[dict, ...] = ()

    def observations(self) -> list[dict]:
        return [resp.payload for _, resp in self.events if resp.status == STATUS_OK]

    def to_record(self) -> dict:
        return {
            "query_spec": self.query_spec.to_record(),
            "config": self.config.to_record(),
            "outcome": self.outcome,
            "chain": chain_to_record(self.chain) if self.chain else None,
            "events": [[tc.to_record(), resp.to_record()] for tc, resp in self.events],
            "instance": self.instance,
            "itinerary": itinerary_to_record(self.itinerary) if self.itinerary else None,
            "verdicts": list(self.verdicts),
            "unresolved": [list(n) for n in self.unresolved],
            "notes": list(self.notes),
            "summary": list(self.summary),
            "refinements": list(self.refinements),
        }

    @classmethod
    def from_record(cls, r: dict) -> "SessionTrace":
        return cls(
            query_spec=QuerySpec.from_record(r["query_spec"]),
            config=SessionConfig.from_record(r["config"]),
            outcome=r["outcome"],
            chain=chain_from_record(r["chain"]) if r.get("chain") else None,
            events=tuple(
                (ToolCall.from_record(e[0]), ToolResponse.from_record(e[1])) for e in r.get("events", [])
            ),
            instance=r.get("instance"),
            itinerary=itinerary_from_record(r["itinerary"]) if r.get("itinerary") else None,
            verdicts=tuple(r.get("verdicts", [])),
            unresolved=tuple(tuple(n) for n in r.get("unresolved", [])),
            notes=tuple(r.get("notes", [])),
            summary=tuple(r.get("summary", [])),
            refinements=tuple(r.get("refinements", [])),
        )


def trace_bytes(trace: SessionTrace) -> bytes:
    """Canonical byte serialization; equal traces serialize identically."""
    return encode_line(trace.to_record()).encode("utf-8")


def _minutes_hhmm(m: int) -> str:
    return f"{m // 60:02d}:{m % 60:02d}"


def integrate(
    instance_record: dict,
    observations: list[dict],
    chain: CoTChain | None,
    beam_width: int,
    locked: frozenset[str] = frozenset(),
) -> tuple[Itinerary | None, list[str], PlanInstance]:
    """Result integration: produce the final plan from (final plan state,
    observations, reasoning chain) only.

    The raw query text is deliberately not an input; replaying a recorded
    trace through this function must reproduce the session's itinerary.
    """
    inst = instance_from_record(instance_record)
    itinerary = solve(inst, beam_width=beam_width, locked=locked)
    summary: list[str] = []
    if chain is not None:
        summary.append(
            f"reasoning: {len(chain.spatial)} spatial, {len(chain.temporal)} temporal, "
            f"{len(chain.practical)} practical steps"
        )
    summary.append(f"grounded in {len(observations)} tool observations")
    if itinerary is None:
        summary.append("no plan satisfies the locked POIs under the current constraints")
        return None, summary, inst
    if not itinerary.visits:
        summary.append("no feasible visits under the current constraints")
    by_id = {p.id: p for p in inst.candidates}
    for v in itinerary.visits:
        poi = by_id[v.poi_id]
        cost = poi.price.amount * inst.constraints.group_size
        summary.append(
            f"{_minutes_hhmm(v.start)}-{_minutes_hhmm(v.end)} {poi.name} (cost {cost} {poi.price.currency})"
        )
    budget = inst.constraints.budget
    if budget is not None:
        summary.append(f"total cost {itinerary.total_cost.amount} of budget {budget.amount} {budget.currency}")
    return itinerary, summary, inst


def _observed_poi(poi: Poi, hours_payload: dict, price_payload: dict) -> Poi:
    """Candidate snapshot with hours and price taken from tool observations."""
    return dataclasses.replace(
        poi,
        hours=tuple((h[0], TimeWindow(h[1], h[2])) for h in hours_payload["hours"]),
        price=Money(price_payload["amount"], price_payload["currency"]),
    )


def build_instance(
    shortlist: list[Poi],
    state: PlanState,
    constraints: ConstraintSet,
) -> tuple[PlanInstance, list[str]]:
    """Assemble the solver instance from observed values only.

    Candidates whose hours or price were never observed are dropped with a
    note; travel edges come from transit observations.
    """
    notes: list[str] = []
    kept: list[Poi] = []
    for poi in shortlist:
        hours = state.resolved.get(("hours", poi.id))
        price = state.resolved.get(("price", poi.id))
        if hours is None or price is None:
            notes.append(f"dropped {poi.id}: hours/price not observed")
            continue
        kept.append(_observed_poi(poi, hours, price))
    edges = []
    for need, payload in state.resolved.items():
        if need[0] == "transit":
            edges.append((payload["from"], payload["to"], payload["minutes"]))
    kept_ids = {p.id for p in kept}
    edges = [(a, b, m) for a, b, m in edges if a in kept_ids and b in kept_ids]
    inst = PlanInstance(candidates=tuple(kept), constraints=constraints, edges=tuple(sorted(edges)))
    return inst, notes


def run_session(
    message: str,
    visual: ImageRef | None = None,
    *,
    fixtures: CityFixtures,
    config: SessionConfig | None = None,
    recognizer=None,
    reasoner=None,
) -> SessionTrace:
    """Execute one planning session: analyze, reason, tool loop, integrate.

    Deterministic for fixed (message, visual, fixtures, config): running
    twice yields bytewise-identical traces.
    """
    config = config or SessionConfig()
    spec = analyze_query(message, visual, fixtures, recognizer)
    if not spec.resolved():
        return SessionTrace(
            query_spec=spec,
            config=config,
            outcome=OUTCOME_CLARIFICATION,
            notes=("please name a destination, landmark, or constraint to plan around",),
        )

    constraints = ConstraintSet(
        day=config.day,
        day_window=config.day_window,
        budget=spec.budget,
        group_size=spec.group_size or 1,
        required_access=spec.access_needs,
    )

    landmark_poi = fixtures.store.get(spec.landmark_hint) if spec.landmark_hint else None
    city = spec.destination or (landmark_poi.city if landmark_poi else None)
    if city is None or city not in fixtures.store.by_city:
        return SessionTrace(
            query_spec=spec,
            config=config,
            outcome=OUTCOME_CLARIFICATION,
            notes=(f"no known destination in the query (got {city!r})",),
        )

    ranked = sorted(fixtures.store.by_city[city], key=lambda p: (-p.utility, p.id))
    shortlist: list[Poi] = []
    if landmark_poi is not None:
        shortlist.append(landmark_poi)
    shortlist.extend(p for p in ranked if landmark_poi is None or p.id != landmark_poi.id)
    shortlist = shortlist[: config.shortlist_size]

    ctx = QueryContext(
        query=message or "(visual query)",
        visual=visual,
        candidates=tuple(shortlist),
        constraints=constraints,
    )
    chain = (reasoner or reference_reason)(ctx)

    needs: set[Need] = set()
    if spec.landmark_hint or visual is not None:
        needs.add(("locate", "query"))
    for poi in shortlist:
        needs.add(("hours", poi.id))
        needs.add(("price", poi.id))
        if spec.quality_requested:
            needs.add(("reviews", poi.id))
    ids = sorted(p.id for p in shortlist)
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            needs.add(("transit", a, b))

    locate_args: dict = {}
    if visual is not None:
        locate_args["image_uri"] = visual.uri
    elif spec.landmark_hint:
        locate_args["text"] = fixtures.store[spec.landmark_hint].name

    state = PlanState(pending=frozenset(needs), locate_args=locate_args)
    events: list[tuple[ToolCall, ToolResponse]] = []
    while state.t < config.max_steps:
        tc = select_tool(state)
        if tc is None:
            break
        resp = toolhub.call(tc, fixtures)
        events.append((tc, resp))
        need = need_of_call(tc)
        if resp.status == STATUS_OK:
            state = update_plan(state, Observation(need=need, tool=tc.tool, payload=resp.payload, t=state.t))
        else:
            state = mark_unresolvable(state, need)

    instance, notes = build_instance(shortlist, state, constraints)
    instance_record = instance_to_record(instance)
    observations = [resp.payload for _, resp in events if resp.status == STATUS_OK]
    itinerary, summary, inst = integrate(instance_record, observations, chain, config.beam_width)
    verdicts = tuple(feasible(itinerary, inst)) if itinerary is not None else ()
    # reviews are informational; only unmet blocking needs flag the session
    blocking = {need for need in state.pending if need[0] != "reviews"}
    # a violating plan is never reported as complete (defensive: solve()
    # outputs satisfy feasible() by construction)
    outcome = OUTCOME_COMPLETE if not blocking and not verdicts else OUTCOME_INCOMPLETE
    return SessionTrace(
        query_spec=spec,
        config=config,
        outcome=outcome,
        chain=chain,
        events=tuple(events),
        instance=instance_record,
        itinerary=itinerary,
        verdicts=verdicts,
        unresolved=tuple(sorted(state.pending | state.unresolvable, key=need_sort_key)),
        notes=tuple(notes),
        summary=tuple(summary),
    )


def replay_itinerary(trace: SessionTrace) -> Itinerary | None:
    """Recompute the itinerary from (final plan state, observations, chain)
    alone — the generate-discipline check."""
    if trace.instance is None:
        return None
    locked = frozenset()
    for refinement in trace.refinements:
        locked = frozenset(refinement.get("lock", []))
    itinerary, _, _ = integrate(
        trace.instance,
        trace.observations(),
        trace.chain,
        trace.config.beam_width,
        locked=locked,
    )
    return itinerary


def refine_session(trace: SessionTrace, refinement: dict) -> SessionTrace:
    """Re-solve a completed session under updated constraints, reusing the
    recorded observations; no tool is called again.

    Refinement keys: new_budget (minor units or {"amount", "currency"}),
    lock (POI ids that must appear), exclude (POI ids to drop),
    shift_window ([start, end] minutes).
    """
    if trace.instance is None:
        raise RefineError(f"cannot refine a session with outcome {trace.outcome!r}")
    allowed = {"new_budget", "lock", "exclude", "shift_window"}
    unknown = set(refinement) - allowed
    if unknown:
        raise RefineError(f"unknown refinement keys: {sorted(unknown)}")
    lock = frozenset(refinement.get("lock", []))
    exclude = frozenset(refinement.get("exclude", []))
    both = lock & exclude
    if both:
        raise RefineError(f"cannot lock and exclude the same POI: {sorted(both)}")

    inst = instance_from_record(trace.instance)
    cons = inst.constraints
    if "new_budget" in refinement:
        raw = refinement["new_budget"]
        budget = Money(raw["amount"], raw.get("currency", "USD")) if isinstance(raw, dict) else Money(int(raw))
        cons = dataclasses.replace(cons, budget=budget)
    if "shift_window" in refinement:
        lo, hi = refinement["shift_window"]
        cons = dataclasses.replace(cons, day_window=TimeWindow(lo, hi))
    candidates = tuple(p for p in inst.candidates if p.id not in exclude)
    candidate_ids = {p.id for p in candidates}
    edges = tuple(e for e in inst.edges if e[0] in candidate_ids and e[1] in candidate_ids)
    new_inst = PlanInstance(candidates=candidates, constraints=cons, edges=edges)
    new_record = instance_to_record(new_inst)

    missing_locks = lock - candidate_ids
    if missing_locks:
        itinerary, summary = None, [f"locked POIs not available: {sorted(missing_locks)}"]
    else:
        itinerary, summary, _ = integrate(
            new_record, trace.observations(), trace.chain, trace.config.beam_width, locked=lock
        )
    if itinerary is None:
        outcome = OUTCOME_INFEASIBLE_LOCK if lock else OUTCOME_COMPLETE
    else:
        outcome = OUTCOME_COMPLETE
    verdicts = tuple(feasible(itinerary, new_inst)) if itinerary is not None else ()
    return dataclasses.replace(
        trace,
        outcome=outcome,
        instance=new_record,
        itinerary=itinerary,
        verdicts=verdicts,
        summary=tuple(summary),
        refinements=trace.refinements + (dict(sorted(refinement.items())),),
    )
