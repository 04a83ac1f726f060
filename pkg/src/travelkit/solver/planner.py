"""Itinerary optimization: select and order visits under hours, travel-time,
budget, and accessibility constraints, maximizing total utility.

Two search routes exist on purpose: `solve` (beam search, the production
path) and `brute_force` (exhaustive oracle, n <= 8). Scheduling within a
fixed visit order is always earliest-feasible-start, which is optimal here
because utility does not depend on start times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..model import (
    ConstraintSet,
    GeoPoint,
    Money,
    Poi,
    TimeWindow,
    TIME_GRID_MINUTES,
    money_from_record,
    money_to_record,
    poi_from_record,
    poi_to_record,
)
from ._packing import PackedInstance, pack_instance
from . import kernel

WALK_SPEED_KMH = 4.5
EARTH_RADIUS_KM = 6371.0

DEFAULT_BEAM_WIDTH = 8


class PlanError(ValueError):
    """Bad planning input (unknown POI, duplicate ids, oversized oracle call)."""


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance. Arguments are canonically ordered first so the
    result is bitwise symmetric."""
    p, q = sorted([(a.lat, a.lon), (b.lat, b.lon)])
    lat1, lon1, lat2, lon2 = map(math.radians, (*p, *q))
    s = (
        math.sin((lat2 - lat1) / 2) ** 2
        + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    )
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(s))


def default_travel_time(a: Poi, b: Poi) -> int:
    """Walking-time estimate in minutes, rounded up to the 5-minute grid."""
    if a.id == b.id:
        return 0
    minutes = haversine_km(a.location, b.location) / WALK_SPEED_KMH * 60.0
    return int(math.ceil(minutes / TIME_GRID_MINUTES)) * TIME_GRID_MINUTES


@dataclass(frozen=True)
class PlanInstance:
    """One day of planning: candidates, pairwise travel times, constraints."""

    candidates: tuple[Poi, ...]
    constraints: ConstraintSet = ConstraintSet()
    edges: tuple[tuple[str, str, int], ...] = ()  # explicit travel-time overrides

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        ids = [p.id for p in self.candidates]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise PlanError(f"duplicate candidate ids: {dupes}")
        table = {}
        for a, b, minutes in self.edges:
            if minutes < 0:
                raise PlanError(f"negative travel time on edge {a}->{b}")
            table[(a, b)] = int(minutes)
            table.setdefault((b, a), int(minutes))
        object.__setattr__(self, "edges", tuple(sorted((a, b, m) for (a, b), m in table.items())))
        object.__setattr__(self, "_edge_table", table)
        object.__setattr__(self, "_by_id", {p.id: p for p in self.candidates})

    def poi(self, poi_id: str) -> Poi:
        try:
            return self._by_id[poi_id]
        except KeyError:
            raise PlanError(f"unknown POI {poi_id!r}") from None

    def travel_time(self, a_id: str, b_id: str) -> int:
        if a_id == b_id:
            return 0
        hit = self._edge_table.get((a_id, b_id))
        if hit is not None:
            return hit
        return default_travel_time(self.poi(a_id), self.poi(b_id))


@dataclass(frozen=True)
class Visit:
    poi_id: str
    start: int
    end: int


@dataclass(frozen=True)
class Itinerary:
    visits: tuple[Visit, ...]
    total_cost: Money
    total_utility: float

    def poi_ids(self) -> tuple[str, ...]:
        return tuple(v.poi_id for v in self.visits)


def itinerary_to_record(it: Itinerary) -> dict:
    return {
        "visits": [[v.poi_id, v.start, v.end] for v in it.visits],
        "total_cost": money_to_record(it.total_cost),
        "total_utility": it.total_utility,
    }


def itinerary_from_record(r: dict) -> Itinerary:
    return Itinerary(
        visits=tuple(Visit(v[0], v[1], v[2]) for v in r["visits"]),
        total_cost=money_from_record(r["total_cost"]),
        total_utility=r["total_utility"],
    )


def instance_to_record(inst: PlanInstance) -> dict:
    cons = inst.constraints
    return {
        "candidates": [poi_to_record(p) for p in inst.candidates],
        "edges": [[a, b, m] for a, b, m in inst.edges],
        "day": cons.day,
        "day_window": [cons.day_window.start, cons.day_window.end],
        "budget": money_to_record(cons.budget) if cons.budget is not None else None,
        "group_size": cons.group_size,
        "required_access": sorted(cons.required_access),
    }


def instance_from_record(r: dict) -> PlanInstance:
    return PlanInstance(
        candidates=tuple(poi_from_record(p) for p in r["candidates"]),
        constraints=ConstraintSet(
            day=r.get("day", 0),
            day_window=TimeWindow(*r.get("day_window", (540, 1260))),
            budget=money_from_record(r["budget"]) if r.get("budget") else None,
            group_size=r.get("group_size", 1),
            required_access=frozenset(r.get("required_access", [])),
        ),
        edges=tuple((e[0], e[1], e[2]) for e in r.get("edges", [])),
    )


def feasible(it: Itinerary, inst: PlanInstance) -> list[str]:
    """All constraint violations of the itinerary; empty when compliant.

    Raises PlanError for visits referencing POIs outside the instance.
    """
    cons = inst.constraints
    out: list[str] = []
    seen: set[str] = set()
    prev: Visit | None = None
    total = 0
    for v in it.visits:
        poi = inst.poi(v.poi_id)  # raises on unknown id
        if v.poi_id in seen:
            out.append(f"duplicate visit: {v.poi_id}")
        seen.add(v.poi_id)
        if v.end - v.start != poi.visit_duration:
            out.append(
                f"{v.poi_id}: scheduled length {v.end - v.start} != visit_duration {poi.visit_duration}"
            )
        visit_win = TimeWindow(v.start, v.end) if v.start <= v.end else None
        if visit_win is None:
            out.append(f"{v.poi_id}: inverted visit times")
        else:
            day_win = cons.day_window
            in_hours = any(
                max(w.start, day_win.start) <= v.start and v.end <= min(w.end, day_win.end)
                for w in poi.hours_on(cons.day)
            )
            if not in_hours:
                out.append(f"{v.poi_id}: hours: visit [{v.start}, {v.end}] outside open hours ∩ day window")
        if prev is not None:
            if v.start < prev.end:
                out.append(f"{v.poi_id}: overlaps previous visit")
            gap = v.start - prev.end
            need = inst.travel_time(prev.poi_id, v.poi_id)
            if gap < need:
                out.append(
                    f"travel time: {prev.poi_id}->{v.poi_id} needs {need} min, scheduled gap {gap}"
                )
        if not cons.required_access <= poi.accessibility:
            missing = sorted(cons.required_access - poi.accessibility)
            out.append(f"{v.poi_id}: accessibility: missing {missing}")
        total += poi.price.amount * cons.group_size
        prev = v
    if cons.budget is not None and total > cons.budget.amount:
        out.append(f"budget: total cost {total} exceeds budget {cons.budget.amount}")
    return out


def _currency(inst: PlanInstance) -> str:
    if inst.constraints.budget is not None:
        return inst.constraints.budget.currency
    if inst.candidates:
        return inst.candidates[0].price.currency
    return "USD"


def _build_itinerary(inst: PlanInstance, packed: PackedInstance, order, starts) -> Itinerary:
    cons = inst.constraints
    visits = []
    total = 0
    utility = 0.0
    for idx, start in zip(order, starts):
        poi = inst.poi(packed.ids[idx])
        visits.append(Visit(poi.id, int(start), int(start) + poi.visit_duration))
        total += poi.price.amount * cons.group_size
        utility += poi.utility
    return Itinerary(
        visits=tuple(visits),
        total_cost=Money(total, _currency(inst)),
        total_utility=utility,
    )


def brute_force(inst: PlanInstance) -> Itinerary:
    """Exhaustive oracle over all subsets and orderings. Refuses n > 8."""
    packed = pack_instance(inst)
    if packed.n > 8:
        raise PlanError(f"brute_force limited to 8 candidates, got {packed.n}")
    order, starts = kernel.search_exhaustive(packed)
    return _build_itinerary(inst, packed, order, starts)


def _earliest_start(packed: PackedInstance, win_lo, win_hi, win_off, i: int, arrival: int) -> int:
    for k in range(win_off[i], win_off[i + 1]):
        lo = win_lo[k] if win_lo[k] > arrival else arrival
        if lo + packed.dur[i] <= win_hi[k]:
            return lo
    return -1


def solve(
    inst: PlanInstance,
    beam_width: int | None = DEFAULT_BEAM_WIDTH,
    seed: int = 0,
    locked: frozenset[str] | set[str] = frozenset(),
) -> Itinerary | None:
    """Beam search over partial schedules; `beam_width=None` is unbounded.

    `seed` is accepted for interface symmetry with the randomized commands;
    the search itself is deterministic. With `locked` non-empty the best
    state covering every locked POI is returned, or None when no reachable
    state covers them (the infeasible-lock outcome).
    """
    del seed
    packed = pack_instance(inst)
    n = packed.n
    dur = packed.dur.tolist()
    cost = packed.cost.tolist()
    util = packed.util.tolist()
    win_lo = packed.win_lo.tolist()
    win_hi = packed.win_hi.tolist()
    win_off = packed.win_off.tolist()
    travel = packed.travel.tolist()
    id_to_idx = {pid: i for i, pid in enumerate(packed.ids)}
    locked_mask = 0
    for pid in locked:
        if pid not in id_to_idx:
            return None  # locked POI filtered out (e.g. accessibility) or unknown here
        locked_mask |= 1 << id_to_idx[pid]

    # state: (order, starts, mask, last, clock, spent, acc_util)
    start_state = ((), (), 0, -1, packed.t0, 0, 0.0)
    best = None

    def consider(state):
        nonlocal best
        order, _starts, mask, _last, clock, _spent, acc = state
        if mask & locked_mask != locked_mask:
            return
        if best is None:
            best = state
            return
        b_order, _, _, _, b_clock, _, b_acc = best
        if (
            acc > b_acc
            or (acc == b_acc and clock < b_clock)
            or (acc == b_acc and clock == b_clock and order < b_order)
        ):
            best = state

    consider(start_state)
    beam = [start_state]
    while beam:
        expanded = []
        for order, starts, mask, last, clock, spent, acc in beam:
            for i in range(n):
                if mask >> i & 1:
                    continue
                if spent + cost[i] > packed.budget:
                    continue
                arrival = packed.t0 if last < 0 else clock + travel[last * n + i]
                start = -1
                for k in range(win_off[i], win_off[i + 1]):
                    lo = win_lo[k] if win_lo[k] > arrival else arrival
                    if lo + dur[i] <= win_hi[k]:
                        start = lo
                        break
                if start < 0:
                    continue
                state = (
                    order + (i,),
                    starts + (start,),
                    mask | (1 << i),
                    i,
                    start + dur[i],
                    spent + cost[i],
                    acc + util[i],
                )
                consider(state)
                expanded.append(state)
        if not expanded:
            break
        expanded.sort(key=lambda s: (-s[6], s[4], s[0]))
        beam = expanded if beam_width is None else expanded[:beam_width]

    if best is None:
        return None
    return _build_itinerary(inst, packed, best[0], best[1])
