"""Structured travel reasoning: chain validation, a deterministic reference
reasoner, chain-similarity scoring, and joint-loss bookkeeping.

A chain decomposes a query into three ordered step lists: spatial (route
order and distances), temporal (opening-hours feasibility), and practical
(budget accumulation and accessibility). The final answer stage elsewhere
always consumes (context, chain), never the context alone.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .mcq import tokens
from .model import (
    ConstraintSet,
    CoTChain,
    ImageRef,
    Poi,
    ReasoningStep,
    TimeWindow,
    window_overlap,
)
from .solver.planner import haversine_km


class CotError(ValueError):
    """Reasoning requested over an unusable context."""


@dataclass(frozen=True)
class QueryContext:
    """Multimodal query plus the candidate POIs and constraints it runs over.

    Candidate order matters: the first candidate anchors the spatial route.
    """

    query: str = ""
    visual: ImageRef | None = None
    candidates: tuple[Poi, ...] = ()
    constraints: ConstraintSet = ConstraintSet()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.query and self.visual is None:
            raise CotError("context needs a query, a visual input, or both")


def minutes_hhmm(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def _first_feasible_window(poi: Poi, constraints: ConstraintSet) -> TimeWindow | None:
    for w in poi.hours_on(constraints.day):
        o = window_overlap(w, constraints.day_window)
        if o is not None and o.length >= poi.visit_duration:
            return o
    return None


def reference_reason(ctx: QueryContext) -> CoTChain:
    """Deterministic stand-in for a learned reasoner.

    Spatial: nearest-neighbor route from the first (anchor) candidate by
    great-circle distance. Temporal: per-candidate opening-hours feasibility
    against the day window, conflicts flagged. Practical: running budget
    accumulation plus accessibility checks, in route order.
    """
    if not ctx.candidates:
        raise CotError("empty candidate set")
    cons = ctx.constraints

    remaining = list(ctx.candidates[1:])
    route = [ctx.candidates[0]]
    spatial = [
        ReasoningStep(
            text=f"start at {route[0].name}",
            refs=(route[0].id,),
            data={"km": 0.0},
        )
    ]
    while remaining:
        prev = route[-1]
        nxt = min(remaining, key=lambda p: (haversine_km(prev.location, p.location), p.id))
        km = round(haversine_km(prev.location, nxt.location), 3)
        spatial.append(
            ReasoningStep(
                text=f"go from {prev.name} to {nxt.name} ({km} km)",
                refs=(prev.id, nxt.id),
                data={"km": km},
            )
        )
        remaining.remove(nxt)
        route.append(nxt)

    temporal = []
    for poi in route:
        window = _first_feasible_window(poi, cons)
        if window is None:
            temporal.append(
                ReasoningStep(
                    text=f"{poi.name}: no feasible opening within the day window (conflict)",
                    refs=(poi.id,),
                )
            )
        else:
            temporal.append(
                ReasoningStep(
                    text=(
                        f"{poi.name}: open {minutes_hhmm(window.start)}-{minutes_hhmm(window.end)}"
                        f" within the day window"
                    ),
                    refs=(poi.id,),
                    data={"window": [window.start, window.end]},
                )
            )

    practical = []
    items: list[int] = []
    for poi in route:
        cost = poi.price.amount * cons.group_size
        items.append(cost)
        total = sum(items)
        notes = []
        if cons.budget is not None and total > cons.budget.amount:
            notes.append("over budget")
        missing = sorted(cons.required_access - poi.accessibility)
        if missing:
            notes.append(f"missing access: {', '.join(missing)}")
        suffix = f" ({'; '.join(notes)})" if notes else ""
        practical.append(
            ReasoningStep(
                text=f"{poi.name}: cost {cost} brings the running total to {total}{suffix}",
                refs=(poi.id,),
                data={"items": list(items), "total": total},
            )
        )

    return CoTChain(spatial=tuple(spatial), temporal=tuple(temporal), practical=tuple(practical))


def validate_chain(chain: CoTChain, ctx: QueryContext) -> list[str]:
    """Every violation of the chain against its context; empty when valid."""
    out: list[str] = []
    known = {p.id: p for p in ctx.candidates}
    cons = ctx.constraints
    for name, steps in chain.components().items():
        if not steps:
            out.append(f"missing r_{name[0]}: {name} component is empty")
        for idx, step in enumerate(steps):
            for ref in step.refs:
                if ref not in known:
                    out.append(f"{name}[{idx}]: unresolved entity {ref!r}")
            if name == "temporal" and step.data and "window" in step.data:
                lo, hi = step.data["window"]
                pois = [known[r] for r in step.refs if r in known]
                consistent = any(
                    max(w.start, cons.day_window.start) <= lo and hi <= min(w.end, cons.day_window.end)
                    for poi in pois
                    for w in poi.hours_on(cons.day)
                )
                if not consistent:
                    out.append(
                        f"{name}[{idx}]: window [{lo}, {hi}] inconsistent with POI hours ∩ day window"
                    )
            if name == "practical" and step.data and "items" in step.data and "total" in step.data:
                stated = step.data["total"]
                recomputed = sum(step.data["items"])
                if stated != recomputed:
                    out.append(
                        f"{name}[{idx}]: arithmetic mismatch: stated total {stated}, items sum to {recomputed}"
                    )
    return out


def _token_f1(a: str, b: str) -> float:
    ta, tb = Counter(tokens(a)), Counter(tokens(b))
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    common = sum((ta & tb).values())
    if common == 0:
        return 0.0
    return 2.0 * common / (sum(ta.values()) + sum(tb.values()))


def _align(a_steps, b_steps) -> float:
    """Greedy best-match alignment of a onto b, penalized by displacement."""
    size = max(len(a_steps), len(b_steps))
    taken: set[int] = set()
    total = 0.0
    for i, a in enumerate(a_steps):
        best_j, best_f = -1, 0.0
        for j, b in enumerate(b_steps):
            if j in taken:
                continue
            f = _token_f1(a.text, b.text)
            if f > best_f:
                best_f, best_j = f, j
        if best_j < 0:
            continue
        taken.add(best_j)
        total += best_f * (1.0 - abs(i - best_j) / size)
    return total / size


def chain_similarity(gold: CoTChain, pred: CoTChain) -> float:
    """Similarity in [0, 1]: mean over components of symmetric greedy
    step alignment with token-F1 scores and an order displacement penalty.

    Equals 1.0 exactly when the chains are component-wise identical at the
    normalized-token level (same step count, token-equivalent steps in the
    same order); 0.0 for disjoint vocabulary.
    """
    parts = []
    for name in ("spatial", "temporal", "practical"):
        a = getattr(gold, name)
        b = getattr(pred, name)
        if not a and not b:
            parts.append(1.0)
        elif not a or not b:
            parts.append(0.0)
        else:
            parts.append((_align(a, b) + _align(b, a)) / 2.0)
    return sum(parts) / len(parts)


@dataclass(frozen=True)
class LossBreakdown:
    l_cot: float
    l_ans: float
    cot_weight: float  # the chain-loss multiplier (lambda)
    total: float


def combined_loss(l_cot: float, l_ans: float, cot_weight: float = 1.0) -> LossBreakdown:
    """Joint objective bookkeeping: total = cot_weight * l_cot + l_ans."""
    if l_cot < 0 or l_ans < 0:
        raise ValueError(f"component losses must be non-negative: ({l_cot}, {l_ans})")
    if cot_weight < 0:
        raise ValueError(f"cot_weight must be non-negative: {cot_weight}")
    return LossBreakdown(
        l_cot=l_cot,
        l_ans=l_ans,
        cot_weight=cot_weight,
        total=cot_weight * l_cot + l_ans,
    )
