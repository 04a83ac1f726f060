"""Array packing shared by the search kernels.

Candidates are sorted by id, so kernel index order is id-lexicographic and
index-sequence tie-breaks coincide with id-sequence tie-breaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNBOUNDED_BUDGET = 1 << 62


@dataclass(frozen=True)
class PackedInstance:
    ids: tuple[str, ...]
    dur: np.ndarray       # int64[n] visit duration, minutes
    cost: np.ndarray      # int64[n] price * group_size, minor units
    util: np.ndarray      # float64[n]
    win_lo: np.ndarray    # int64[sum windows] effective window starts
    win_hi: np.ndarray    # int64[sum windows] effective window ends
    win_off: np.ndarray   # int64[n+1] per-candidate offsets into win_lo/win_hi
    travel: np.ndarray    # int64[n*n] minutes, row-major
    budget: int
    t0: int               # day window start

    @property
    def n(self) -> int:
        return len(self.ids)


def pack_instance(instance) -> PackedInstance:
    """Flatten a PlanInstance into contiguous arrays for the kernels.

    Candidates missing required accessibility flags are excluded; windows are
    intersected with the day window and dropped when too short for the visit.
    """
    cons = instance.constraints
    pois = sorted(
        (p for p in instance.candidates if cons.required_access <= p.accessibility),
        key=lambda p: p.id,
    )
    n = len(pois)
    dur = np.zeros(n, dtype=np.int64)
    cost = np.zeros(n, dtype=np.int64)
    util = np.zeros(n, dtype=np.float64)
    win_lo: list[int] = []
    win_hi: list[int] = []
    win_off = np.zeros(n + 1, dtype=np.int64)
    day_lo, day_hi = cons.day_window.start, cons.day_window.end
    for i, poi in enumerate(pois):
        dur[i] = poi.visit_duration
        cost[i] = poi.price.amount * cons.group_size
        util[i] = poi.utility
        for w in poi.hours_on(cons.day):
            lo = max(w.start, day_lo)
            hi = min(w.end, day_hi)
            if hi - lo >= poi.visit_duration:
                win_lo.append(lo)
                win_hi.append(hi)
        win_off[i + 1] = len(win_lo)
    travel = np.zeros(n * n, dtype=np.int64)
    for i, a in enumerate(pois):
        for j, b in enumerate(pois):
            if i != j:
                travel[i * n + j] = instance.travel_time(a.id, b.id)
    budget = cons.budget.amount if cons.budget is not None else UNBOUNDED_BUDGET
    return PackedInstance(
        ids=tuple(p.id for p in pois),
        dur=dur,
        cost=cost,
        util=util,
        win_lo=np.asarray(win_lo, dtype=np.int64),
        win_hi=np.asarray(win_hi, dtype=np.int64),
        win_off=win_off,
        travel=travel,
        budget=budget,
        t0=day_lo,
    )
