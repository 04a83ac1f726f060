"""Pure-Python exhaustive schedule search (fallback kernel).

Must stay semantically identical to _search_c.pyx: same visit extension
rule, same (utility desc, finish asc, index-sequence asc) comparator, same
earliest-feasible-start scheduling. The parity test in tests/test_solver.py
cross-checks the two on randomized instances.
"""

from __future__ import annotations

BACKEND = "python"


def search_exhaustive(packed):
    """Best feasible visit sequence over all subsets and orderings.

    Returns (order, starts): parallel tuples of candidate indices and visit
    start times. The empty schedule is always a candidate, so a result is
    always returned.
    """
    n = packed.n
    dur = packed.dur.tolist()
    cost = packed.cost.tolist()
    util = packed.util.tolist()
    win_lo = packed.win_lo.tolist()
    win_hi = packed.win_hi.tolist()
    win_off = packed.win_off.tolist()
    travel = packed.travel.tolist()
    budget = packed.budget
    t0 = packed.t0

    best_util = 0.0
    best_finish = t0
    best_order: tuple[int, ...] = ()
    best_starts: tuple[int, ...] = ()

    order: list[int] = []
    starts: list[int] = []
    used = [False] * n

    def dfs(last: int, clock: int, spent: int, acc_util: float) -> None:
        nonlocal best_util, best_finish, best_order, best_starts
        if (
            acc_util > best_util
            or (acc_util == best_util and clock < best_finish)
            or (acc_util == best_util and clock == best_finish and tuple(order) < best_order)
        ):
            best_util = acc_util
            best_finish = clock
            best_order = tuple(order)
            best_starts = tuple(starts)
        for i in range(n):
            if used[i]:
                continue
            if spent + cost[i] > budget:
                continue
            arrival = t0 if last < 0 else clock + travel[last * n + i]
            start = -1
            for k in range(win_off[i], win_off[i + 1]):
                lo = win_lo[k] if win_lo[k] > arrival else arrival
                if lo + dur[i] <= win_hi[k]:
                    start = lo
                    break
            if start < 0:
                continue
            used[i] = True
            order.append(i)
            starts.append(start)
            dfs(i, start + dur[i], spent + cost[i], acc_util + util[i])
            used[i] = False
            order.pop()
            starts.pop()

    dfs(-1, t0, 0, 0.0)
    return best_order, best_starts
