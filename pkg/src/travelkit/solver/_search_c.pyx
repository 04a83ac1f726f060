# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled exhaustive schedule search (hot kernel).

Semantics must stay identical to _search_py.search_exhaustive; see the
parity test in tests/test_solver.py.
"""

from libc.stdint cimport int64_t

BACKEND = "c"


cdef struct Best:
    double util
    int64_t finish
    int depth

cdef int _order_less(int* a, int na, int* b, int nb) noexcept nogil:
    cdef int i, m
    m = na if na < nb else nb
    for i in range(m):
        if a[i] != b[i]:
            return 1 if a[i] < b[i] else 0
    return 1 if na < nb else 0


cdef void _dfs(
    int n,
    int64_t* dur,
    int64_t* cost,
    double* util,
    int64_t* win_lo,
    int64_t* win_hi,
    int64_t* win_off,
    int64_t* travel,
    int64_t budget,
    int64_t t0,
    int last,
    int64_t clock,
    int64_t spent,
    double acc_util,
    int depth,
    int* order,
    int64_t* starts,
    char* used,
    Best* best,
    int* best_order,
    int64_t* best_starts,
) noexcept nogil:
    cdef int i, k
    cdef int64_t arrival, lo, start
    cdef bint better = 0
    if acc_util > best.util:
        better = 1
    elif acc_util == best.util and clock < best.finish:
        better = 1
    elif acc_util == best.util and clock == best.finish and _order_less(order, depth, best_order, best.depth):
        better = 1
    if better:
        best.util = acc_util
        best.finish = clock
        best.depth = depth
        for i in range(depth):
            best_order[i] = order[i]
            best_starts[i] = starts[i]
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
        used[i] = 1
        order[depth] = i
        starts[depth] = start
        _dfs(
            n, dur, cost, util, win_lo, win_hi, win_off, travel, budget, t0,
            i, start + dur[i], spent + cost[i], acc_util + util[i], depth + 1,
            order, starts, used, best, best_order, best_starts,
        )
        used[i] = 0


def search_exhaustive(packed):
    """Best feasible visit sequence over all subsets and orderings."""
    import numpy as np

    cdef int n = packed.n
    cdef int64_t[::1] dur = np.ascontiguousarray(packed.dur, dtype=np.int64)
    cdef int64_t[::1] cost = np.ascontiguousarray(packed.cost, dtype=np.int64)
    cdef double[::1] util = np.ascontiguousarray(packed.util, dtype=np.float64)
    cdef int64_t[::1] win_lo = np.ascontiguousarray(packed.win_lo, dtype=np.int64)
    cdef int64_t[::1] win_hi = np.ascontiguousarray(packed.win_hi, dtype=np.int64)
    cdef int64_t[::1] win_off = np.ascontiguousarray(packed.win_off, dtype=np.int64)
    cdef int64_t[::1] travel = np.ascontiguousarray(packed.travel, dtype=np.int64)
    cdef int64_t budget = packed.budget
    cdef int64_t t0 = packed.t0

    if n == 0:
        return (), ()

    order_arr = np.zeros(n, dtype=np.intc)
    starts_arr = np.zeros(n, dtype=np.int64)
    used_arr = np.zeros(n, dtype=np.int8)
    best_order_arr = np.zeros(n, dtype=np.intc)
    best_starts_arr = np.zeros(n, dtype=np.int64)
    cdef int[::1] order = order_arr
    cdef int64_t[::1] starts = starts_arr
    cdef char[::1] used = used_arr
    cdef int[::1] best_order = best_order_arr
    cdef int64_t[::1] best_starts = best_starts_arr

    cdef Best best
    best.util = 0.0
    best.finish = t0
    best.depth = 0

    cdef int64_t* win_lo_p = &win_lo[0] if win_lo.shape[0] else NULL
    cdef int64_t* win_hi_p = &win_hi[0] if win_hi.shape[0] else NULL

    with nogil:
        _dfs(
            n, &dur[0], &cost[0], &util[0], win_lo_p, win_hi_p, &win_off[0],
            &travel[0], budget, t0,
            -1, t0, 0, 0.0, 0,
            &order[0], &starts[0], &used[0], &best, &best_order[0], &best_starts[0],
        )

    return (
        tuple(int(best_order[i]) for i in range(best.depth)),
        tuple(int(best_starts[i]) for i in range(best.depth)),
    )
