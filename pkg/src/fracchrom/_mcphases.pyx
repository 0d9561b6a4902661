# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernel.

Bit-for-bit identical to the pure-python fallback in ``_mcphases_py``:
same stream seeding, same bit-consumption order, same counts.  Supports
up to 64 vertices (masks live in one machine word); the trial loop runs
without the GIL so chunked calls from multiple threads scale.
"""

from libc.stdint cimport uint64_t, int64_t

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9
cdef uint64_t _MIX2 = 0x94D049BB133111EB


def backend_name():
    return "compiled"


cdef inline uint64_t _next(uint64_t *state) nogil:
    cdef uint64_t z
    state[0] = state[0] + _GAMMA
    z = state[0]
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline int _ctz(uint64_t x) nogil:
    cdef int c = 0
    while not (x & 1):
        x >>= 1
        c += 1
    return c


cdef inline uint64_t _select(int ncyc, int *cs, int *cv, uint64_t mask,
                             uint64_t *state) nogil:
    cdef uint64_t selected = 0
    cdef int c, lo, hi, length, i, p, q, run_len, start, j, k, idx
    cdef bint all_in, any_in
    for c in range(ncyc):
        lo = cs[c]
        hi = cs[c + 1]
        length = hi - lo
        all_in = True
        any_in = False
        for i in range(lo, hi):
            if (mask >> cv[i]) & 1:
                any_in = True
            else:
                all_in = False
        if not any_in:
            continue
        if all_in:
            if length % 2 == 0:
                start = 0 if (_next(state) >> 63) else 1
                j = start
                while j < length:
                    selected |= (<uint64_t>1) << cv[lo + j]
                    j += 2
            else:
                k = 0
                i = length
                while i:
                    k += 1
                    i >>= 1
                while True:
                    idx = <int>(_next(state) >> (64 - k))
                    if idx < length:
                        break
                for j in range((length - 1) // 2):
                    selected |= (<uint64_t>1) << cv[lo + (idx + 2 * j) % length]
            continue
        for p in range(length):
            if not (mask >> cv[lo + p]) & 1:
                continue
            if (mask >> cv[lo + (p - 1 + length) % length]) & 1:
                continue
            run_len = 1
            q = (p + 1) % length
            while (mask >> cv[lo + q]) & 1:
                run_len += 1
                q = (q + 1) % length
            # canonical branch starts at the endpoint with smaller position
            if run_len % 2 == 1 or p < (p + run_len - 1) % length:
                start = 0 if (_next(state) >> 63) else 1
            else:
                start = 1 if (_next(state) >> 63) else 0
            j = start
            while j < run_len:
                selected |= (<uint64_t>1) << cv[lo + (p + j) % length]
                j += 2
    return selected


cdef inline int _one_trial(int n, int m, int *ea, int *eb, int ncyc, int *cs,
                           int *cv, uint64_t *am, bint recompute,
                           uint64_t state0, int64_t *cnt) nogil:
    cdef uint64_t state = state0
    cdef uint64_t active = 0
    cdef uint64_t covered, feasible, pool, rest, feas2, all_mask
    cdef int e, v
    if n == 64:
        all_mask = ~(<uint64_t>0)
    else:
        all_mask = ((<uint64_t>1) << n) - 1
    for e in range(m):
        if _next(&state) >> 63:
            active |= (<uint64_t>1) << eb[e]
        else:
            active |= (<uint64_t>1) << ea[e]
    covered = _select(ncyc, cs, cv, active, &state)
    rest = active
    while rest:
        v = _ctz(rest)
        rest &= rest - 1
        if not (am[v] & active):
            covered |= (<uint64_t>1) << v
    feasible = 0
    rest = all_mask & ~covered
    while rest:
        v = _ctz(rest)
        rest &= rest - 1
        if not (am[v] & covered):
            feasible |= (<uint64_t>1) << v
    covered |= _select(ncyc, cs, cv, feasible, &state)
    if recompute:
        feas2 = 0
        rest = all_mask & ~covered
        while rest:
            v = _ctz(rest)
            rest &= rest - 1
            if not (am[v] & covered):
                feas2 |= (<uint64_t>1) << v
        pool = feas2
    else:
        pool = feasible
    rest = pool
    while rest:
        v = _ctz(rest)
        rest &= rest - 1
        if not (am[v] & pool):
            covered |= (<uint64_t>1) << v
    cdef int bad = 0
    rest = covered
    while rest:
        v = _ctz(rest)
        rest &= rest - 1
        cnt[v] += 1
        if am[v] & covered:
            bad = 1
    return bad


def run_trials(int n, edges_a, edges_b, cycle_starts, cycle_verts, adj_mask,
               long long trials, unsigned long long seed,
               long long first_trial, bint phase4_recompute):
    """Run trials ``first_trial .. first_trial + trials - 1``; returns
    (per-vertex hit counts, number of non-independent outputs).  Seeding
    matches the pure-python kernel."""
    cdef int m = len(edges_a)
    cdef int ncyc = len(cycle_starts) - 1
    cdef int nv = len(cycle_verts)
    cdef int ea[64]
    cdef int eb[64]
    cdef int cs[65]
    cdef int cv[64]
    cdef uint64_t am[64]
    cdef int64_t cnt[64]
    cdef int i
    cdef long long t, violations = 0
    cdef uint64_t state0
    if not (0 < n <= 64 and 0 < m <= 64 and 0 < ncyc <= 64 and nv <= 64):
        raise ValueError("kernel supports at most 64 vertices")
    for i in range(m):
        ea[i] = edges_a[i]
        eb[i] = edges_b[i]
    for i in range(ncyc + 1):
        cs[i] = cycle_starts[i]
    for i in range(nv):
        cv[i] = cycle_verts[i]
    for i in range(n):
        am[i] = adj_mask[i]
        cnt[i] = 0
    with nogil:
        for t in range(first_trial, first_trial + trials):
            state0 = seed + (<uint64_t>(t + 1)) * _GAMMA
            violations += _one_trial(n, m, ea, eb, ncyc, cs, cv, am,
                                     phase4_recompute, state0, cnt)
    return [cnt[i] for i in range(n)], violations
