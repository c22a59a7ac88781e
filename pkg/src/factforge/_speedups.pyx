# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for walk sampling and mask selection.

Keep in exact lockstep with _kernels_py.py: same splitmix64 update, same
rejection sampling, same draw order. test_kernels compares both backends
value-for-value.
"""

from libc.stdint cimport int32_t, int64_t, uint64_t


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _next_u64(uint64_t *state) noexcept nogil:
    state[0] = state[0] + <uint64_t>0x9E3779B97F4A7C15
    return _mix64(state[0])


cdef inline double _next_float(uint64_t *state) noexcept nogil:
    return <double>(_next_u64(state) >> 11) * (1.0 / 9007199254740992.0)


cdef inline uint64_t _next_below(uint64_t *state, uint64_t n) noexcept nogil:
    # r = 2^64 mod n; reject u >= 2^64 - r (mirrors rng.Stream.next_below).
    cdef uint64_t r = (<uint64_t>0 - n) % n
    cdef uint64_t u
    while True:
        u = _next_u64(state)
        if r == 0 or u < (<uint64_t>0 - r):
            return u % n


def walk_steps(const int64_t[::1] offsets, const int32_t[::1] targets,
               long long start, long long k, unsigned long long state):
    """Walk up to ``k`` uniform out-edge hops; returns (edge indices, state)."""
    cdef uint64_t st = state
    cdef int64_t cur = start
    cdef int64_t lo, deg, j, step
    edges = []
    for step in range(k):
        lo = offsets[cur]
        deg = offsets[cur + 1] - lo
        if deg == 0:
            break
        j = lo + <int64_t>_next_below(&st, <uint64_t>deg)
        edges.append(j)
        cur = targets[j]
    return edges, st


def bernoulli_select(long long n, double p, unsigned long long state):
    """Independent selection of each index with probability p; returns (indices, state)."""
    cdef uint64_t st = state
    cdef int64_t i
    selected = []
    for i in range(n):
        if _next_float(&st) < p:
            selected.append(i)
    return selected, st
