"""Compiled breadth-first-search kernels over CSR graphs.

Every kernel handles a contiguous range of source nodes and returns the
integer sum of shortest-path distances together with the number of
(source, target) pairs reached, self pairs included. Callers combine the
partial sums of disjoint ranges.
"""

import numpy as np
from numba import njit

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_FOUR = np.uint64(4)
_S56 = np.uint64(56)


@njit(cache=True, nogil=True)
def _popcount(x):
    x = x - ((x >> _ONE) & _M1)
    x = (x & _M2) + ((x >> _TWO) & _M2)
    x = (x + (x >> _FOUR)) & _M4
    return np.int64((x * _H01) >> _S56)


@njit(cache=True, nogil=True)
def bfs_distance_sum(indptr, indices, lo, hi):
    """One BFS per source in ``[lo, hi)`` with a flat queue."""
    n = indptr.shape[0] - 1
    dist = np.empty(n, dtype=np.int32)
    mark = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    total = np.int64(0)
    reached = np.int64(0)
    for s in range(lo, hi):
        mark[s] = s
        dist[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[u] + 1
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if mark[v] != s:
                    mark[v] = s
                    dist[v] = du
                    total += du
                    queue[tail] = v
                    tail += 1
        reached += tail
    return total, reached


@njit(cache=True, nogil=True)
def bitset_distance_sum(indptr, indices, lo, hi):
    """Level-synchronous BFS from all sources in ``[lo, hi)`` at once.

    Node ``v`` keeps a bitset of the sources that have reached it; one
    level costs a pass over the edges with ``ceil((hi-lo)/64)`` words each.
    """
    n = indptr.shape[0] - 1
    m = hi - lo
    words = (m + 63) // 64
    visited = np.zeros((n, words), dtype=np.uint64)
    frontier = np.zeros((n, words), dtype=np.uint64)
    nxt = np.zeros((n, words), dtype=np.uint64)
    for b in range(m):
        bit = _ONE << np.uint64(b & 63)
        visited[lo + b, b >> 6] |= bit
        frontier[lo + b, b >> 6] |= bit
    active = np.zeros(n, dtype=np.bool_)
    for b in range(m):
        active[lo + b] = True
    next_active = np.zeros(n, dtype=np.bool_)
    total = np.int64(0)
    reached = np.int64(m)
    level = 0
    while True:
        level += 1
        found = np.int64(0)
        for v in range(n):
            any_in = False
            for e in range(indptr[v], indptr[v + 1]):
                u = indices[e]
                if active[u]:
                    if not any_in:
                        for w in range(words):
                            nxt[v, w] = frontier[u, w]
                        any_in = True
                    else:
                        for w in range(words):
                            nxt[v, w] |= frontier[u, w]
            next_active[v] = False
            if any_in:
                cnt = np.int64(0)
                for w in range(words):
                    x = nxt[v, w] & ~visited[v, w]
                    nxt[v, w] = x
                    visited[v, w] |= x
                    cnt += _popcount(x)
                if cnt > 0:
                    next_active[v] = True
                    found += cnt
        if found == 0:
            break
        total += level * found
        reached += found
        frontier, nxt = nxt, frontier
        active, next_active = next_active, active
    return total, reached


@njit(cache=True, nogil=True)
def eccentricity(indptr, indices, source):
    """Largest BFS distance from ``source`` and the number of nodes reached."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int32)
    queue = np.empty(n, dtype=np.int32)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    ecc = 0
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                if dist[v] > ecc:
                    ecc = dist[v]
                queue[tail] = v
                tail += 1
    return ecc, tail
