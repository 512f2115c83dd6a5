# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the hot loops: in-context utility sums and the
2^p tipping-subset enumeration. Must stay arithmetically identical to
the pure twin in pure.py (diagonal first, then ascending off-diagonal
adds), so both backends make bit-identical argmax decisions.
"""

from libc.stdlib cimport free, malloc

import numpy as np

BACKEND = "compiled"


def space_utilities(const double[:, :] entries, const long[:] idx):
    cdef Py_ssize_t m = idx.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[:] ov = out
    cdef Py_ssize_t j, t
    cdef long k, i
    cdef double u
    for j in range(m):
        k = idx[j]
        u = 0.0
        for t in range(m):
            i = idx[t]
            if i != k:
                u += entries[k, i]
        ov[j] = entries[k, k] + u
    return out


def best_index(const double[:, :] entries, const long[:] idx):
    cdef Py_ssize_t m = idx.shape[0]
    cdef Py_ssize_t j, t, best = 0
    cdef long k, i
    cdef double u, best_u = 0.0
    cdef bint first = True
    for j in range(m):
        k = idx[j]
        u = 0.0
        for t in range(m):
            i = idx[t]
            if i != k:
                u += entries[k, i]
        u = entries[k, k] + u
        if first or u > best_u:
            best = j
            best_u = u
            first = False
    return best


cdef inline int _popcount(unsigned int x) noexcept nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef double _utility(const double[:, :] entries, long k, long* space, int s) noexcept nogil:
    cdef double u = 0.0
    cdef int t
    for t in range(s):
        if space[t] != k:
            u += entries[k, space[t]]
    return entries[k, k] + u


cdef bint _target_wins(const double[:, :] entries, long tgt, long* space, int s) noexcept nogil:
    cdef double tu = _utility(entries, tgt, space, s)
    cdef double u
    cdef int t
    for t in range(s):
        if space[t] == tgt:
            continue
        u = _utility(entries, space[t], space, s)
        if u > tu or (u == tu and space[t] < tgt):
            return False
    return True


def minimal_tipping_masks(const double[:, :] entries, long cur, long tgt,
                          const long[:] base_idx, const long[:] pool_idx,
                          bint validate_full):
    cdef int p = <int> pool_idx.shape[0]
    cdef int nb = <int> base_idx.shape[0]
    cdef unsigned int total = (<unsigned int> 1) << p
    cdef unsigned int mask, known
    cdef int b, i, j, s
    cdef bint dominated, ok

    if p > 30:
        raise ValueError("pool too large for mask enumeration")

    # enumeration order: ascending popcount, then ascending mask value
    cdef unsigned int* order = <unsigned int*> malloc(total * sizeof(unsigned int))
    cdef int* offsets = <int*> malloc((p + 2) * sizeof(int))
    cdef long* space = <long*> malloc((nb + p) * sizeof(long))
    if order == NULL or offsets == NULL or space == NULL:
        free(order)
        free(offsets)
        free(space)
        raise MemoryError()

    minimal = []

    try:
        for i in range(p + 2):
            offsets[i] = 0
        for mask in range(total):
            offsets[_popcount(mask) + 1] += 1
        for i in range(p):
            offsets[i + 2] += offsets[i + 1]
        for j in range(<int> total):
            mask = <unsigned int> j
            b = _popcount(mask)
            order[offsets[b]] = mask
            offsets[b] += 1

        for j in range(<int> total):
            mask = order[j]

            dominated = False
            for known_obj in minimal:
                known = <unsigned int> known_obj
                if mask & known == known:
                    dominated = True
                    break
            if dominated:
                continue

            # merge base and masked pool indices, ascending
            s = 0
            b = 0
            i = 0
            while i < nb or b < p:
                if b < p and not ((mask >> b) & 1):
                    b += 1
                    continue
                if i < nb and (b >= p or base_idx[i] < pool_idx[b]):
                    space[s] = base_idx[i]
                    i += 1
                else:
                    space[s] = pool_idx[b]
                    b += 1
                s += 1

            if validate_full:
                ok = _target_wins(entries, tgt, space, s)
            else:
                ok = _utility(entries, tgt, space, s) > _utility(entries, cur, space, s)
            if ok:
                minimal.append(int(mask))

        return minimal
    finally:
        free(order)
        free(offsets)
        free(space)
