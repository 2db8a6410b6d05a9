# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Pareto ranking, crowding, exact HV and IGD+ distances.

Every function here has a numpy twin in ``_kernels_py`` with identical output.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, INFINITY

cnp.import_array()


def nd_ranks(F):
    cdef double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], m = f.shape[1]
    ranks_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] ranks = ranks_arr
    if n == 0:
        return ranks_arr
    dom_arr = np.zeros((n, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] dom = dom_arr
    cdef long long[::1] count = np.zeros(n, dtype=np.int64)
    cdef long long[::1] current = np.empty(n, dtype=np.int64)
    cdef long long[::1] nxt = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, j, k, n_cur = 0, n_next, p, q
    cdef bint i_better, j_better
    cdef long long rank = 0
    for i in range(n):
        for j in range(i + 1, n):
            i_better = False
            j_better = False
            for k in range(m):
                if f[i, k] < f[j, k]:
                    i_better = True
                elif f[j, k] < f[i, k]:
                    j_better = True
                if i_better and j_better:
                    break
            if i_better and not j_better:
                dom[i, j] = 1
                count[j] += 1
            elif j_better and not i_better:
                dom[j, i] = 1
                count[i] += 1
    for i in range(n):
        if count[i] == 0:
            current[n_cur] = i
            n_cur += 1
    while n_cur > 0:
        n_next = 0
        for p in range(n_cur):
            i = current[p]
            ranks[i] = rank
            for j in range(n):
                if dom[i, j]:
                    count[j] -= 1
                    if count[j] == 0:
                        nxt[n_next] = j
                        n_next += 1
        for q in range(n_next):
            current[q] = nxt[q]
        n_cur = n_next
        rank += 1
    return ranks_arr


def crowding(F):
    cdef double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], m = f.shape[1]
    dist_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    cdef Py_ssize_t i, k
    cdef long long[::1] order
    cdef double span
    if n <= 2:
        dist_arr[:] = np.inf
        return dist_arr
    Fa = np.asarray(f)
    for k in range(m):
        keys = [Fa[:, j] for j in range(m - 1, -1, -1)] + [Fa[:, k]]
        order = np.lexsort(keys).astype(np.int64)
        span = f[order[n - 1], k] - f[order[0], k]
        if span > 0:
            dist[order[0]] = INFINITY
            dist[order[n - 1]] = INFINITY
            for i in range(1, n - 1):
                dist[order[i]] += (f[order[i + 1], k] - f[order[i - 1], k]) / span
    return dist_arr


cdef double _hv2d_sorted(double[:, ::1] p, Py_ssize_t n, double r0, double r1) nogil:
    # rows sorted by (f1, f2) ascending, all strictly inside the reference box
    cdef double volume = 0.0, best = r1
    cdef Py_ssize_t i
    for i in range(n):
        if p[i, 1] < best:
            volume += (r0 - p[i, 0]) * (best - p[i, 1])
            best = p[i, 1]
    return volume


def hv2d(P, ref):
    P = np.asarray(P, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    P = P[np.all(P < ref, axis=1)]
    if len(P) == 0:
        return 0.0
    P = np.ascontiguousarray(P[np.lexsort((P[:, 1], P[:, 0]))])
    cdef double[:, ::1] p = P
    return float(_hv2d_sorted(p, p.shape[0], ref[0], ref[1]))


def hv3d(P, ref):
    P = np.asarray(P, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    P = P[np.all(P < ref, axis=1)]
    cdef Py_ssize_t n = len(P)
    if n == 0:
        return 0.0
    P = np.ascontiguousarray(P[np.argsort(P[:, 2], kind="stable")])
    cdef double[:, ::1] p = P
    # insertion-sorted 2D projection of the points swept so far
    cdef double[:, ::1] slab = np.empty((n, 2), dtype=np.float64)
    cdef Py_ssize_t i, s, size = 0
    cdef double depth, upper, volume = 0.0
    cdef double r0 = ref[0], r1 = ref[1], r2 = ref[2]
    for i in range(n):
        s = size
        while s > 0 and (slab[s - 1, 0] > p[i, 0] or (slab[s - 1, 0] == p[i, 0] and slab[s - 1, 1] > p[i, 1])):
            slab[s, 0] = slab[s - 1, 0]
            slab[s, 1] = slab[s - 1, 1]
            s -= 1
        slab[s, 0] = p[i, 0]
        slab[s, 1] = p[i, 1]
        size += 1
        upper = p[i + 1, 2] if i + 1 < n else r2
        depth = upper - p[i, 2]
        if depth > 0:
            volume += _hv2d_sorted(slab, size, r0, r1) * depth
    return float(volume)


def igd_plus_dists(A, Z):
    cdef double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, ::1] z = np.ascontiguousarray(Z, dtype=np.float64)
    cdef Py_ssize_t na = a.shape[0], nz = z.shape[0], m = a.shape[1]
    out_arr = np.empty(nz, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, k
    cdef double best, acc, d
    with nogil:
        for i in range(nz):
            best = INFINITY
            for j in range(na):
                acc = 0.0
                for k in range(m):
                    d = a[j, k] - z[i, k]
                    if d > 0:
                        acc += d * d
                if acc < best:
                    best = acc
            out[i] = sqrt(best)
    return out_arr
