# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled worst-case enumeration kernel.

Mirrors ``_kernels_py.max_distortion_range`` exactly; see that module for the
contract.
"""

from libc.stdlib cimport calloc, free


cdef long long _search(const int[:, ::1] wf, int n_files, int q, int threshold,
                       int first_lo, int first_hi, int* best_out, int* witness) noexcept nogil:
    cdef int K = wf.shape[0]
    cdef int l = wf.shape[1]
    cdef int* counts = <int*> calloc(n_files, sizeof(int))
    cdef int* comb = <int*> calloc(q, sizeof(int))
    cdef char* placed = <char*> calloc(q, sizeof(char))
    cdef int level = 0
    cdef int distorted = 0
    cdef int best = -1
    cdef int w, k, fi, limit
    cdef long long visited = 0

    comb[0] = first_lo - 1
    placed[0] = 0
    while level >= 0:
        if placed[level]:
            w = comb[level]
            for k in range(l):
                fi = wf[w, k]
                if counts[fi] == threshold:
                    distorted -= 1
                counts[fi] -= 1
            placed[level] = 0
        comb[level] += 1
        limit = K - q + level
        if comb[level] > limit or (level == 0 and comb[0] >= first_hi):
            level -= 1
            continue
        w = comb[level]
        for k in range(l):
            fi = wf[w, k]
            counts[fi] += 1
            if counts[fi] == threshold:
                distorted += 1
        placed[level] = 1
        if level == q - 1:
            visited += 1
            if distorted > best:
                best = distorted
                for k in range(q):
                    witness[k] = comb[k]
        else:
            level += 1
            comb[level] = comb[level - 1]
            placed[level] = 0

    free(counts)
    free(comb)
    free(placed)
    best_out[0] = best
    return visited


def max_distortion_range(const int[:, ::1] worker_files, int n_files, int q, int threshold,
                         int first_lo, int first_hi):
    cdef int best = -1
    cdef long long visited
    cdef int[::1] witness
    if q < 1:
        raise ValueError("q must be >= 1")
    import numpy as np
    witness_arr = np.full(q, -1, dtype=np.intc)
    witness = witness_arr
    with nogil:
        visited = _search(worker_files, n_files, q, threshold, first_lo, first_hi,
                          &best, &witness[0])
    if best < 0:
        return -1, (), visited
    return best, tuple(int(x) for x in witness_arr), visited
