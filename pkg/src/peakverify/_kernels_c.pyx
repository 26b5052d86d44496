# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Must stay output-identical to ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF MAX_M = 64
DEF MAX_N = 16


def median_positions(const cnp.int64_t[:, ::1] peaks, const cnp.int64_t[::1] counts):
    cdef Py_ssize_t P = peaks.shape[0]
    cdef Py_ssize_t n = peaks.shape[1]
    cdef Py_ssize_t m = counts.shape[0]
    cdef Py_ssize_t row, i, t
    cdef cnp.int64_t hist[MAX_M]
    cdef cnp.int64_t acc
    if m > MAX_M:
        raise ValueError("too many alternatives for the compiled kernel")
    out = np.empty(P, dtype=np.int8)
    cdef signed char[::1] o = out
    with nogil:
        for row in range(P):
            for t in range(m):
                hist[t] = counts[t]
            for i in range(n):
                hist[peaks[row, i]] += 1
            acc = 0
            for t in range(m):
                acc += hist[t]
                if acc >= n:
                    break
            o[row] = <signed char>t
    return out


def nash_mask(const signed char[::1] g, Py_ssize_t k, list cands,
              const cnp.int64_t[:, ::1] score, const cnp.int64_t[:, ::1] bonus):
    cdef Py_ssize_t n = len(cands)
    cdef Py_ssize_t i, j, d, total, idx, flat, base, own
    cdef Py_ssize_t stride[MAX_N]
    cdef Py_ssize_t sizes[MAX_N]
    cdef Py_ssize_t digit[MAX_N]
    cdef cnp.int64_t u_cur, u
    cdef bint ok
    if n > MAX_N:
        raise ValueError("too many agents for the compiled kernel")
    arrays = [np.ascontiguousarray(c, dtype=np.int64) for c in cands]
    cdef cnp.int64_t[:, ::1] cmat
    width = max(len(a) for a in arrays)
    cm = np.zeros((n, width), dtype=np.int64)
    total = 1
    for i in range(n):
        sizes[i] = len(arrays[i])
        cm[i, :sizes[i]] = arrays[i]
        total *= sizes[i]
    cmat = cm
    stride[n - 1] = 1
    for i in range(n - 2, -1, -1):
        stride[i] = stride[i + 1] * k
    out = np.zeros(total, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    with nogil:
        for i in range(n):
            digit[i] = 0
        for idx in range(total):
            flat = 0
            for i in range(n):
                flat += cmat[i, digit[i]] * stride[i]
            ok = True
            for i in range(n):
                own = cmat[i, digit[i]]
                u_cur = score[i, g[flat]] + bonus[i, own]
                base = flat - own * stride[i]
                for d in range(k):
                    u = score[i, g[base + d * stride[i]]] + bonus[i, d]
                    if u > u_cur:
                        ok = False
                        break
                if not ok:
                    break
            o[idx] = ok
            j = n - 1
            while j >= 0:
                digit[j] += 1
                if digit[j] < sizes[j]:
                    break
                digit[j] = 0
                j -= 1
    return out
