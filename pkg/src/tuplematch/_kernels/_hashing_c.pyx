# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled n-gram hashing kernel; bit-identical to hashing_py."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef unsigned long long _FNV_OFFSET = 0xCBF29CE484222325ULL
cdef unsigned long long _FNV_PRIME = 0x100000001B3ULL
cdef unsigned long long _SIGN_BIT = 0x8000000000000000ULL


cdef void _accumulate(double[::1] counts, const unsigned char[::1] buf,
                      Py_ssize_t n_chars, Py_ssize_t dim,
                      Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t n, start, i, span, limit
    cdef unsigned long long h
    for n in range(lo, hi + 1):
        if n > n_chars:
            break
        span = 4 * n
        limit = 4 * (n_chars - n + 1)
        for start in range(0, limit, 4):
            h = _FNV_OFFSET
            for i in range(start, start + span):
                h = (h ^ buf[i]) * _FNV_PRIME
            if h & _SIGN_BIT:
                counts[<Py_ssize_t>(h % <unsigned long long>dim)] -= 1.0
            else:
                counts[<Py_ssize_t>(h % <unsigned long long>dim)] += 1.0


def ngram_count_matrix(list texts, int dim, int lo, int hi):
    """Signed character n-gram counts, one row per text (see hashing_py)."""
    cdef Py_ssize_t n_rows = len(texts)
    out = np.zeros((n_rows, dim), dtype=np.float64)
    cdef double[:, ::1] out_v = out
    cdef const unsigned char[::1] buf
    cdef Py_ssize_t row, n_chars
    cdef bytes encoded
    for row in range(n_rows):
        encoded = (<str>texts[row]).encode("utf-32-le")
        n_chars = len(encoded) // 4
        if n_chars == 0:
            continue
        buf = encoded
        _accumulate(out_v[row], buf, n_chars, dim, lo, hi)
    return out
