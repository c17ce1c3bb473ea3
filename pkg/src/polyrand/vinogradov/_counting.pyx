# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled diophantine counting kernels.

Hot loops for J_k(P): brute-force pair enumeration and the
meet-in-the-middle signature histogram.  The pure-Python twin lives in
``_counting_py``; both must return identical exact counts.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline cnp.int64_t ipow(cnp.int64_t base, int exp) nogil:
    cdef cnp.int64_t out = 1
    cdef int i
    for i in range(exp):
        out *= base
    return out


cdef void fill_signatures(cnp.int64_t[:, ::1] sig, int P, int m, int k) nogil:
    """Signatures of all P^k tuples in odometer order."""
    cdef cnp.int64_t n = sig.shape[0]
    cdef cnp.int64_t idx, rest
    cdef int i, j
    cdef cnp.int64_t x
    for idx in range(n):
        rest = idx
        for j in range(m):
            sig[idx, j] = 0
        for i in range(k):
            x = rest % P + 1
            rest //= P
            for j in range(m):
                sig[idx, j] += ipow(x, j + 1)


def count_enumerate(int P, int m, int k):
    """Exact J_k(P) by direct comparison of all P^{2k} tuple pairs."""
    cdef cnp.int64_t n = ipow(P, k)
    sig_arr = np.empty((n, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] sig = sig_arr
    cdef cnp.int64_t total = 0
    cdef cnp.int64_t i, j2
    cdef int j
    cdef bint eq
    with nogil:
        fill_signatures(sig, P, m, k)
        for i in range(n):
            for j2 in range(n):
                eq = True
                for j in range(m):
                    if sig[i, j] != sig[j2, j]:
                        eq = False
                        break
                if eq:
                    total += 1
    return int(total)


def count_histogram(int P, int m, int k):
    """Exact J_k(P) as sum of squared signature multiplicities.

    Signatures are packed into one int64 key with mixed radix
    (k*P^j + 1 per power j) when that fits, then sorted; run lengths
    give N(v) and J_k = sum N(v)^2.
    """
    cdef cnp.int64_t n = ipow(P, k)
    cdef int j
    # radix check in Python integers to catch overflow honestly
    radii = [k * P**j + 1 for j in range(1, m + 1)]
    total_radix = 1
    for r in radii:
        total_radix *= r
    sig_arr = np.empty((n, m), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] sig = sig_arr
    with nogil:
        fill_signatures(sig, P, m, k)
    if total_radix >= 2**62:
        _, counts = np.unique(sig_arr, axis=0, return_counts=True)
        return int(np.sum(counts.astype(object) ** 2))
    key_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.int64_t[::1] key = key_arr
    cdef cnp.int64_t[::1] rad = np.asarray(radii, dtype=np.int64)
    cdef cnp.int64_t i
    with nogil:
        for i in range(n):
            for j in range(m):
                key[i] = key[i] * rad[j] + sig[i, j]
    key_arr.sort()
    cdef cnp.int64_t[::1] skey = key_arr
    cdef cnp.int64_t total = 0, run = 1
    with nogil:
        for i in range(1, n):
            if skey[i] == skey[i - 1]:
                run += 1
            else:
                total += run * run
                run = 1
        total += run * run
    return int(total)
