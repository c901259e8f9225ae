# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled QUBO kernels: exhaustive minimization and Metropolis annealing.

Mirrors ``_pykernels`` exactly (enumeration order, tie rule, acceptance test).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, INFINITY

cnp.import_array()


cdef void _low_tables(const double[::1] h, const double[:, ::1] J, int L,
                      double[::1] e_low) noexcept nogil:
    # e_low[x] = sum_{i in x} h_i + sum_{i<j in x} J_ij, built by peeling the lowest bit
    cdef Py_ssize_t x, rest, j
    cdef int b
    cdef double acc
    e_low[0] = 0.0
    for x in range(1, 1 << L):
        b = 0
        while not (x >> b) & 1:
            b += 1
        rest = x ^ (1 << b)
        acc = e_low[rest] + h[b]
        for j in range(L):
            if (rest >> j) & 1:
                acc += J[b, j]
        e_low[x] = acc


cdef double _scan(const double[::1] h, const double[:, ::1] J, double offset, int n, int L,
                  const double[::1] e_low, double[::1] lin, double[::1] c,
                  bint first_hit, double threshold, long long *hit) noexcept nogil:
    # Walk all assignments in index order.  Returns the minimum, or with
    # first_hit set, stops at the first index whose energy <= threshold.
    cdef long long xh, nh = 1LL << (n - L)
    cdef Py_ssize_t xl, nl = 1 << L, i, j
    cdef int b
    cdef double e_high, e, best = INFINITY
    for xh in range(nh):
        e_high = offset
        for i in range(n - L):
            if (xh >> i) & 1:
                e_high += h[L + i]
                for j in range(i + 1, n - L):
                    if (xh >> j) & 1:
                        e_high += J[L + i, L + j]
        for i in range(L):
            c[i] = 0.0
            for j in range(n - L):
                if (xh >> j) & 1:
                    c[i] += J[i, L + j]
        lin[0] = 0.0
        e = e_high + e_low[0]
        if e < best:
            best = e
        if first_hit and e <= threshold:
            hit[0] = xh << L
            return e
        for xl in range(1, nl):
            b = 0
            while not (xl >> b) & 1:
                b += 1
            lin[xl] = lin[xl ^ (1 << b)] + c[b]
            e = e_high + e_low[xl] + lin[xl]
            if e < best:
                best = e
            if first_hit and e <= threshold:
                hit[0] = (xh << L) | xl
                return e
    return best


def exact_minimize(h, J, double offset, double tol):
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[:, ::1] Jv = np.ascontiguousarray(J, dtype=np.float64)
    cdef int n = hv.shape[0]
    cdef int L = n if n < 12 else 12
    cdef double[::1] e_low = np.empty(1 << L)
    cdef double[::1] lin = np.empty(1 << L)
    cdef double[::1] c = np.empty(max(L, 1))
    cdef long long hit = -1
    cdef double best, e
    with nogil:
        _low_tables(hv, Jv, L, e_low)
        best = _scan(hv, Jv, offset, n, L, e_low, lin, c, False, INFINITY, &hit)
        e = _scan(hv, Jv, offset, n, L, e_low, lin, c, True, best + tol, &hit)
    return int(hit), float(e)


def anneal(h, J, init, uniforms, betas):
    cdef const double[::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef const double[:, ::1] Jv = np.ascontiguousarray(J, dtype=np.float64)
    cdef const double[:, :, ::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(betas, dtype=np.float64)
    out = np.array(init, dtype=np.int8, order="C")
    cdef signed char[:, ::1] x = out
    cdef Py_ssize_t reads = x.shape[0], n = x.shape[1], sweeps = bv.shape[0]
    cdef double[::1] field = np.empty(n)
    cdef Py_ssize_t r, sw, i, j
    cdef double dE, beta, sign
    with nogil:
        for r in range(reads):
            for i in range(n):
                field[i] = hv[i]
            for j in range(n):
                if x[r, j]:
                    for i in range(n):
                        field[i] += Jv[j, i]
            for sw in range(sweeps):
                beta = bv[sw]
                for i in range(n):
                    sign = 1.0 - 2.0 * x[r, i]
                    dE = sign * field[i]
                    if dE <= 0.0 or u[r, sw, i] < exp(-beta * dE):
                        x[r, i] ^= 1
                        for j in range(n):
                            field[j] += sign * Jv[i, j]
    return out
