# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for covering radii on S^3 and torus weight scans."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, fabs, sqrt, round as cround, pow, M_PI

cnp.import_array()


def update_best_inner(const double[:, ::1] probes, const double[:, ::1] points, double[::1] best):
    """best[p] = max(best[p], max_q <probes[p], points[q]>), in place."""
    cdef Py_ssize_t P = probes.shape[0], N = points.shape[0], i, q
    cdef double a0, a1, a2, a3, b, dot
    if probes.shape[1] != 4 or points.shape[1] != 4:
        raise ValueError("expected unit quaternions as rows of length 4")
    if best.shape[0] != P:
        raise ValueError("best has the wrong length")
    with nogil:
        for i in range(P):
            a0 = probes[i, 0]
            a1 = probes[i, 1]
            a2 = probes[i, 2]
            a3 = probes[i, 3]
            b = best[i]
            for q in range(N):
                dot = a0 * points[q, 0] + a1 * points[q, 1] + a2 * points[q, 2] + a3 * points[q, 3]
                if dot > b:
                    b = dot
            best[i] = b


def torus_min_gap(const double[::1] theta, long L, int max_alpha, double excl_tol):
    """Scan weights 0 < |l|_inf <= L.

    Returns (minima[max_alpha+1], argmin weights[max_alpha+1, m], n_scanned,
    n_excluded) for 2|sin(pi <theta, l>)| * |l|_2^alpha, skipping weights with
    <theta, l> within excl_tol of an integer.  Only one of each +-l pair is
    visited (the first nonzero coordinate is positive); the gap is even in l.
    """
    cdef Py_ssize_t m = theta.shape[0], i, a
    cdef long[::1] l = np.zeros(m, dtype=np.int64)
    cdef double[::1] mins = np.full(max_alpha + 1, np.inf)
    cdef long[:, ::1] arg = np.zeros((max_alpha + 1, m), dtype=np.int64)
    cdef double x, frac, g, nrm, val
    cdef long n_scanned = 0, n_excl = 0
    cdef int first_sign
    cdef bint done = False
    if m == 0 or L < 1:
        return np.asarray(mins), np.asarray(arg), 0, 0
    for i in range(m):
        l[i] = -L
    while not done:
        first_sign = 0
        for i in range(m):
            if l[i] != 0:
                first_sign = 1 if l[i] > 0 else -1
                break
        if first_sign > 0:
            n_scanned += 1
            x = 0.0
            nrm = 0.0
            for i in range(m):
                x += theta[i] * l[i]
                nrm += <double>(l[i] * l[i])
            frac = x - cround(x)
            if fabs(frac) <= excl_tol:
                n_excl += 1
            else:
                g = 2.0 * fabs(sin(M_PI * frac))
                nrm = sqrt(nrm)
                val = g
                for a in range(max_alpha + 1):
                    if val < mins[a]:
                        mins[a] = val
                        for i in range(m):
                            arg[a, i] = l[i]
                    val *= nrm
        # odometer increment over [-L, L]^m
        i = m - 1
        while True:
            if l[i] < L:
                l[i] += 1
                break
            l[i] = -L
            if i == 0:
                done = True
                break
            i -= 1
    return np.asarray(mins), np.asarray(arg), n_scanned, n_excl
