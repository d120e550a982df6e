# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled batch steady-state kernel.

Same contract as _kernel_py.solve_batch: per grid point, assemble the
8x8 population rate generator from the twelve channels, solve the
row-replaced normalized system by pivoted Gaussian elimination, and
reduce the terminal heat currents. The condition estimate here is the
infinity-norm product ||A|| * ||A^-1|| (the fallback uses the SVD ratio);
both feed the same 1e10 instability threshold.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport expm1, fabs, INFINITY, NAN

cnp.import_array()

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_UNSTABLE = 2
STATUS_NEGATIVE = 3

cdef double COND_LIMIT = 1e10
cdef double NEGATIVE_TOL = 1e-10
cdef double PIVOT_TOL = 1e-13


cdef int _factorize(double A[8][8], int piv[8]) noexcept nogil:
    """In-place LU with partial pivoting; returns 0 on success, 1 if singular."""
    cdef int col, row, best, k
    cdef double mag, best_mag, factor, tmp
    for col in range(8):
        best = col
        best_mag = fabs(A[col][col])
        for row in range(col + 1, 8):
            mag = fabs(A[row][col])
            if mag > best_mag:
                best_mag = mag
                best = row
        if best_mag < PIVOT_TOL:
            return 1
        if best != col:
            for k in range(8):
                tmp = A[col][k]
                A[col][k] = A[best][k]
                A[best][k] = tmp
        piv[col] = best
        for row in range(col + 1, 8):
            factor = A[row][col] / A[col][col]
            A[row][col] = factor
            for k in range(col + 1, 8):
                A[row][k] -= factor * A[col][k]
    return 0


cdef void _solve_factored(double A[8][8], int piv[8], double x[8]) noexcept nogil:
    # The stored multipliers sit in the final row order, so every swap must
    # hit the right-hand side before any elimination step uses them.
    cdef int col, row
    cdef double tmp
    for col in range(8):
        if piv[col] != col:
            tmp = x[col]
            x[col] = x[piv[col]]
            x[piv[col]] = tmp
    for col in range(8):
        for row in range(col + 1, 8):
            x[row] -= A[row][col] * x[col]
    for col in range(7, -1, -1):
        for row in range(col + 1, 8):
            x[col] -= A[col][row] * x[row]
        x[col] /= A[col][col]


def solve_batch(object lam_in, object ch_bath_in, object ch_freq_in, object ch_a2_in,
                object ch_pairs_in, object temperature_in, object gamma_in, object ohmic_in):
    """See _kernel_py.solve_batch for the shared contract."""
    cdef double[::1] lam = np.ascontiguousarray(lam_in, dtype=np.float64)
    cdef int[::1] ch_bath = np.ascontiguousarray(ch_bath_in, dtype=np.int32)
    cdef double[::1] ch_freq = np.ascontiguousarray(ch_freq_in, dtype=np.float64)
    cdef double[::1] ch_a2 = np.ascontiguousarray(ch_a2_in, dtype=np.float64)
    cdef int[:, :, ::1] ch_pairs = np.ascontiguousarray(ch_pairs_in, dtype=np.int32)
    temperature_arr = np.atleast_2d(np.ascontiguousarray(temperature_in, dtype=np.float64))
    gamma_arr = np.atleast_2d(np.ascontiguousarray(gamma_in, dtype=np.float64))
    ohmic_arr = np.atleast_2d(np.ascontiguousarray(ohmic_in)).astype(np.uint8)
    cdef double[:, ::1] temperature = temperature_arr
    cdef double[:, ::1] gamma = gamma_arr
    cdef cnp.uint8_t[:, ::1] ohmic = np.ascontiguousarray(ohmic_arr)

    cdef Py_ssize_t n_pts = temperature.shape[0]
    cdef Py_ssize_t n_ch = ch_freq.shape[0]

    pops_arr = np.full((n_pts, 8), np.nan)
    cur_arr = np.full((n_pts, 3), np.nan)
    res_arr = np.full(n_pts, np.nan)
    cond_arr = np.full(n_pts, np.nan)
    status_arr = np.zeros(n_pts, dtype=np.int32)
    cdef double[:, ::1] pops = pops_arr
    cdef double[:, ::1] currents = cur_arr
    cdef double[::1] residual = res_arr
    cdef double[::1] cond = cond_arr
    cdef int[::1] status = status_arr

    cdef Py_ssize_t i, c, pr
    cdef int u, d, j, k, b
    cdef double K[8][8]
    cdef double A[8][8]
    cdef double rate_up[16]
    cdef double rate_dn[16]
    cdef double p[8]
    cdef double col_x[8]
    cdef double rowsum[8]
    cdef int piv[8]
    cdef double T, gam, w, gw, occ, x, maxrate, norm_a, norm_inv, s, r, flow
    cdef bint negative

    with nogil:
        for i in range(n_pts):
            for j in range(8):
                for k in range(8):
                    K[j][k] = 0.0
            for c in range(n_ch):
                b = ch_bath[c]
                T = temperature[i, b]
                gam = gamma[i, b]
                w = ch_freq[c]
                gw = gam * w if ohmic[i, b] else gam
                if T > 0.0:
                    x = w / T
                    occ = 0.0 if x > 700.0 else 1.0 / expm1(x)
                else:
                    occ = 0.0
                rate_up[c] = gw * occ * ch_a2[c]
                rate_dn[c] = gw * (occ + 1.0) * ch_a2[c]
                for pr in range(2):
                    u = ch_pairs[c, pr, 0]
                    d = ch_pairs[c, pr, 1]
                    K[d][d] -= rate_up[c]
                    K[u][d] += rate_up[c]
                    K[u][u] -= rate_dn[c]
                    K[d][u] += rate_dn[c]

            maxrate = 0.0
            for j in range(8):
                for k in range(8):
                    if fabs(K[j][k]) > maxrate:
                        maxrate = fabs(K[j][k])
            if maxrate == 0.0:
                status[i] = 1
                continue

            for j in range(7):
                for k in range(8):
                    A[j][k] = K[j][k] / maxrate
            for k in range(8):
                A[7][k] = 1.0

            norm_a = 0.0
            for j in range(8):
                s = 0.0
                for k in range(8):
                    s += fabs(A[j][k])
                if s > norm_a:
                    norm_a = s

            if _factorize(A, piv):
                status[i] = 1
                continue

            for j in range(8):
                p[j] = 0.0
            p[7] = 1.0
            _solve_factored(A, piv, p)

            # infinity norm of the inverse, column by column
            for j in range(8):
                rowsum[j] = 0.0
            for k in range(8):
                for j in range(8):
                    col_x[j] = 1.0 if j == k else 0.0
                _solve_factored(A, piv, col_x)
                for j in range(8):
                    rowsum[j] += fabs(col_x[j])
            norm_inv = 0.0
            for j in range(8):
                if rowsum[j] > norm_inv:
                    norm_inv = rowsum[j]
            cond[i] = norm_a * norm_inv
            if cond[i] > COND_LIMIT:
                status[i] = 2

            negative = 0
            for j in range(8):
                if p[j] < -NEGATIVE_TOL:
                    negative = 1
                if p[j] < 0.0:
                    p[j] = 0.0
            if negative:
                status[i] = 3
                continue
            s = 0.0
            for j in range(8):
                s += p[j]
            if s == 0.0:
                status[i] = 1
                continue
            for j in range(8):
                p[j] /= s
                pops[i, j] = p[j]

            r = 0.0
            for j in range(8):
                s = 0.0
                for k in range(8):
                    s += K[j][k] * p[k]
                if fabs(s) > r:
                    r = fabs(s)
            residual[i] = r

            for b in range(3):
                currents[i, b] = 0.0
            for c in range(n_ch):
                b = ch_bath[c]
                flow = 0.0
                for pr in range(2):
                    u = ch_pairs[c, pr, 0]
                    d = ch_pairs[c, pr, 1]
                    flow += rate_up[c] * p[d] - rate_dn[c] * p[u]
                currents[i, b] += ch_freq[c] * flow

    return pops_arr, cur_arr, res_arr, cond_arr, status_arr
