# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled array kernels.

Mirrors _pykernels exactly (names, shapes, conventions). The trigonometric
family uses angle-addition recurrences instead of per-frequency sin/cos
calls; both families fuse the inner loops so no intermediate basis matrix is
materialized for synthesis and projection.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()


def basis_matrix(int family, theta, int m):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef Py_ssize_t n = th.shape[0], j
    out_arr = np.empty((n, m + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef int i, k
    cdef double r2 = sqrt(2.0)
    cdef double t, s1, c1, sk, ck, snew, pkm1, pk, pkp1
    if family == 0:
        for j in range(n):
            t = th[j]
            out[j, 0] = 1.0
            s1 = sin(t)
            c1 = cos(t)
            sk = s1
            ck = c1
            i = 1
            while i <= m:
                out[j, i] = r2 * sk
                if i + 1 <= m:
                    out[j, i + 1] = r2 * ck
                snew = sk * c1 + ck * s1
                ck = ck * c1 - sk * s1
                sk = snew
                i += 2
    else:
        for j in range(n):
            t = th[j]
            out[j, 0] = 1.0
            if m >= 1:
                out[j, 1] = sqrt(3.0) * t
            pkm1 = 1.0
            pk = t
            for k in range(1, m):
                pkp1 = ((2 * k + 1) * t * pk - k * pkm1) / (k + 1)
                out[j, k + 1] = sqrt(2.0 * (k + 1) + 1.0) * pkp1
                pkm1 = pk
                pk = pkp1
    return out_arr


def synthesize_values(int family, theta, coeffs):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef const double[:, ::1] u = coeffs
    cdef Py_ssize_t n = th.shape[0], j
    cdef int m = u.shape[0] - 1
    cdef int q = u.shape[1], c, i, k
    out_arr = np.zeros((n, q), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double r2 = sqrt(2.0)
    cdef double t, s1, c1, sk, ck, snew, b, pkm1, pk, pkp1
    if family == 0:
        for j in range(n):
            t = th[j]
            for c in range(q):
                out[j, c] = u[0, c]
            s1 = sin(t)
            c1 = cos(t)
            sk = s1
            ck = c1
            i = 1
            while i <= m:
                b = r2 * sk
                for c in range(q):
                    out[j, c] += u[i, c] * b
                if i + 1 <= m:
                    b = r2 * ck
                    for c in range(q):
                        out[j, c] += u[i + 1, c] * b
                snew = sk * c1 + ck * s1
                ck = ck * c1 - sk * s1
                sk = snew
                i += 2
    else:
        for j in range(n):
            t = th[j]
            for c in range(q):
                out[j, c] = u[0, c]
            if m >= 1:
                b = sqrt(3.0) * t
                for c in range(q):
                    out[j, c] += u[1, c] * b
            pkm1 = 1.0
            pk = t
            for k in range(1, m):
                pkp1 = ((2 * k + 1) * t * pk - k * pkm1) / (k + 1)
                b = sqrt(2.0 * (k + 1) + 1.0) * pkp1
                for c in range(q):
                    out[j, c] += u[k + 1, c] * b
                pkm1 = pk
                pk = pkp1
    return out_arr


def accumulate_projection(int family, theta, values, weights, int m):
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] th = theta
    cdef const double[:, ::1] g = values
    cdef const double[::1] w = weights
    cdef Py_ssize_t n = th.shape[0], j
    cdef int q = g.shape[1], c, i, k
    out_arr = np.zeros((m + 1, q), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double r2 = sqrt(2.0)
    cdef double t, wj, s1, c1, sk, ck, snew, b, pkm1, pk, pkp1
    if family == 0:
        for j in range(n):
            t = th[j]
            wj = w[j]
            for c in range(q):
                out[0, c] += wj * g[j, c]
            s1 = sin(t)
            c1 = cos(t)
            sk = s1
            ck = c1
            i = 1
            while i <= m:
                b = r2 * sk * wj
                for c in range(q):
                    out[i, c] += b * g[j, c]
                if i + 1 <= m:
                    b = r2 * ck * wj
                    for c in range(q):
                        out[i + 1, c] += b * g[j, c]
                snew = sk * c1 + ck * s1
                ck = ck * c1 - sk * s1
                sk = snew
                i += 2
    else:
        for j in range(n):
            t = th[j]
            wj = w[j]
            for c in range(q):
                out[0, c] += wj * g[j, c]
            if m >= 1:
                b = sqrt(3.0) * t * wj
                for c in range(q):
                    out[1, c] += b * g[j, c]
            pkm1 = 1.0
            pk = t
            for k in range(1, m):
                pkp1 = ((2 * k + 1) * t * pk - k * pkm1) / (k + 1)
                b = sqrt(2.0 * (k + 1) + 1.0) * pkp1 * wj
                for c in range(q):
                    out[k + 1, c] += b * g[j, c]
                pkm1 = pk
                pk = pkp1
    return out_arr
