# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled solver kernels; see _fallback.py for the reference semantics."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def flux_residual(double[:, ::1] phi_faces, double[::1] R, double h):
    cdef Py_ssize_t k = phi_faces.shape[0]
    cdef Py_ssize_t n = phi_faces.shape[1] - 1
    out = np.empty((k, n))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    for i in range(k):
        for j in range(n):
            o[i, j] = phi_faces[i, j + 1] - phi_faces[i, j] - h * R[j]
    return out


def banded_jacobian(double[:, ::1] g_faces, double[::1] R, double h, double t):
    cdef Py_ssize_t k = g_faces.shape[0]
    cdef Py_ssize_t n = g_faces.shape[1] - 1
    cdef Py_ssize_t N = k * n
    ab = np.zeros((2 * k + 1, N))
    cdef double[:, ::1] A = ab
    cdef Py_ssize_t i, j, m, r, c
    cdef double right, left, rr
    for j in range(n):
        rr = h * t * R[j]
        for i in range(k):
            r = j * k + i
            right = g_faces[i, j + 1] / h if j < n - 1 else 0.0
            left = g_faces[i, j] / h if j > 0 else 0.0
            A[k, r] = -right - left + rr
            for m in range(k):
                if m != i:
                    c = j * k + m
                    A[k + r - c, c] = rr
            if j < n - 1:
                A[0, r + k] = right
            if j > 0:
                A[2 * k, r - k] = left
    return ab


def legendre(double[::1] a, double[::1] u, double[::1] p):
    """Linear-time sweep; exact for convex u on increasing a and increasing p."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = p.shape[0]
    out = np.empty(m)
    arg = np.empty(m, dtype=np.int64)
    cdef double[::1] o = out
    cdef long long[::1] g = arg
    cdef Py_ssize_t q, j = 0
    cdef double best, val
    for q in range(m):
        best = p[q] * a[j] - u[j]
        while j + 1 < n:
            val = p[q] * a[j + 1] - u[j + 1]
            if val >= best:
                best = val
                j += 1
            else:
                break
        o[q] = best
        g[q] = j
    return out, arg
