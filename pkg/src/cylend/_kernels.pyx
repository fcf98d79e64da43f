# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled P1 element kernels; same contract as ``_kernels_py.p1_assemble``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def p1_assemble(pts, tris, kxx, kyy, mw):
    cdef const double[:, ::1] P = np.ascontiguousarray(pts, dtype=np.float64)
    cdef const long long[:, ::1] T = np.ascontiguousarray(tris, dtype=np.int64)
    cdef const double[::1] KX = np.ascontiguousarray(kxx, dtype=np.float64)
    cdef const double[::1] KY = np.ascontiguousarray(kyy, dtype=np.float64)
    cdef const double[:, ::1] MW = np.ascontiguousarray(mw, dtype=np.float64)
    cdef Py_ssize_t nt = T.shape[0]
    rows_a = np.empty(9 * nt, dtype=np.int64)
    cols_a = np.empty(9 * nt, dtype=np.int64)
    a_a = np.empty(9 * nt, dtype=np.float64)
    m_a = np.empty(9 * nt, dtype=np.float64)
    cdef long long[::1] rows = rows_a
    cdef long long[::1] cols = cols_a
    cdef double[::1] av = a_a
    cdef double[::1] mv = m_a
    cdef Py_ssize_t t, i, j, q, o
    cdef double x0, x1, x2, y0, y1, y2, area2, area, s
    cdef double bx[3]
    cdef double by[3]
    cdef double phi[3][3]
    # barycentric values at edge midpoints m01, m12, m20
    phi[0][0] = 0.5; phi[0][1] = 0.5; phi[0][2] = 0.0
    phi[1][0] = 0.0; phi[1][1] = 0.5; phi[1][2] = 0.5
    phi[2][0] = 0.5; phi[2][1] = 0.0; phi[2][2] = 0.5
    for t in range(nt):
        x0 = P[T[t, 0], 0]; y0 = P[T[t, 0], 1]
        x1 = P[T[t, 1], 0]; y1 = P[T[t, 1], 1]
        x2 = P[T[t, 2], 0]; y2 = P[T[t, 2], 1]
        area2 = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        area = 0.5 * area2
        bx[0] = (y1 - y2) / area2; bx[1] = (y2 - y0) / area2; bx[2] = (y0 - y1) / area2
        by[0] = (x2 - x1) / area2; by[1] = (x0 - x2) / area2; by[2] = (x1 - x0) / area2
        for i in range(3):
            for j in range(3):
                o = 9 * t + 3 * i + j
                rows[o] = T[t, i]
                cols[o] = T[t, j]
                av[o] = area * (KX[t] * bx[i] * bx[j] + KY[t] * by[i] * by[j])
                s = 0.0
                for q in range(3):
                    s += MW[t, q] * phi[q][i] * phi[q][j]
                mv[o] = area / 3.0 * s
    return rows_a, cols_a, a_a, m_a
