# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cosine-measure kernels.

Same contracts as ``_kernels_py``; see that module for the candidate scheme.
"""

import numpy as np

from libc.math cimport sqrt, INFINITY
from scipy.linalg.cython_lapack cimport dsyev


cdef inline void _eval_candidate(const double[:, ::1] D, double* v, int n,
                                 double* vmax, double* vmin) noexcept nogil:
    cdef int p = D.shape[0]
    cdef int i, j
    cdef double s
    vmax[0] = -INFINITY
    vmin[0] = INFINITY
    for i in range(p):
        s = 0.0
        for j in range(n):
            s += D[i, j] * v[j]
        if s > vmax[0]:
            vmax[0] = s
        if s < vmin[0]:
            vmin[0] = s


def exact_candidates(D_in, double cond_max):
    cdef const double[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef int p = D.shape[0]
    cdef int n = D.shape[1]
    cdef double cond2 = cond_max * cond_max

    cdef double[::1] best = np.zeros(n)
    cdef double best_value = INFINITY
    cdef long full_rank = 0

    idx_arr = np.zeros(n, dtype=np.intc)
    cdef int[::1] idx = idx_arr
    G_arr = np.zeros(n * n)
    cdef double[::1] G = G_arr
    cdef double[::1] w = np.zeros(n)
    cdef double[::1] t = np.zeros(n)
    cdef double[::1] y = np.zeros(n)
    cdef double[::1] v = np.zeros(n)
    cdef double[::1] u = np.zeros(n)
    cdef double[::1] gb = np.zeros(n)
    cdef int lwork = max(1, 3 * n * n + 8 * n)
    cdef double[::1] work = np.zeros(lwork)

    cdef int k, a, b, i, j, r, info, jbest
    cdef double s, nrm, vmax, vmin, dmax, dj
    cdef char jobz = b'V'
    cdef char uplo = b'U'
    cdef bint more

    for k in range(1, n + 1):
        for i in range(k):
            idx[i] = i
        more = k <= p
        while more:
            # Gram matrix of the subset, column-major k x k
            for a in range(k):
                for b in range(k):
                    s = 0.0
                    for j in range(n):
                        s += D[idx[a], j] * D[idx[b], j]
                    G[a + b * k] = s
            dsyev(&jobz, &uplo, &k, &G[0], &k, &w[0], &work[0], &lwork, &info)
            if info == 0 and w[0] > 0 and w[k - 1] <= cond2 * w[0]:
                if k == n:
                    full_rank += 1
                # t = Q^T 1 / w ; y = Q t
                for a in range(k):
                    s = 0.0
                    for b in range(k):
                        s += G[b + a * k]
                    t[a] = s / w[a]
                for a in range(k):
                    s = 0.0
                    for b in range(k):
                        s += G[a + b * k] * t[b]
                    y[a] = s
                nrm = 0.0
                for j in range(n):
                    s = 0.0
                    for a in range(k):
                        s += D[idx[a], j] * y[a]
                    v[j] = s
                    nrm += s * s
                nrm = sqrt(nrm)
                for j in range(n):
                    v[j] /= nrm
                _eval_candidate(D, &v[0], n, &vmax, &vmin)
                if vmax < best_value:
                    best_value = vmax
                    for j in range(n):
                        best[j] = v[j]
                if -vmin < best_value:
                    best_value = -vmin
                    for j in range(n):
                        best[j] = -v[j]
                if k == n - 1:
                    # column j of I - B^T G^{-1} B with the largest diagonal
                    dmax = -INFINITY
                    jbest = 0
                    for j in range(n):
                        for a in range(k):
                            s = 0.0
                            for b in range(k):
                                s += G[b + a * k] * D[idx[b], j]
                            t[a] = s / w[a]
                        dj = 1.0
                        for a in range(k):
                            s = 0.0
                            for b in range(k):
                                s += G[a + b * k] * t[b]
                            gb[a] = s
                            dj -= D[idx[a], j] * s
                        if dj > dmax:
                            dmax = dj
                            jbest = j
                            for a in range(k):
                                y[a] = gb[a]
                    nrm = 0.0
                    for r in range(n):
                        s = 1.0 if r == jbest else 0.0
                        for a in range(k):
                            s -= D[idx[a], r] * y[a]
                        u[r] = s
                        nrm += s * s
                    nrm = sqrt(nrm)
                    for r in range(n):
                        u[r] /= nrm
                    _eval_candidate(D, &u[0], n, &vmax, &vmin)
                    if vmax < best_value:
                        best_value = vmax
                        for j in range(n):
                            best[j] = u[j]
                    if -vmin < best_value:
                        best_value = -vmin
                        for j in range(n):
                            best[j] = -u[j]
            # next combination in lexicographic order
            i = k - 1
            while i >= 0 and idx[i] == p - k + i:
                i -= 1
            if i < 0:
                more = False
            else:
                idx[i] += 1
                for a in range(i + 1, k):
                    idx[a] = idx[a - 1] + 1
    return float(best_value), np.asarray(best).copy(), int(full_rank)


def sampled_minmax(D_in, V_in):
    cdef const double[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef const double[:, ::1] V = np.ascontiguousarray(V_in, dtype=np.float64)
    cdef Py_ssize_t m = V.shape[0]
    cdef int p = D.shape[0]
    cdef int n = D.shape[1]
    cdef Py_ssize_t i, best_i = 0
    cdef int a, j
    cdef double s, mx, best = INFINITY
    with nogil:
        for i in range(m):
            mx = -INFINITY
            for a in range(p):
                s = 0.0
                for j in range(n):
                    s += V[i, j] * D[a, j]
                if s > mx:
                    mx = s
                    if mx >= best:
                        break
            if mx < best:
                best = mx
                best_i = i
    return float(best), int(best_i)


def max_inner(D_in, v_in):
    cdef const double[:, ::1] D = np.ascontiguousarray(D_in, dtype=np.float64)
    cdef const double[::1] v = np.ascontiguousarray(v_in, dtype=np.float64)
    cdef int p = D.shape[0]
    cdef int n = D.shape[1]
    cdef int a, j, best_i = 0
    cdef double s, best = -INFINITY
    for a in range(p):
        s = 0.0
        for j in range(n):
            s += D[a, j] * v[j]
        if s > best:
            best = s
            best_i = a
    return int(best_i), float(best)
