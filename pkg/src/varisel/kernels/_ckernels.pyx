# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; a line-for-line port of ``_pykernels.py``.

Built without fast-math and with ``-ffp-contract=off`` so every floating
operation matches the Python reference bit for bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef double SPLIT_EPS = 1e-12
cdef double LOGIT_CUTOFF = 35.0


def hinge_fit(double[:, ::1] X, double[::1] y, double[::1] sw, double lam, int epochs):
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], i, j
    cdef int t
    cdef double total = 0.0, eta, s, c, gb, b = 0.0
    w_arr = np.zeros(d, dtype=np.float64)
    gw_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] gw = gw_arr
    for i in range(n):
        total += sw[i]
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        for j in range(d):
            gw[j] = 0.0
        gb = 0.0
        for i in range(n):
            s = b
            for j in range(d):
                s += w[j] * X[i, j]
            if y[i] * s < 1.0:
                c = sw[i] * y[i]
                for j in range(d):
                    gw[j] -= c * X[i, j]
                gb -= c
        for j in range(d):
            w[j] -= eta * (lam * w[j] + gw[j] / total)
        b -= eta * (lam * b + gb / total)
    return w_arr, b


def rbf_kernel(double[:, ::1] A, double[:, ::1] B, double gamma):
    cdef Py_ssize_t na = A.shape[0], nb = B.shape[0], d = A.shape[1], i, k, j
    cdef double s, diff
    out_arr = np.empty((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(na):
        for k in range(nb):
            s = 0.0
            for j in range(d):
                diff = A[i, j] - B[k, j]
                s += diff * diff
            out[i, k] = exp(-gamma * s)
    return out_arr


def pegasos_kernel_fit(double[:, ::1] K, double[::1] y, double[::1] sw, long long[::1] order, double lam):
    cdef Py_ssize_t n = y.shape[0], steps = order.shape[0], s, i, k
    cdef long long t = 0
    cdef double c, cy
    alpha_arr = np.zeros(n, dtype=np.float64)
    f_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] f = f_arr
    for s in range(steps):
        i = order[s]
        t += 1
        if y[i] * f[i] / (lam * <double>t) < 1.0:
            c = sw[i]
            alpha[i] += c
            cy = c * y[i]
            for k in range(n):
                f[k] += cy * K[i, k]
    return alpha_arr


def logistic_sgd_fit(double[:, ::1] X, double[::1] y, double[::1] sw, long long[::1] order, double lam, double eta0):
    cdef Py_ssize_t d = X.shape[1], steps = order.shape[0], s, i, j
    cdef long long t = 0
    cdef double eta, dot, m, p, g, b = 0.0
    w_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] w = w_arr
    for s in range(steps):
        i = order[s]
        t += 1
        eta = eta0 / (1.0 + eta0 * lam * <double>t)
        dot = b
        for j in range(d):
            dot += w[j] * X[i, j]
        m = y[i] * dot
        if m > LOGIT_CUTOFF:
            p = exp(-m)
        else:
            p = 1.0 / (1.0 + exp(m))
        g = -sw[i] * y[i] * p
        for j in range(d):
            w[j] -= eta * (lam * w[j] + g * X[i, j])
        b -= eta * g
    return w_arr, b


def knn_predict(double[:, ::1] Xtr, long long[::1] ytr, double[:, ::1] Xq, int k, int n_labels):
    cdef Py_ssize_t n = Xtr.shape[0], d = Xtr.shape[1], nq = Xq.shape[0], q, i, j, best, c
    cdef double s, diff
    cdef int rep
    if k > n:
        k = <int>n
    out_arr = np.empty(nq, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef double* dist = <double*>malloc(n * sizeof(double))
    cdef char* taken = <char*>malloc(n * sizeof(char))
    cdef long long* votes = <long long*>malloc(n_labels * sizeof(long long))
    if dist == NULL or taken == NULL or votes == NULL:
        free(dist); free(taken); free(votes)
        raise MemoryError()
    try:
        for q in range(nq):
            for i in range(n):
                s = 0.0
                for j in range(d):
                    diff = Xtr[i, j] - Xq[q, j]
                    s += diff * diff
                dist[i] = s
                taken[i] = 0
            for c in range(n_labels):
                votes[c] = 0
            for rep in range(k):
                best = -1
                for i in range(n):
                    if taken[i]:
                        continue
                    if best < 0 or dist[i] < dist[best] or (dist[i] == dist[best] and ytr[i] < ytr[best]):
                        best = i
                taken[best] = 1
                votes[ytr[best]] += 1
            best = 0
            for c in range(1, n_labels):
                if votes[c] > votes[best]:
                    best = c
            out[q] = best
    finally:
        free(dist); free(taken); free(votes)
    return out_arr


cdef void _merge_sort(long long* idx, long long* tmp, double* key, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    # stable sort of idx[lo:hi] by key[idx[.]]
    cdef Py_ssize_t mid, a, b, o
    if hi - lo < 2:
        return
    mid = (lo + hi) // 2
    _merge_sort(idx, tmp, key, lo, mid)
    _merge_sort(idx, tmp, key, mid, hi)
    a = lo
    b = mid
    o = lo
    while a < mid and b < hi:
        if key[idx[b]] < key[idx[a]]:
            tmp[o] = idx[b]
            b += 1
        else:
            tmp[o] = idx[a]
            a += 1
        o += 1
    while a < mid:
        tmp[o] = idx[a]
        a += 1
        o += 1
    while b < hi:
        tmp[o] = idx[b]
        b += 1
        o += 1
    for o in range(lo, hi):
        idx[o] = tmp[o]


def best_split(double[:, ::1] X, long long[::1] y, long long[::1] rows, long long[::1] features):
    cdef Py_ssize_t m = rows.shape[0], nf = features.shape[0], a, pos, r
    cdef long long f, prev, tot1 = 0, tot0, l0, l1, r0, r1, nl, nr, best_f = -1
    cdef double best_thr = 0.0, best_score = -1.0, score, lo, hi
    cdef long long* idx = <long long*>malloc(m * sizeof(long long) + 1)
    cdef long long* tmp = <long long*>malloc(m * sizeof(long long) + 1)
    cdef double* key = <double*>malloc(m * sizeof(double) + 1)
    if idx == NULL or tmp == NULL or key == NULL:
        free(idx); free(tmp); free(key)
        raise MemoryError()
    try:
        for r in range(m):
            tot1 += y[rows[r]]
        tot0 = m - tot1
        for a in range(nf):
            f = features[a]
            for r in range(m):
                idx[r] = r
                key[r] = X[rows[r], f]
            _merge_sort(idx, tmp, key, 0, m)
            l0 = 0
            l1 = 0
            for pos in range(1, m):
                prev = rows[idx[pos - 1]]
                if y[prev]:
                    l1 += 1
                else:
                    l0 += 1
                lo = X[prev, f]
                hi = X[rows[idx[pos]], f]
                if not lo < hi:
                    continue
                nl = pos
                nr = m - pos
                r0 = tot0 - l0
                r1 = tot1 - l1
                score = (<double>(l0 * l0 + l1 * l1) / <double>nl + <double>(r0 * r0 + r1 * r1) / <double>nr) / <double>m
                if score > best_score + SPLIT_EPS:
                    best_score = score
                    best_f = f
                    best_thr = (lo + hi) / 2.0
    finally:
        free(idx); free(tmp); free(key)
    return best_f, best_thr, best_score
