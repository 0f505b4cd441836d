# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fitness kernel.

Computes the mixture log-likelihood at the hard-label maximum-likelihood
estimates in a single call, without Python-level temporaries. LAPACK is
reached through scipy's Cython bindings.
"""
import numpy as np

from libc.math cimport log, exp, INFINITY, M_PI
from scipy.linalg.cython_lapack cimport dpotrf, dsyev


cdef double LOG_2PI = log(2.0 * M_PI)


cdef double _fitness(const double[:, ::1] X, const Py_ssize_t[::1] labels, int G,
                     double ridge, double eig_rel_tol,
                     Py_ssize_t[::1] counts, double[:, ::1] means, double[:, :, ::1] covs,
                     double[::1] logdet, double[::1] logw, double[::1] work,
                     double[::1] eig, double[:, ::1] tmp, double[::1] dev,
                     double[::1] lt, int* bad_label) noexcept nogil:
    cdef Py_ssize_t n = X.shape[0]
    cdef int p = <int>X.shape[1]
    cdef Py_ssize_t i
    cdef int g, j, k, info = 0, lwork = <int>work.shape[0]
    cdef double s, tr, quad, mx, acc, total = 0.0
    cdef char jobz = b'N'
    cdef char uplo = b'L'

    for i in range(n):
        g = <int>labels[i]
        if g < 0 or g >= G:
            bad_label[0] = 1
            return 0.0
        counts[g] += 1
        for j in range(p):
            means[g, j] += X[i, j]
    for g in range(G):
        if counts[g] <= p:
            return -INFINITY
        for j in range(p):
            means[g, j] /= counts[g]

    # scatter about the group means (lower triangle, mirrored below)
    for i in range(n):
        g = <int>labels[i]
        for j in range(p):
            dev[j] = X[i, j] - means[g, j]
        for j in range(p):
            for k in range(j + 1):
                covs[g, j, k] += dev[j] * dev[k]

    for g in range(G):
        tr = 0.0
        for j in range(p):
            for k in range(j + 1):
                covs[g, j, k] /= counts[g]
                covs[g, k, j] = covs[g, j, k]
            covs[g, j, j] += ridge
            tr += covs[g, j, j]

        # eigenvalue floor (dsyev overwrites its input, so work on a copy)
        for j in range(p):
            for k in range(p):
                tmp[j, k] = covs[g, j, k]
        dsyev(&jobz, &uplo, &p, &tmp[0, 0], &p, &eig[0], &work[0], &lwork, &info)
        if info != 0 or not (tr > 0.0 and eig[0] > eig_rel_tol * tr / p):
            return -INFINITY

        # symmetric, so row-major storage reads the same column-major;
        # the factor L[j, k] (j >= k) lands at covs[g, k, j]
        dpotrf(&uplo, &p, &covs[g, 0, 0], &p, &info)
        if info != 0:
            return -INFINITY
        s = 0.0
        for j in range(p):
            s += log(covs[g, j, j])
        logdet[g] = 2.0 * s
        logw[g] = log(<double>counts[g] / <double>n)

    for i in range(n):
        mx = -INFINITY
        for g in range(G):
            # forward substitution L y = x - mu, accumulating y'y
            quad = 0.0
            for j in range(p):
                s = X[i, j] - means[g, j]
                for k in range(j):
                    s = s - covs[g, k, j] * dev[k]
                dev[j] = s / covs[g, j, j]
                quad += dev[j] * dev[j]
            lt[g] = logw[g] - 0.5 * (p * LOG_2PI + logdet[g] + quad)
            if lt[g] > mx:
                mx = lt[g]
        acc = 0.0
        for g in range(G):
            acc += exp(lt[g] - mx)
        total += mx + log(acc)
    return total


def labelled_fitness(const double[:, ::1] X, const Py_ssize_t[::1] labels, int G,
                     double ridge=0.0, double eig_rel_tol=1e-10):
    """Fitness of an integer labeling; ``-inf`` when infeasible."""
    cdef Py_ssize_t n = X.shape[0]
    cdef int p = <int>X.shape[1]
    cdef int bad_label = 0
    cdef double result
    if labels.shape[0] != n:
        raise ValueError("labels length does not match the number of observations")
    if G < 1:
        raise ValueError("G must be positive")

    cdef Py_ssize_t[::1] counts = np.zeros(G, dtype=np.intp)
    cdef double[:, ::1] means = np.zeros((G, p), dtype=np.float64)
    cdef double[:, :, ::1] covs = np.zeros((G, p, p), dtype=np.float64)
    cdef double[::1] logdet = np.zeros(G, dtype=np.float64)
    cdef double[::1] logw = np.zeros(G, dtype=np.float64)
    cdef double[::1] work = np.zeros(max(1, 8 * p), dtype=np.float64)
    cdef double[::1] eig = np.zeros(p, dtype=np.float64)
    cdef double[:, ::1] tmp = np.zeros((p, p), dtype=np.float64)
    cdef double[::1] dev = np.zeros(p, dtype=np.float64)
    cdef double[::1] lt = np.zeros(G, dtype=np.float64)

    with nogil:
        result = _fitness(X, labels, G, ridge, eig_rel_tol, counts, means, covs,
                          logdet, logw, work, eig, tmp, dev, lt, &bad_label)
    if bad_label:
        raise ValueError(f"labels must lie in 0..{G - 1}")
    return result
