"""Numba-compiled implementations of the hot kernels.

Same contracts as ``_kernels_numpy``. All loops run in a fixed sequential
order so results are reproducible run to run; no prange, no fastmath.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def pairwise_sq_dists(points, centers):
    n, m = points.shape
    k = centers.shape[0]
    d = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            acc = 0.0
            for t in range(m):
                diff = points[i, t] - centers[j, t]
                acc += diff * diff
            d[i, j] = acc
    return d


@njit(cache=True)
def assign_labels(points, centers):
    n, m = points.shape
    k = centers.shape[0]
    labels = np.empty(n, np.int64)
    best = np.empty(n)
    for i in range(n):
        best_j = 0
        best_d = math.inf
        for j in range(k):
            acc = 0.0
            for t in range(m):
                diff = points[i, t] - centers[j, t]
                acc += diff * diff
            if acc < best_d:
                best_d = acc
                best_j = j
        labels[i] = best_j
        best[i] = best_d
    return labels, best


@njit(cache=True)
def accumulate_clusters(points, labels, k):
    n, m = points.shape
    sums = np.zeros((k, m))
    counts = np.zeros(k, np.int64)
    for i in range(n):
        j = labels[i]
        counts[j] += 1
        for t in range(m):
            sums[j, t] += points[i, t]
    return sums, counts


@njit(cache=True)
def jacobi_sweeps(cols, rot, tol, max_sweeps):
    n, m = cols.shape
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for t in range(m):
                    ap = cols[p, t]
                    aq = cols[q, t]
                    alpha += ap * ap
                    beta += aq * aq
                    gamma += ap * aq
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta == 0.0:
                    t_ = 1.0
                elif zeta > 0.0:
                    t_ = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                else:
                    t_ = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t_ * t_)
                s = c * t_
                for t in range(m):
                    ap = cols[p, t]
                    aq = cols[q, t]
                    cols[p, t] = c * ap - s * aq
                    cols[q, t] = s * ap + c * aq
                for t in range(n):
                    vp = rot[p, t]
                    vq = rot[q, t]
                    rot[p, t] = c * vp - s * vq
                    rot[q, t] = s * vp + c * vq
        if not rotated:
            return sweep
    return -1


@njit(cache=True)
def matmul(a, b):
    n, k = a.shape
    m = b.shape[1]
    out = np.zeros((n, m))
    for i in range(n):
        for t in range(k):
            a_it = a[i, t]
            for j in range(m):
                out[i, j] += a_it * b[t, j]
    return out
