"""Pure-numpy implementations of the hot kernels.

Fallback path for when numba is unavailable or disabled via SWSC_BACKEND.
Signatures and iteration order match ``_kernels_numba`` exactly; each
function is deterministic for fixed inputs.
"""

import math

import numpy as np


def pairwise_sq_dists(points, centers):
    """Squared Euclidean distances, shape (n_points, n_centers)."""
    p2 = np.einsum("ij,ij->i", points, points)
    c2 = np.einsum("ij,ij->i", centers, centers)
    d = p2[:, None] - 2.0 * (points @ centers.T) + c2[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def assign_labels(points, centers):
    """Nearest-center index per point (ties to the lowest index) and its squared distance."""
    d = pairwise_sq_dists(points, centers)
    labels = np.argmin(d, axis=1)
    best = d[np.arange(points.shape[0]), labels]
    return labels.astype(np.int64), best


def accumulate_clusters(points, labels, k):
    """Per-cluster coordinate sums and member counts.

    Accumulates in increasing point order, matching the numba loop bit for bit.
    """
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts


def jacobi_sweeps(cols, rot, tol, max_sweeps):
    """One-sided Jacobi orthogonalization, in place.

    ``cols`` holds the matrix columns as rows, shape (n, m); ``rot`` starts as
    the n-by-n identity and accumulates the right rotations (its rows end up
    as right singular vectors). Sweeps stop once every column pair satisfies
    |<a_p, a_q>| <= tol * |a_p| * |a_q|. Returns the number of sweeps used,
    or -1 if the cap was hit.
    """
    n = cols.shape[0]
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                ap = cols[p]
                aq = cols[q]
                alpha = float(ap @ ap)
                beta = float(aq @ aq)
                gamma = float(ap @ aq)
                if abs(gamma) <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta == 0.0:
                    t = 1.0
                elif zeta > 0.0:
                    t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                new_p = c * ap - s * aq
                new_q = s * ap + c * aq
                cols[p] = new_p
                cols[q] = new_q
                vp = rot[p].copy()
                vq = rot[q]
                rot[p] = c * vp - s * vq
                rot[q] = s * vp + c * vq
        if not rotated:
            return sweep
    return -1


def matmul(a, b):
    """Dense product of two float64 matrices."""
    return a @ b
