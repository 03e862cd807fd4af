"""The compression pipeline: channel clustering, codebook restoration,
residual computation, low-rank error compensation, and decompression.

A "channel" is one column of the weight matrix. Clustering groups similar
channels; each cluster is replaced by its mean column (the representative
vector). The element-wise error this introduces is then approximated by a
truncated SVD and stored as two thin factors.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from . import backend
from .core import as_matrix, truncated_svd
from .errors import IntegrityError, ParameterError, ShapeError

DEFAULT_MAX_ITER = 100
DEFAULT_TOL = 1e-6

PRECISION_DTYPES = {"float32": np.float32, "float16": np.float16}


@dataclass(frozen=True, eq=False)
class ChannelClustering:
    """Cluster labels for each channel plus the k representative columns.

    ``labels`` has one entry per column, each in [0, k); ``centroids`` is
    m-by-k with centroid j in column j. Every cluster index owns at least
    one channel. ``n_iter`` and ``objective_history`` (within-cluster sum of
    squares after each assignment) are diagnostics.
    """

    k: int
    labels: np.ndarray
    centroids: np.ndarray
    n_iter: int = 0
    objective_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def validate(self) -> None:
        if self.k < 1:
            raise IntegrityError(f"cluster count must be >= 1, got {self.k}")
        if self.labels.ndim != 1 or self.centroids.ndim != 2:
            raise IntegrityError("labels must be 1-D and centroids 2-D")
        if self.centroids.shape[1] != self.k:
            raise IntegrityError(
                f"centroids have {self.centroids.shape[1]} columns, expected k={self.k}"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise IntegrityError("labels outside [0, k)")
        counts = np.bincount(self.labels, minlength=self.k)
        if counts.min() < 1:
            raise IntegrityError(f"cluster {int(np.argmin(counts))} is empty")


@dataclass(frozen=True, eq=False)
class LowRankFactors:
    """Split factors of the rank-r residual approximation.

    ``a_factor`` (m-by-r) carries the left singular vectors scaled by the
    square roots of the singular values; ``b_factor`` (r-by-n) carries the
    other square root against the right vectors, so a_factor @ b_factor is
    the rank-r approximation. r = 0 means no compensation (empty factors).
    """

    r: int
    a_factor: np.ndarray
    b_factor: np.ndarray
    retained_singular_values: np.ndarray

    def product(self) -> np.ndarray:
        if self.r == 0:
            return np.zeros((self.a_factor.shape[0], self.b_factor.shape[1]))
        return backend.matmul(
            np.ascontiguousarray(self.a_factor), np.ascontiguousarray(self.b_factor)
        )


@dataclass(frozen=True, eq=False)
class CompressedWeight:
    """Everything needed to restore one matrix: clustering + factors + provenance."""

    rows: int
    cols: int
    clustering: ChannelClustering
    factors: LowRankFactors
    codebook_precision: str
    seed: int

    def validate(self) -> None:
        self.clustering.validate()
        if self.codebook_precision not in PRECISION_DTYPES:
            raise IntegrityError(
                f"unknown codebook precision {self.codebook_precision!r}"
            )
        if self.clustering.centroids.shape[0] != self.rows:
            raise IntegrityError(
                f"centroid length {self.clustering.centroids.shape[0]} != rows {self.rows}"
            )
        if self.clustering.labels.shape[0] != self.cols:
            raise IntegrityError(
                f"label count {self.clustering.labels.shape[0]} != cols {self.cols}"
            )
        f = self.factors
        if f.r < 0:
            raise IntegrityError("negative rank")
        if f.a_factor.shape != (self.rows, f.r) or f.b_factor.shape != (f.r, self.cols):
            raise IntegrityError(
                f"factor shapes {f.a_factor.shape}/{f.b_factor.shape} inconsistent "
                f"with rows={self.rows} cols={self.cols} r={f.r}"
            )
        if f.retained_singular_values.shape != (f.r,):
            raise IntegrityError("retained singular value count != r")


def _check_positive_int(value, name, minimum=1):
    if not minimum <= int(value) == value:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def kmeans_channels(w, k: int, seed: int, max_iter: int = DEFAULT_MAX_ITER,
                    tol: float = DEFAULT_TOL, restarts: int = 1) -> ChannelClustering:
    """Cluster the columns of ``w`` into k groups by Lloyd's algorithm.

    Initialization is k-means++ driven by ``seed``; iteration stops when the
    assignment reaches a fixed point, when the largest centroid movement
    drops below ``tol``, or after ``max_iter`` rounds. Empty clusters are
    repaired by re-seeding with the point farthest from its centroid. With
    ``restarts`` > 1, runs are seeded seed, seed+1, ... and the lowest final
    objective wins (ties keep the earliest run). Deterministic throughout;
    nearest-centroid ties go to the lowest cluster index.
    """
    w = as_matrix(w, "w")
    n = w.shape[1]
    k = _check_positive_int(k, "k")
    if k > n:
        raise ParameterError(f"k={k} exceeds the number of columns {n}")
    seed = _check_positive_int(seed, "seed", minimum=0)
    max_iter = _check_positive_int(max_iter, "max_iter")
    restarts = _check_positive_int(restarts, "restarts")
    if tol < 0:
        raise ParameterError(f"tol must be non-negative, got {tol}")

    points = np.ascontiguousarray(w.T)
    best = None
    for attempt in range(restarts):
        rng = np.random.default_rng(seed + attempt)
        labels, centers, history = _lloyd(points, k, rng, max_iter, float(tol))
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centers, history)
    labels, centers, history = best
    centers = _snap_uniform_clusters(points, labels, centers)
    return ChannelClustering(
        k=k,
        labels=labels,
        centroids=np.ascontiguousarray(centers.T),
        n_iter=len(history) - 1,
        objective_history=np.asarray(history),
    )


def _lloyd(points, k, rng, max_iter, tol):
    centers = _kmeans_pp_init(points, k, rng)
    labels, dists, centers, _ = _assign_with_repair(points, centers)
    history = [float(dists.sum())]
    for _ in range(max_iter):
        sums, counts = backend.accumulate_clusters(points, labels, k)
        new_centers = sums / counts[:, None]
        movement = float(
            np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max()
        )
        centers = new_centers
        new_labels, dists, centers, repaired = _assign_with_repair(points, centers)
        history.append(float(dists.sum()))
        stable = not repaired and np.array_equal(new_labels, labels)
        labels = new_labels
        if stable or movement < tol:
            break
    return labels, centers, history


def _snap_uniform_clusters(points, labels, centers):
    """Pin zero-variance clusters to their shared column.

    Sum-then-divide means of bitwise-identical members can be an ulp off,
    which would break exact restoration of duplicated channels.
    """
    centers = centers.copy()
    for j in range(centers.shape[0]):
        members = points[labels == j]
        if members.shape[0] and (members == members[0]).all():
            centers[j] = members[0]
    return centers


def _kmeans_pp_init(points, k, rng):
    """Seeded k-means++: D^2-weighted sampling via inverse-CDF lookup.

    When residual distances are all zero (fewer distinct channels than k),
    falls back to the lowest-index channel not yet chosen.
    """
    n = points.shape[0]
    chosen = np.empty(k, np.int64)
    taken = np.zeros(n, bool)

    first = int(rng.integers(n))
    chosen[0] = first
    taken[first] = True
    d2 = backend.pairwise_sq_dists(points, points[first : first + 1])[:, 0].copy()
    d2[first] = 0.0

    for i in range(1, k):
        cum = np.cumsum(d2)
        total = float(cum[-1])
        if total > 0.0:
            u = float(rng.random()) * total
            idx = int(np.searchsorted(cum, u, side="right"))
            idx = min(idx, n - 1)
            while d2[idx] == 0.0 and idx < n - 1:
                idx += 1
            if d2[idx] == 0.0:
                idx = int(np.argmax(d2 > 0.0))
        else:
            idx = int(np.argmin(taken))
        chosen[i] = idx
        taken[idx] = True
        nd = backend.pairwise_sq_dists(points, points[idx : idx + 1])[:, 0]
        d2 = np.minimum(d2, nd)
        d2[idx] = 0.0
    return points[chosen].copy()


def _assign_with_repair(points, centers):
    """Nearest-centroid assignment, then re-seed any empty cluster with the
    globally farthest unclaimed point. Returns (labels, sq dists, centers, repaired)."""
    labels, dists = backend.assign_labels(points, centers)
    k = centers.shape[0]
    counts = np.bincount(labels, minlength=k)
    if counts.min() > 0:
        return labels, dists, centers, False

    centers = centers.copy()
    claimed = np.zeros(points.shape[0], bool)
    while True:
        empties = np.flatnonzero(counts == 0)
        if empties.size == 0:
            return labels, dists, centers, True
        for j in empties:
            candidates = np.where(claimed, -np.inf, dists)
            i = int(np.argmax(candidates))
            counts[labels[i]] -= 1
            counts[j] += 1
            labels[i] = j
            centers[j] = points[i]
            dists[i] = 0.0
            claimed[i] = True


def restore_from_clusters(c: ChannelClustering, rows: int, cols: int) -> np.ndarray:
    """Expand a clustering back to a full matrix: column j = centroid of label j."""
    c.validate()
    if c.centroids.shape[0] != rows:
        raise ShapeError(
            f"clustering has centroid length {c.centroids.shape[0]}, expected {rows}"
        )
    if c.labels.shape[0] != cols:
        raise ShapeError(f"clustering has {c.labels.shape[0]} labels, expected {cols}")
    return np.ascontiguousarray(c.centroids[:, c.labels])


def residual(w, w_restored) -> np.ndarray:
    """Element-wise difference between the original and its restoration."""
    w = as_matrix(w, "w")
    w_restored = as_matrix(w_restored, "w_restored")
    if w.shape != w_restored.shape:
        raise ShapeError(f"shape mismatch: {w.shape} vs {w_restored.shape}")
    return w - w_restored


def compensate(err, r: int) -> LowRankFactors:
    """Best rank-r approximation of the residual, stored as split factors.

    The square root of each retained singular value is folded into both
    factors. r = 0 returns empty factors.
    """
    err = as_matrix(err, "err")
    m, n = err.shape
    if not 0 <= int(r) == r:
        raise ParameterError(f"rank must be a non-negative integer, got {r!r}")
    r = int(r)
    if r > min(m, n):
        raise ParameterError(f"rank {r} exceeds min(m, n) = {min(m, n)}")
    if r == 0:
        return LowRankFactors(
            r=0,
            a_factor=np.zeros((m, 0)),
            b_factor=np.zeros((0, n)),
            retained_singular_values=np.zeros(0),
        )
    res = truncated_svd(err, r)
    root = np.sqrt(res.singular_values)
    return LowRankFactors(
        r=r,
        a_factor=res.left_vectors * root[None, :],
        b_factor=root[:, None] * res.right_vectors,
        retained_singular_values=res.singular_values.copy(),
    )


def _narrow(values: np.ndarray, dtype, what: str) -> np.ndarray:
    """Round to the nearest value representable at the storage width."""
    narrowed = values.astype(dtype)
    if not np.all(np.isfinite(narrowed)):
        raise ParameterError(f"{what} exceed the {np.dtype(dtype).name} range")
    return narrowed.astype(np.float64)


def compress(w, k: int, r: int, seed: int, precision: str = "float16",
             max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
             restarts: int = 1) -> CompressedWeight:
    """Full pipeline: cluster channels, round the codebook to its storage
    precision, compensate the resulting error with rank-r factors.

    Centroids are rounded *before* the residual is computed, so the factors
    compensate storage error as well; factors are rounded after the SVD.
    Deterministic for fixed arguments.
    """
    w = as_matrix(w, "w")
    if precision not in PRECISION_DTYPES:
        raise ParameterError(
            f"precision must be one of {sorted(PRECISION_DTYPES)}, got {precision!r}"
        )
    dtype = PRECISION_DTYPES[precision]
    m, n = w.shape

    clustering = kmeans_channels(w, k, seed, max_iter=max_iter, tol=tol,
                                 restarts=restarts)
    clustering = replace(
        clustering, centroids=_narrow(clustering.centroids, dtype, "centroids")
    )
    restored = restore_from_clusters(clustering, m, n)
    factors = compensate(residual(w, restored), r)
    if factors.r > 0:
        factors = LowRankFactors(
            r=factors.r,
            a_factor=_narrow(factors.a_factor, dtype, "factors"),
            b_factor=_narrow(factors.b_factor, dtype, "factors"),
            retained_singular_values=_narrow(
                factors.retained_singular_values, np.float32, "singular values"
            ),
        )
    return CompressedWeight(
        rows=m,
        cols=n,
        clustering=clustering,
        factors=factors,
        codebook_precision=precision,
        seed=int(seed),
    )


def decompress(c: CompressedWeight) -> np.ndarray:
    """Restore the matrix: codebook expansion plus the factor product."""
    c.validate()
    out = restore_from_clusters(c.clustering, c.rows, c.cols)
    if c.factors.r > 0:
        out = out + c.factors.product()
    return out
