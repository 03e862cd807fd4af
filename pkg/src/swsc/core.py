"""Dense-matrix kernels the compression pipeline builds on.

Weight matrices are plain 2-D float64 numpy arrays (rows = m, cols = n,
row-major). All arithmetic here runs in float64 regardless of how values
are later stored on disk.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import NumericalError, ParameterError, ShapeError

SVD_CONVERGENCE_TOL = 1e-10
SVD_MAX_SWEEPS = 1000


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a C-contiguous float64 2-D array.

    Rejects empty dimensions and non-finite values.
    """
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class SvdResult:
    """The r dominant singular triplets of a matrix.

    ``left_vectors`` is m-by-r with orthonormal columns, ``singular_values``
    holds r non-negative values in non-increasing order, ``right_vectors``
    is r-by-n with orthonormal rows.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.singular_values.shape[0]


def matmul(a, b) -> np.ndarray:
    """Standard matrix product."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return backend.matmul(a, b)


def frobenius_norm(a) -> float:
    """Square root of the sum of squared entries."""
    a = as_matrix(a)
    return float(np.linalg.norm(a))


def svd_reconstruct(res: SvdResult) -> np.ndarray:
    """Rebuild left @ diag(s) @ right from a decomposition result."""
    if res.rank == 0:
        return np.zeros((res.left_vectors.shape[0], res.right_vectors.shape[1]))
    scaled = np.ascontiguousarray(res.left_vectors * res.singular_values[None, :])
    return backend.matmul(scaled, np.ascontiguousarray(res.right_vectors))


def truncated_svd(a, r: int, tol: float = SVD_CONVERGENCE_TOL,
                  max_sweeps: int = SVD_MAX_SWEEPS) -> SvdResult:
    """The r dominant singular triplets of ``a`` by one-sided Jacobi rotations.

    The reconstruction ``left @ diag(s) @ right`` is the best rank-r
    Frobenius approximation of ``a``. Output is deterministic: sweep order is
    fixed and each left singular vector has its largest-magnitude entry made
    positive (ties broken by the lowest index).
    """
    a = as_matrix(a)
    m, n = a.shape
    if not 1 <= int(r) == r:
        raise ParameterError(f"rank must be a positive integer, got {r!r}")
    r = int(r)
    if r > min(m, n):
        raise ParameterError(f"rank {r} exceeds min(m, n) = {min(m, n)}")

    transposed = m < n
    work = a.T if transposed else a

    # Rows of `cols` are the columns of `work`. Always a fresh copy: the
    # kernel rotates in place and must never touch the caller's array.
    cols = work.T.copy(order="C")
    rot = np.eye(work.shape[1])
    sweeps = backend.jacobi_sweeps(cols, rot, float(tol), int(max_sweeps))
    if sweeps < 0:
        worst = _worst_pair_ratio(cols)
        raise NumericalError(
            f"SVD did not converge in {max_sweeps} sweeps "
            f"(worst normalized column coupling {worst:.3e}, tol {tol:.1e})"
        )

    s = np.sqrt(np.einsum("ij,ij->i", cols, cols))
    order = np.argsort(-s, kind="stable")
    s = s[order][:r].copy()
    cols = cols[order][:r]
    right = rot[order][:r].copy()

    cutoff = max(m, n) * np.finfo(np.float64).eps * (s[0] if s.size else 0.0)
    left = np.empty((work.shape[0], r))
    missing = []
    for i in range(r):
        if s[i] > cutoff:
            left[:, i] = cols[i] / s[i]
        else:
            s[i] = 0.0
            missing.append(i)
    if missing:
        _fill_orthonormal(left, missing)

    if transposed:
        left, right = right.T.copy(), np.ascontiguousarray(left.T)

    for i in range(r):
        peak = int(np.argmax(np.abs(left[:, i])))
        if left[peak, i] < 0.0:
            left[:, i] = -left[:, i]
            right[i] = -right[i]
    return SvdResult(left_vectors=left, singular_values=s, right_vectors=right)


def _worst_pair_ratio(cols: np.ndarray) -> float:
    norms = np.sqrt(np.einsum("ij,ij->i", cols, cols))
    gram = np.abs(cols @ cols.T)
    np.fill_diagonal(gram, 0.0)
    denom = np.outer(norms, norms)
    denom[denom == 0.0] = 1.0
    return float((gram / denom).max())


def _fill_orthonormal(left: np.ndarray, missing: list[int]) -> None:
    """Replace zero-singular-value columns with a deterministic orthonormal completion.

    For each missing column, the canonical basis vector with the largest
    residual against the already-filled columns is orthogonalized and
    normalized in.
    """
    m = left.shape[0]
    filled = [i for i in range(left.shape[1]) if i not in missing]
    for idx in missing:
        basis = left[:, filled] if filled else np.zeros((m, 0))
        residuals = np.eye(m) - basis @ basis.T
        norms = np.sqrt(np.einsum("ij,ij->j", residuals, residuals))
        pick = int(np.argmax(norms))
        vec = residuals[:, pick]
        if filled:  # second orthogonalization pass for hygiene
            vec = vec - basis @ (basis.T @ vec)
        left[:, idx] = vec / np.linalg.norm(vec)
        filled.append(idx)
