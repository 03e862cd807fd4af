"""Storage accounting, error metrics, the synthetic clustered-matrix
generator, and the side-by-side comparison against the RTN baseline.

Two average-bits conventions coexist. ``avg_bits_paper`` counts codebook
and factor values only (the convention behind the published per-cluster /
per-rank stride table: at m = n = 4096 and 16-bit values, +128 clusters or
+64 ranks each add exactly 0.5 bits). ``avg_bits_total`` additionally
charges the label vector at ceil(log2 k) bits per channel.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .baseline import RtnConfig, rtn_quantize_dequantize
from .compressor import PRECISION_DTYPES, compress, decompress
from .core import as_matrix, frobenius_norm
from .errors import ParameterError, ShapeError

PRECISION_BITS = {"float32": 32, "float16": 16}


def _kv_block(pairs) -> str:
    return "\n".join(f"{key}={_fmt(value)}" for key, value in pairs)


def _table_block(title, pairs) -> str:
    width = max(len(key) for key, _ in pairs)
    lines = [title]
    lines += [f"  {key.ljust(width)}  {_fmt(value)}" for key, value in pairs]
    return "\n".join(lines)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class StorageReport:
    """Bit-budget breakdown for one compressed matrix."""

    codebook_bits: int
    factor_bits: int
    label_bits: int
    total_bits: int
    avg_bits_paper: float
    avg_bits_total: float
    compression_ratio: float

    _FIELDS = (
        "codebook_bits",
        "factor_bits",
        "label_bits",
        "total_bits",
        "avg_bits_paper",
        "avg_bits_total",
        "compression_ratio",
    )

    def _pairs(self):
        return [(name, getattr(self, name)) for name in self._FIELDS]

    def as_kv(self) -> str:
        return _kv_block(self._pairs())

    def as_table(self) -> str:
        return _table_block("storage report", self._pairs())


@dataclass(frozen=True)
class ComparisonReport:
    """Error and budget figures for the clustering pipeline vs RTN on one matrix."""

    swsc_mse: float
    rtn_mse: float
    swsc_frobenius_rel: float
    rtn_frobenius_rel: float
    swsc_avg_bits: float
    rtn_avg_bits: float
    k: int
    r: int
    seed: int
    bits: int
    granularity: str

    _FIELDS = (
        "swsc_mse",
        "rtn_mse",
        "swsc_frobenius_rel",
        "rtn_frobenius_rel",
        "swsc_avg_bits",
        "rtn_avg_bits",
        "k",
        "r",
        "seed",
        "bits",
        "granularity",
    )

    def _pairs(self):
        return [(name, getattr(self, name)) for name in self._FIELDS]

    def as_kv(self) -> str:
        return _kv_block(self._pairs())

    def as_table(self) -> str:
        return _table_block("comparison report", self._pairs())


def _check_count(value, name, minimum):
    if not minimum <= int(value) == value:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def avg_bits(m: int, n: int, k: int, r: int, value_bits: int,
             include_labels: bool = True) -> StorageReport:
    """Storage accounting for an m-by-n matrix compressed with k clusters
    and rank-r factors at the given value width.

    ``k = 0`` means clustering disabled (factor-only accounting; no codebook
    and no labels). When ``include_labels`` is false, the label cost is left
    out of ``label_bits`` and the totals so callers can count it separately.

    All averages are computed in exact rational arithmetic before the final
    float conversion. ``compression_ratio`` counts stored values (labels
    counted one value per channel) against m*n.
    """
    m = _check_count(m, "m", 1)
    n = _check_count(n, "n", 1)
    k = _check_count(k, "k", 0)
    r = _check_count(r, "r", 0)
    if r > min(m, n):
        raise ParameterError(f"rank {r} exceeds min(m, n) = {min(m, n)}")
    if value_bits not in (16, 32):
        raise ParameterError(f"value_bits must be 16 or 32, got {value_bits!r}")

    codebook_bits = k * m * value_bits
    factor_bits = (m * r + r * n) * value_bits
    label_cost = n * (k - 1).bit_length() if k >= 1 else 0
    label_bits = label_cost if include_labels else 0
    total_bits = codebook_bits + factor_bits + label_bits

    elements = m * n
    avg_paper = Fraction(codebook_bits + factor_bits, elements)
    avg_total = Fraction(total_bits, elements)
    stored_values = k * m + (n if k >= 1 else 0) + (m + n) * r
    ratio = Fraction(stored_values, elements)

    return StorageReport(
        codebook_bits=codebook_bits,
        factor_bits=factor_bits,
        label_bits=label_bits,
        total_bits=total_bits,
        avg_bits_paper=float(avg_paper),
        avg_bits_total=float(avg_total),
        compression_ratio=float(ratio),
    )


def mse(a, b) -> float:
    """Mean over all elements of the squared difference."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def gen_synthetic(m: int, n: int, k_true: int, noise_sigma: float,
                  seed: int) -> np.ndarray:
    """Clustered test matrix: k_true Gaussian center columns, channels
    assigned round-robin (column j belongs to center j mod k_true), plus
    optional Gaussian noise. Deterministic for a fixed seed."""
    m = _check_count(m, "m", 1)
    n = _check_count(n, "n", 1)
    k_true = _check_count(k_true, "k_true", 1)
    seed = _check_count(seed, "seed", 0)
    if k_true > n:
        raise ParameterError(f"k_true={k_true} exceeds the number of columns {n}")
    if noise_sigma < 0:
        raise ParameterError(f"noise_sigma must be non-negative, got {noise_sigma}")

    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((m, k_true))
    w = centers[:, np.arange(n) % k_true]
    if noise_sigma > 0:
        w = w + noise_sigma * rng.standard_normal((m, n))
    return np.ascontiguousarray(w)


def compare(w, k: int, r: int, seed: int, rtn_bits: int,
            granularity: str = "per-column",
            precision: str = "float16") -> ComparisonReport:
    """Run both pipelines on ``w`` and report matched error/budget figures.

    The RTN budget is quoted as its integer bit width; the clustering budget
    is ``avg_bits_paper`` at the codebook storage width.
    """
    w = as_matrix(w, "w")
    if precision not in PRECISION_DTYPES:
        raise ParameterError(
            f"precision must be one of {sorted(PRECISION_DTYPES)}, got {precision!r}"
        )
    m, n = w.shape

    restored = decompress(compress(w, k, r, seed, precision=precision))
    rtn_restored = rtn_quantize_dequantize(
        w, RtnConfig(bits=rtn_bits, granularity=granularity)
    )

    w_norm = frobenius_norm(w)
    swsc_err = frobenius_norm(w - restored)
    rtn_err = frobenius_norm(w - rtn_restored)
    report = avg_bits(m, n, k, r, PRECISION_BITS[precision])

    return ComparisonReport(
        swsc_mse=mse(w, restored),
        rtn_mse=mse(w, rtn_restored),
        swsc_frobenius_rel=swsc_err / w_norm if w_norm > 0 else 0.0,
        rtn_frobenius_rel=rtn_err / w_norm if w_norm > 0 else 0.0,
        swsc_avg_bits=report.avg_bits_paper,
        rtn_avg_bits=float(rtn_bits),
        k=int(k),
        r=int(r),
        seed=int(seed),
        bits=int(rtn_bits),
        granularity=granularity,
    )


@dataclass(frozen=True)
class MatchedBudget:
    """A (k, r) pair whose paper-convention average bits best match a target."""

    k: int
    r: int
    avg_bits_paper: float
    gap: float


def matched_budget(m: int, n: int, target_bits, value_bits: int = 16) -> MatchedBudget:
    """Find the (k, r) pair whose ``avg_bits_paper`` is closest to the target.

    Scans every feasible rank; for each, picks the best integer cluster
    count in [1, n]. Ties prefer the smaller rank, then the smaller k. Gap
    comparisons use exact rational arithmetic.
    """
    m = _check_count(m, "m", 1)
    n = _check_count(n, "n", 1)
    if value_bits not in (16, 32):
        raise ParameterError(f"value_bits must be 16 or 32, got {value_bits!r}")
    target = Fraction(target_bits)
    if target <= 0:
        raise ParameterError(f"target_bits must be positive, got {target_bits!r}")

    best = None
    elements = m * n
    for r in range(min(m, n) + 1):
        factor_vals = (m + n) * r
        # ideal k solves (k*m + factor_vals) * value_bits == target * elements
        ideal = (target * elements / value_bits - factor_vals) / m
        for k in sorted({max(1, min(n, int(ideal))), max(1, min(n, int(ideal) + 1))}):
            gap = abs(Fraction((k * m + factor_vals) * value_bits, elements) - target)
            key = (gap, r, k)
            if best is None or key < best[0]:
                avg = Fraction((k * m + factor_vals) * value_bits, elements)
                best = (key, MatchedBudget(k=k, r=r, avg_bits_paper=float(avg),
                                           gap=float(gap)))
    return best[1]
