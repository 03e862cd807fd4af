"""swsc: compress dense weight matrices by sharing one representative
column per cluster of similar channels, then compensating the introduced
error with a truncated-SVD low-rank correction.

Matrices are plain 2-D float64 numpy arrays. The hot kernels run through
numba when available; set SWSC_BACKEND=numpy to force the pure-numpy path
(see ``swsc.backend``).
"""

from .backend import active_backend
from .baseline import RtnConfig, rtn_quantize_dequantize
from .compressor import (
    ChannelClustering,
    CompressedWeight,
    LowRankFactors,
    compensate,
    compress,
    decompress,
    kmeans_channels,
    residual,
    restore_from_clusters,
)
from .core import SvdResult, frobenius_norm, matmul, svd_reconstruct, truncated_svd
from .errors import (
    FormatError,
    IntegrityError,
    NumericalError,
    ParameterError,
    ShapeError,
    SwscError,
)
from .archive import (
    ArchiveInfo,
    read_archive,
    read_archive_info,
    read_weight,
    write_archive,
    write_weight,
)
from .metrics import (
    ComparisonReport,
    MatchedBudget,
    StorageReport,
    avg_bits,
    compare,
    gen_synthetic,
    matched_budget,
    mse,
)

__version__ = "0.1.0"

__all__ = [
    "ArchiveInfo",
    "ChannelClustering",
    "ComparisonReport",
    "CompressedWeight",
    "FormatError",
    "IntegrityError",
    "LowRankFactors",
    "MatchedBudget",
    "NumericalError",
    "ParameterError",
    "RtnConfig",
    "ShapeError",
    "StorageReport",
    "SvdResult",
    "SwscError",
    "active_backend",
    "avg_bits",
    "compare",
    "compensate",
    "compress",
    "decompress",
    "frobenius_norm",
    "gen_synthetic",
    "kmeans_channels",
    "matched_budget",
    "matmul",
    "mse",
    "read_archive",
    "read_archive_info",
    "read_weight",
    "residual",
    "restore_from_clusters",
    "rtn_quantize_dequantize",
    "svd_reconstruct",
    "truncated_svd",
    "write_archive",
    "write_weight",
]
