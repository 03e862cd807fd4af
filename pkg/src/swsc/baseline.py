"""Round-to-nearest uniform quantization, the comparison baseline.

Simulated quantization: values are snapped to an asymmetric min-max grid
and returned dequantized, so error can be measured directly against the
original matrix.
"""

from dataclasses import dataclass

import numpy as np

from .core import as_matrix
from .errors import ParameterError

GRANULARITIES = ("per-tensor", "per-column")
SCHEME = "asymmetric-minmax"


@dataclass(frozen=True)
class RtnConfig:
    """Bit width and grouping for the RTN baseline."""

    bits: int
    granularity: str = "per-column"
    scheme: str = SCHEME

    def __post_init__(self):
        if not 2 <= int(self.bits) == self.bits <= 8:
            raise ParameterError(f"bits must be an integer in [2, 8], got {self.bits!r}")
        if self.granularity not in GRANULARITIES:
            raise ParameterError(
                f"granularity must be one of {GRANULARITIES}, got {self.granularity!r}"
            )
        if self.scheme != SCHEME:
            raise ParameterError(f"unsupported scheme {self.scheme!r}")


def rtn_quantize_dequantize(w, cfg: RtnConfig) -> np.ndarray:
    """Quantize to a 2^bits-level min-max grid per group and dequantize back.

    Per group: scale = (max - min) / (2^bits - 1), zero point = min; each
    value becomes zero + round((v - zero)/scale) * scale, clamped to the
    grid. A group with max == min comes back as that constant exactly.
    """
    w = as_matrix(w, "w")
    levels = (1 << cfg.bits) - 1
    if cfg.granularity == "per-tensor":
        lo = np.full(w.shape[1], w.min())
        hi = np.full(w.shape[1], w.max())
    else:
        lo = w.min(axis=0)
        hi = w.max(axis=0)

    span = hi - lo
    nondegenerate = span > 0.0
    scale = np.where(nondegenerate, span / levels, 1.0)
    q = np.clip(np.round((w - lo[None, :]) / scale[None, :]), 0.0, float(levels))
    deq = lo[None, :] + q * scale[None, :]
    return np.where(nondegenerate[None, :], deq, lo[None, :])
