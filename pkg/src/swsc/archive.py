"""Bit-exact on-disk formats.

Weight container ("WMAT"):

    magic    4 bytes  b"WMAT"
    version  u32 LE   1
    rows     u64 LE
    cols     u64 LE
    dtype    u8       0 = float32, 1 = float16
    padding  7 zero bytes
    payload  rows*cols values, row-major, little-endian

Compressed archive ("SWSC"):

    magic    4 bytes  b"SWSC"
    version  u32 LE   1
    rows     u64 LE
    cols     u64 LE
    k        u32 LE   cluster count (>= 1, <= 65535)
    r        u32 LE   retained rank
    dtype    u8       0 = float32, 1 = float16 (centroids and factors)
    labelw   u8       label width in bytes, fixed 2 (u16 labels)
    padding  6 zero bytes
    seed     u64 LE
    labels      cols u16 LE values
    centroids   k*rows values (centroid 0 first, each of length rows)
    a_factor    rows*r values, row-major
    b_factor    r*cols values, row-major
    sigma       r float32 values (retained singular values, diagnostic)

Section lengths are fully determined by the header; trailing bytes are an
error. All multi-byte fields are little-endian.
"""

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compressor import ChannelClustering, CompressedWeight, LowRankFactors
from .core import as_matrix
from .errors import FormatError, ParameterError

WEIGHT_MAGIC = b"WMAT"
ARCHIVE_MAGIC = b"SWSC"
FORMAT_VERSION = 1
MAX_CLUSTERS = 0xFFFF

_WEIGHT_HEADER = struct.Struct("<4sIQQB7s")
_ARCHIVE_HEADER = struct.Struct("<4sIQQIIBB6sQ")
_LABEL_DTYPE = np.dtype("<u2")
_SIGMA_DTYPE = np.dtype("<f4")
_LABEL_WIDTH = 2

_CODE_TO_DTYPE = {0: np.dtype("<f4"), 1: np.dtype("<f2")}
_CODE_TO_PRECISION = {0: "float32", 1: "float16"}
_PRECISION_TO_CODE = {"float32": 0, "float16": 1}


@dataclass(frozen=True)
class ArchiveInfo:
    """Header fields of a compressed archive, readable without the payload."""

    rows: int
    cols: int
    k: int
    r: int
    precision: str
    seed: int

    @property
    def value_bits(self) -> int:
        return 32 if self.precision == "float32" else 16


def _atomic_write(path, data: bytes) -> None:
    """Write via a temp file in the same directory, rename on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _precision_code(precision: str) -> int:
    if precision not in _PRECISION_TO_CODE:
        raise ParameterError(
            f"dtype must be one of {sorted(_PRECISION_TO_CODE)}, got {precision!r}"
        )
    return _PRECISION_TO_CODE[precision]


def _narrow_exact(values: np.ndarray, dtype: np.dtype) -> bytes:
    return np.ascontiguousarray(values).astype(dtype).tobytes()


def write_weight(path, w, dtype: str = "float32") -> None:
    """Serialize a matrix; 16-bit narrowing rounds to nearest-even."""
    w = as_matrix(w, "w")
    code = _precision_code(dtype)
    header = _WEIGHT_HEADER.pack(
        WEIGHT_MAGIC, FORMAT_VERSION, w.shape[0], w.shape[1], code, b"\0" * 7
    )
    _atomic_write(path, header + _narrow_exact(w, _CODE_TO_DTYPE[code]))


def read_weight(path) -> np.ndarray:
    """Load a weight container back as a float64 matrix."""
    data = Path(path).read_bytes()
    if len(data) < _WEIGHT_HEADER.size:
        raise FormatError(
            f"weight file truncated: {len(data)} bytes, header needs "
            f"{_WEIGHT_HEADER.size}", offset=len(data)
        )
    magic, version, rows, cols, code, pad = _WEIGHT_HEADER.unpack_from(data)
    if magic != WEIGHT_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {WEIGHT_MAGIC!r}", offset=0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if rows < 1 or cols < 1:
        raise FormatError(f"invalid dimensions {rows}x{cols}", offset=8)
    if code not in _CODE_TO_DTYPE:
        raise FormatError(f"unknown dtype code {code}", offset=24)
    if pad != b"\0" * 7:
        raise FormatError("nonzero padding", offset=25)

    dtype = _CODE_TO_DTYPE[code]
    expected = _WEIGHT_HEADER.size + rows * cols * dtype.itemsize
    if len(data) != expected:
        raise FormatError(
            f"payload length mismatch: file has {len(data)} bytes, header "
            f"implies {expected}", offset=min(len(data), expected)
        )
    payload = np.frombuffer(data, dtype=dtype, offset=_WEIGHT_HEADER.size)
    return payload.astype(np.float64).reshape(rows, cols)


def write_archive(path, c: CompressedWeight) -> None:
    """Serialize a compressed weight; the round trip is bitwise at the
    declared storage dtype."""
    c.validate()
    if c.clustering.k > MAX_CLUSTERS:
        raise ParameterError(
            f"k={c.clustering.k} does not fit 16-bit labels (max {MAX_CLUSTERS})"
        )
    code = _precision_code(c.codebook_precision)
    dtype = _CODE_TO_DTYPE[code]
    if c.seed < 0:
        raise ParameterError(f"seed must be non-negative, got {c.seed}")

    header = _ARCHIVE_HEADER.pack(
        ARCHIVE_MAGIC, FORMAT_VERSION, c.rows, c.cols, c.clustering.k,
        c.factors.r, code, _LABEL_WIDTH, b"\0" * 6, c.seed,
    )
    parts = [
        header,
        c.clustering.labels.astype(_LABEL_DTYPE).tobytes(),
        _narrow_exact(c.clustering.centroids.T, dtype),
        _narrow_exact(c.factors.a_factor, dtype),
        _narrow_exact(c.factors.b_factor, dtype),
        _narrow_exact(c.factors.retained_singular_values, _SIGMA_DTYPE),
    ]
    _atomic_write(path, b"".join(parts))


def _parse_archive_header(data: bytes):
    if len(data) < _ARCHIVE_HEADER.size:
        raise FormatError(
            f"archive truncated: {len(data)} bytes, header needs "
            f"{_ARCHIVE_HEADER.size}", offset=len(data)
        )
    (magic, version, rows, cols, k, r, code, labelw, pad, seed) = \
        _ARCHIVE_HEADER.unpack_from(data)
    if magic != ARCHIVE_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {ARCHIVE_MAGIC!r}", offset=0)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if rows < 1 or cols < 1:
        raise FormatError(f"invalid dimensions {rows}x{cols}", offset=8)
    if k < 1:
        raise ParameterError("archive declares k=0; at least one cluster is required")
    if r > min(rows, cols):
        raise FormatError(f"rank {r} exceeds min(rows, cols)", offset=28)
    if code not in _CODE_TO_DTYPE:
        raise FormatError(f"unknown dtype code {code}", offset=32)
    if labelw != _LABEL_WIDTH:
        raise FormatError(f"unsupported label width {labelw}", offset=33)
    if pad != b"\0" * 6:
        raise FormatError("nonzero padding", offset=34)
    return rows, cols, k, r, code, seed


def _archive_sections(rows, cols, k, r, dtype):
    sizes = [
        cols * _LABEL_WIDTH,
        k * rows * dtype.itemsize,
        rows * r * dtype.itemsize,
        r * cols * dtype.itemsize,
        r * _SIGMA_DTYPE.itemsize,
    ]
    offsets = [_ARCHIVE_HEADER.size]
    for size in sizes:
        offsets.append(offsets[-1] + size)
    return sizes, offsets


def read_archive_info(path) -> ArchiveInfo:
    """Read and validate an archive header without touching payload values."""
    data = Path(path).read_bytes()
    rows, cols, k, r, code, seed = _parse_archive_header(data)
    dtype = _CODE_TO_DTYPE[code]
    _, offsets = _archive_sections(rows, cols, k, r, dtype)
    if len(data) != offsets[-1]:
        raise FormatError(
            f"section length mismatch: file has {len(data)} bytes, header "
            f"implies {offsets[-1]}", offset=min(len(data), offsets[-1])
        )
    return ArchiveInfo(rows=rows, cols=cols, k=k, r=r,
                       precision=_CODE_TO_PRECISION[code], seed=seed)


def read_archive(path) -> CompressedWeight:
    """Load a compressed archive back into memory (values widened to float64)."""
    data = Path(path).read_bytes()
    rows, cols, k, r, code, seed = _parse_archive_header(data)
    dtype = _CODE_TO_DTYPE[code]
    sizes, offsets = _archive_sections(rows, cols, k, r, dtype)
    if len(data) != offsets[-1]:
        raise FormatError(
            f"section length mismatch: file has {len(data)} bytes, header "
            f"implies {offsets[-1]}", offset=min(len(data), offsets[-1])
        )

    def section(index, sec_dtype):
        return np.frombuffer(data, dtype=sec_dtype, offset=offsets[index],
                             count=sizes[index] // sec_dtype.itemsize)

    labels = section(0, _LABEL_DTYPE).astype(np.int64)
    centroids = section(1, dtype).astype(np.float64).reshape(k, rows).T
    a_factor = section(2, dtype).astype(np.float64).reshape(rows, r)
    b_factor = section(3, dtype).astype(np.float64).reshape(r, cols)
    sigma = section(4, _SIGMA_DTYPE).astype(np.float64)

    c = CompressedWeight(
        rows=rows,
        cols=cols,
        clustering=ChannelClustering(
            k=k, labels=labels, centroids=np.ascontiguousarray(centroids)
        ),
        factors=LowRankFactors(
            r=r, a_factor=a_factor, b_factor=b_factor,
            retained_singular_values=sigma,
        ),
        codebook_precision=_CODE_TO_PRECISION[code],
        seed=seed,
    )
    c.validate()
    return c
