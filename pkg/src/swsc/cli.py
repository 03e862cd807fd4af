"""Command-line front end.

Subcommands: compress, decompress, stats, compare, gen-synthetic.
Exit codes: 0 success, 1 bad arguments, 2 format error, 3 numerical failure.
Outputs are written atomically (temp file + rename), so a failing command
never leaves a partial file behind.
"""

import argparse
import sys

from . import archive, metrics
from .baseline import GRANULARITIES
from .compressor import DEFAULT_MAX_ITER, DEFAULT_TOL, compress, decompress
from .errors import (
    FormatError,
    IntegrityError,
    NumericalError,
    ParameterError,
    ShapeError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reports argument problems via exit(2); remap them to exit 1."""

    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="swsc",
        description="Compress dense weight matrices with channel-clustering "
        "codebooks plus low-rank error compensation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("compress", help="compress a weight file into an archive")
    p.add_argument("input", help="input weight file (WMAT)")
    p.add_argument("output", help="output archive (SWSC)")
    p.add_argument("--clusters", type=int, required=True, metavar="K",
                   help="number of channel clusters (>= 1)")
    p.add_argument("--rank", type=int, required=True, metavar="R",
                   help="retained rank for error compensation (>= 0)")
    p.add_argument("--seed", type=int, default=0, help="clustering seed")
    p.add_argument("--dtype", choices=("float16", "float32"), default="float16",
                   help="storage width for centroids and factors")
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER,
                   help="Lloyd iteration cap")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="centroid-movement convergence threshold")
    p.add_argument("--restarts", type=int, default=1,
                   help="independent k-means runs; best objective wins")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore a weight file from an archive")
    p.add_argument("input", help="input archive (SWSC)")
    p.add_argument("output", help="output weight file (WMAT)")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("stats", help="print the storage report of an archive")
    p.add_argument("archive", help="archive to inspect (header only)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compare", help="compare against the RTN baseline")
    p.add_argument("input", help="input weight file (WMAT)")
    p.add_argument("--clusters", type=int, required=True, metavar="K")
    p.add_argument("--rank", type=int, required=True, metavar="R")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rtn-bits", type=int, default=2,
                   help="RTN bit width in [2, 8]")
    p.add_argument("--granularity", choices=GRANULARITIES, default="per-column",
                   help="RTN grouping")
    p.add_argument("--dtype", choices=("float16", "float32"), default="float16",
                   help="codebook storage width")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-synthetic", help="write a synthetic clustered weight file")
    p.add_argument("output", help="output weight file (WMAT)")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--true-clusters", type=int, required=True,
                   help="number of generating centers")
    p.add_argument("--noise", type=float, default=0.0,
                   help="per-entry Gaussian noise standard deviation")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen_synthetic)

    return parser


def cmd_compress(args) -> int:
    w = archive.read_weight(args.input)
    c = compress(
        w,
        k=args.clusters,
        r=args.rank,
        seed=args.seed,
        precision=args.dtype,
        max_iter=args.max_iter,
        tol=args.tol,
        restarts=args.restarts,
    )
    archive.write_archive(args.output, c)
    report = metrics.avg_bits(
        c.rows, c.cols, c.clustering.k, c.factors.r,
        32 if args.dtype == "float32" else 16,
    )
    print(report.as_table())
    print(report.as_kv())
    return EXIT_OK


def cmd_decompress(args) -> int:
    c = archive.read_archive(args.input)
    w = decompress(c)
    archive.write_weight(args.output, w, dtype=c.codebook_precision)
    return EXIT_OK


def cmd_stats(args) -> int:
    info = archive.read_archive_info(args.archive)
    report = metrics.avg_bits(info.rows, info.cols, info.k, info.r, info.value_bits)
    print(report.as_table())
    print(report.as_kv())
    return EXIT_OK


def cmd_compare(args) -> int:
    w = archive.read_weight(args.input)
    report = metrics.compare(
        w,
        k=args.clusters,
        r=args.rank,
        seed=args.seed,
        rtn_bits=args.rtn_bits,
        granularity=args.granularity,
        precision=args.dtype,
    )
    print(report.as_table())
    print(report.as_kv())
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    w = metrics.gen_synthetic(
        args.rows, args.cols, args.true_clusters, args.noise, args.seed
    )
    archive.write_weight(args.output, w, dtype="float32")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"swsc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"swsc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, IntegrityError, ShapeError) as exc:
        print(f"swsc: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"swsc: cannot access file: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except NumericalError as exc:
        print(f"swsc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
