"""Command-line entry point.

    flatpencil --n 2 --branch both --format text
    flatpencil --n 5 --branch minus --format json --out report.json

Exit codes: 0 all stages pass, 1 a stage failed (the report is still
emitted), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .numeric import DEFAULT_PRECISION_BITS, DEFAULT_SAMPLES, DEFAULT_SEED
from .pipeline import emit, run_branches


def _order(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer")
    if n < 2:
        raise argparse.ArgumentTypeError("the group order parameter must be greater than 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flatpencil",
        description=("Construct and verify the pair of Frobenius structures on the "
                     "orbit space of the dicyclic group of order 4n."))
    parser.add_argument("--n", type=_order, required=True,
                        help="half the polynomial degree parameter; group order is 4n (n >= 2)")
    parser.add_argument("--branch", choices=("plus", "minus", "both"), default="both")
    parser.add_argument("--format", choices=("text", "json", "latex"), default="text")
    parser.add_argument("--precision", type=int, default=DEFAULT_PRECISION_BITS,
                        help="working precision of the numeric backstop, in bits")
    parser.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                        help="random sample points per numeric confirmation")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--out", default=None, help="write the report to this path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    reports = run_branches(args.n, args.branch, args.precision, args.samples, args.seed)
    document = emit(reports, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(document)
    else:
        sys.stdout.write(document)
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
