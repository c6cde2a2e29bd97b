#!/usr/bin/env python3
"""
sparsebound - sparsity of nonnegative integer solutions of A x = b.

Run: python app.py analyze matrix.txt
     python app.py solve matrix.txt --b 5,12 --mode ii
     python app.py sweep matrix.txt --t-schedule 6,12,24,48 --format xlsx --out sweep.xlsx

Exit codes: 0 ok, 1 infeasible / verification failed, 2 uncovered or
unsettled within caps, 3 library error, 4 unexpected error, 5 usage error.
"""

import argparse
import sys

EXIT_USAGE = 5

# Flags whose comma-separated value may start with a minus sign.
VALUE_FLAGS = ("--b",)


class SparseBoundArgumentParser(argparse.ArgumentParser):
    """Reports usage errors with EXIT_USAGE so they never read as a solver outcome."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def join_value_flags(argv):
    """Turn "--b -1,5" into "--b=-1,5"; argparse would read -1,5 as an option."""
    out = []
    args = list(argv)
    i = 0
    while i < len(args):
        if args[i] in VALUE_FLAGS and i + 1 < len(args):
            out.append(f"{args[i]}={args[i + 1]}")
            i += 2
        else:
            out.append(args[i])
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = SparseBoundArgumentParser(prog="sparsebound", description="Sparse IP solution bounds")
    parser.add_argument("--config", help="Config profile name (default: active config)")

    caps = SparseBoundArgumentParser(add_help=False)
    caps.add_argument("--cap-group", dest="cap_group", type=int, help="Residue group size cap")
    caps.add_argument("--cap-minors", dest="cap_minors", type=int, help="Minor / cover subset cap")
    caps.add_argument("--cap-box", dest="cap_box", type=int, help="Box points before sampling")
    caps.add_argument("--cap-oracle", dest="cap_oracle", type=int, help="Oracle enumeration point cap")
    caps.add_argument("--threads", type=int, help="Worker threads (overrides SPARSEBOUND_THREADS)")
    caps.add_argument("--out", help="Write the report to this path")

    planned = SparseBoundArgumentParser(add_help=False)
    planned.add_argument("--mode", choices=["i", "ii"], help="Bound mode (default: i)")
    planned.add_argument("--w-cols", dest="w_cols", help="Columns of A forming W, e.g. 0,1,3 (default: all)")

    schedule = SparseBoundArgumentParser(add_help=False)
    schedule.add_argument("--t-schedule", dest="t_schedule", help="Box radii, e.g. 6,12,24,48")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[caps], help="Minor statistics and bounds")
    p.add_argument("matrix")
    p.add_argument("--w-cols", dest="w_cols", help="Columns of A forming W")
    p.add_argument("--hilbert-basis", dest="hilbert_basis", action="store_true",
                   help="Assert the columns form a Hilbert basis of their cone")

    p = sub.add_parser("solve", parents=[caps, planned], help="Certified sparse solution")
    p.add_argument("matrix")
    p.add_argument("--b", required=True, help="Right-hand side, e.g. 5,12")

    p = sub.add_parser("sigma", parents=[caps], help="Exact support function by exhaustive search")
    p.add_argument("matrix")
    p.add_argument("--b", required=True, help="Right-hand side")

    p = sub.add_parser("sweep", parents=[caps, planned, schedule], help="Density sweep over boxes")
    p.add_argument("matrix")
    p.add_argument("--k-list", dest="k_list", help="Support sizes to count (default: 1..n)")
    p.add_argument("--epsilon", help="Tolerance for the k estimate, e.g. 1/100")
    p.add_argument("--seed", type=int, help="Seed for sampled boxes")
    p.add_argument("--sample-size", dest="sample_size", type=int, help="Points per sampled box")
    p.add_argument("--format", choices=["csv", "records", "xlsx"], help="Output format (default: csv)")

    p = sub.add_parser("lemma4", parents=[caps, planned, schedule], help="Translated-subcone density ratios")
    p.add_argument("matrix")

    p = sub.add_parser("gen", parents=[caps, schedule], help="Generate a primorial instance")
    p.add_argument("kind", choices=["Atilde", "A", "B"])
    p.add_argument("--d", type=int, required=True, help="Number of primes")
    p.add_argument("--primes", required=True, help="Distinct primes, e.g. 2,3")
    p.add_argument("--m", type=int, default=1, help="Rows of A (kinds A and B)")
    p.add_argument("--witnesses", type=int, help="List sigma = m+d witnesses in this box radius")

    p = sub.add_parser("verify", parents=[caps], help="Re-check certificate records")
    p.add_argument("matrix")
    p.add_argument("certificate")

    return parser


def run(argv=None) -> int:
    import time as _time

    _t_start = _time.perf_counter()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = build_parser().parse_args(join_value_flags(argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    if not hasattr(args, "matrix"):
        args.matrix = None

    from src.main import headless_main
    _t_import = _time.perf_counter()
    exit_code = headless_main(args)
    _t_done = _time.perf_counter()
    print(
        f"[TIMING] import: {_t_import - _t_start:.2f}s | "
        f"{args.command}: {_t_done - _t_import:.2f}s | total: {_t_done - _t_start:.2f}s",
        file=sys.stderr,
    )
    return exit_code


if __name__ == "__main__":
    sys.exit(run())
