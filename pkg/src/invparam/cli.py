"""Command-line front end: ``invparam <subcommand> [flags]``.

Exit status: 0 all cases pass symbolically, 1 some case is nonzero or
errored, 2 everything passes but some verdicts are only numeric, 3 usage or
parse error.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional, Sequence

from . import suites
from .jet import OrderOverflow, set_max_order
from .report import EXIT_USAGE, SuiteReport
from .symcore.parse import ParseError
from .symcore.zero import configure

SUBCOMMANDS = (
    "verify-commutators",
    "verify-adjoint",
    "verify-g0",
    "verify-invariants",
    "verify-equivalence",
    "verify-tables",
    "check",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="invparam", description="Verify Lie symmetry and equivalence claims for the vorticity equation class.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
    p.add_argument("--max-order", type=int, default=6, help="global jet order cap (default 6)")
    p.add_argument("--numeric-precision", type=int, default=128, help="bits for numeric zero testing (default 128)")
    p.add_argument("--suite", default=None, help="restrict to a catalog, part or case-label prefix (comma separated)")
    p.add_argument("--table", choices=("1", "2", "3", "4"), action="append", help="table to verify (repeatable)")
    p.add_argument("--file", default=None, help="check file for the check subcommand")
    p.add_argument("--generator", action="append", default=[], help="extra generator 'x: ...; psi: ...' for check")
    p.add_argument("--printed", action="store_true", help="run the printed variants of corrected entries")
    p.add_argument("--no-perturb", action="store_true", help="skip the perturbation controls of verify-tables")
    p.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")
    return p


def _names(s: Optional[str]) -> List[str]:
    return [n.strip() for n in s.split(",") if n.strip()] if s else []


def _filter(rep: SuiteReport, prefixes: List[str]) -> SuiteReport:
    if not prefixes:
        return rep
    out = SuiteReport(rep.suite, [c for c in rep.cases if any(c.case.startswith(p) for p in prefixes)])
    if not out.cases:
        raise UsageError("--suite %s matches no case" % ",".join(prefixes))
    return out


def execute(args: argparse.Namespace) -> SuiteReport:
    if args.max_order < 3:
        raise UsageError("--max-order must be at least 3")
    if args.numeric_precision < 53:
        raise UsageError("--numeric-precision must be at least 53")
    if args.workers < 1:
        raise UsageError("--workers must be positive")
    set_max_order(args.max_order)
    configure(seed=args.seed, prec_bits=args.numeric_precision)
    sel = _names(args.suite)
    cmd = args.subcommand
    if cmd != "check" and (args.file or args.generator):
        raise UsageError("--file and --generator belong to the check subcommand")
    if args.table and cmd != "verify-tables":
        raise UsageError("--table belongs to verify-tables")

    if cmd == "verify-commutators":
        return _filter(suites.commutators(args.printed, args.workers), sel)
    if cmd == "verify-adjoint":
        return _filter(suites.adjoint_suite(args.printed, workers=args.workers), sel)
    if cmd == "verify-g0":
        return _filter(suites.g0_suite(workers=args.workers), sel)
    if cmd == "verify-invariants":
        try:
            return suites.invariants_suite(sel or None, args.printed)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if cmd == "verify-equivalence":
        try:
            return suites.equivalence_suite(sel or None, seed=args.seed)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if cmd == "verify-tables":
        rep = suites.tables_suite(args.table, args.printed, not args.no_perturb, args.workers)
        return _filter(rep, sel)
    # check
    if not args.file and not args.generator:
        raise UsageError("check needs --file (and optionally --generator)")
    text = ""
    if args.file:
        try:
            with open(args.file, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError("cannot read %s: %s" % (args.file, exc.strerror)) from None
    return _filter(suites.check_suite(text, args.generator), sel)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        rep = execute(args)
    except (UsageError, suites.CheckFileError, ParseError, OrderOverflow) as exc:
        print("invparam: error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    print(rep.to_json() if args.json else rep.to_text())
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
