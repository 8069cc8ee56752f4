"""Command line entry point: ``bvalid check <project-file>``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .errors import BError
from .ingest import Dialect
from .project import EXIT_ERROR, load_project, run_project, with_overrides, write_reports
from .report import FORMATS


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bvalid", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="verify a project's data against its rules")
    chk.add_argument("project", help="project configuration file")
    chk.add_argument("--out", help="output directory (overrides 'output')")
    chk.add_argument("--format", action="append", choices=FORMATS, dest="formats",
                     help="report format; repeat for several (overrides 'formats')")
    chk.add_argument("--max-ce", type=_positive, help="max counterexamples per block")
    chk.add_argument("--jobs", type=_positive, help="worker processes for rule evaluation")
    chk.add_argument("--delimiter", help="CSV delimiter character")
    chk.add_argument("--figures", action="store_true", default=None,
                     help="also render summary figures as PNG files")
    chk.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = load_project(args.project)
    except (BError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    dialect = None
    if args.delimiter is not None:
        delim = "\t" if args.delimiter == "\\t" else args.delimiter
        if len(delim) != 1:
            print("error: --delimiter must be a single character", file=sys.stderr)
            return EXIT_ERROR
        dialect = Dialect(delim, config.dialect.quotechar)
    config = with_overrides(
        config,
        output=args.out,
        formats=tuple(dict.fromkeys(args.formats)) if args.formats else None,
        max_findings=args.max_ce,
        jobs=args.jobs,
        dialect=dialect,
        figures=args.figures,
    )
    report, code = run_project(config)
    for d in report.diagnostics:
        print(f"error: {d}", file=sys.stderr)
    for issue in report.data_issues:
        print(f"data issue: {issue}", file=sys.stderr)
    for r in report.results:
        if r.error is not None:
            print(f"rule {r.rule_id}: {r.error}", file=sys.stderr)
    try:
        paths = write_reports(report, config)
    except OSError as e:
        print(f"error: cannot write report: {e}", file=sys.stderr)
        return EXIT_ERROR
    s = report.summary
    print(f"{s['rules']} rules: {s['pass']} PASS, {s['fail']} FAIL, {s['error']} ERROR, "
          f"{s['findings']} counterexamples ({report.elapsed:.1f} s)")
    for p in paths:
        print(f"wrote {p}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
