"""Command line: verify suites, evaluate expressions, list suites and sections.

Exit codes: 0 all checks pass, 1 some check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .formlang import CONTEXTS, FormLangError, degree, elaborate, parse, to_text
from .exterior_algebra import format_form

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="palatini-eds", description="Exact verification of the Palatini EDS computations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", required=True)
    v.add_argument("--dim", type=int, required=True)
    v.add_argument("--eta", default=None, help="signature literal over +/-, default -+..+")
    v.add_argument("--report", default=None, help="YAML report path; a .json copy is written alongside")
    v.add_argument("--golden", action="store_true", help="omit timing fields from the report")
    e = sub.add_parser("eval", help="parse, elaborate and print an expression")
    e.add_argument("--context", required=True, choices=CONTEXTS)
    e.add_argument("--dim", type=int, required=True)
    e.add_argument("--eta", default=None)
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--expr")
    src.add_argument("--file")
    e.add_argument("--normalize", action="store_true", help="print the fully expanded normal form")
    e.add_argument("--free", action="append", default=[], metavar="I=V", help="value for a free index letter")
    sub.add_parser("list-suites", help="list registered suites")
    sub.add_parser("list-sections", help="list catalogue sections and metrics")
    return p


def _verify(args) -> int:
    from .suites import SUITES, UnsupportedDimension, run_suite

    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; registered suites:", file=sys.stderr)
        for name in SUITES:
            print(f"  {name}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rep = run_suite(args.suite, args.dim, args.eta)
    except (UnsupportedDimension, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for c in rep.checks:
        line = f"[{c.status.upper()}] {c.name}"
        if not c.passed and c.residual:
            line += f"  -- {c.residual}"
        print(line)
    print(f"{rep.suite} n={rep.dim} eta={rep.eta}: {rep.passed}/{len(rep.checks)} checks pass")
    if args.report:
        y, j = rep.write(args.report, golden=args.golden)
        print(f"report written to {y} and {j}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def _eval(args) -> int:
    if args.dim < 1:
        print("error: --dim must be positive", file=sys.stderr)
        return EXIT_USAGE
    text = args.expr if args.expr is not None else Path(args.file).read_text(encoding="utf-8")
    free = {}
    for item in args.free:
        k, _, v = item.partition("=")
        if not v.isdigit():
            print(f"error: --free expects I=V, got {item!r}", file=sys.stderr)
            return EXIT_USAGE
        free[k.strip()] = int(v)
    try:
        ast = parse(text)
        deg = degree(ast, args.dim)
        print(f"expression: {to_text(ast)}")
        print(f"degree: {deg}")
        if args.normalize:
            form = elaborate(ast, args.context, args.dim, args.eta, free=free)
            print(f"normal form: {format_form(form)}")
    except FormLangError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def _list_suites() -> int:
    from .suites import SUITES

    for name, s in SUITES.items():
        dims = ",".join(str(d) for d in s.dims)
        print(f"{name:28s} n in {{{dims}}}  {s.summary}")
    return EXIT_OK


def _list_sections() -> int:
    from .frame_geometry import SECTION_CATALOGUE
    from .reduction import METRIC_CATALOGUE

    print("jet sections (vacuum-sections suite):")
    for name, desc in SECTION_CATALOGUE.items():
        print(f"  {name:16s} {desc}")
    print("metrics (levi-civita suite):")
    for name, (dim, desc) in METRIC_CATALOGUE.items():
        print(f"  {name:16s} n = {dim}: {desc}")
    return EXIT_OK


def _join_signature(argv: list) -> list:
    # "--eta -+++" would otherwise be read as an option flag
    out = []
    it = iter(argv)
    for a in it:
        if a == "--eta":
            nxt = next(it, None)
            out.append(a if nxt is None else f"--eta={nxt}")
        else:
            out.append(a)
    return out


def main(argv=None) -> int:
    argv = _join_signature(sys.argv[1:] if argv is None else list(argv))
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "verify":
        return _verify(args)
    if args.command == "eval":
        return _eval(args)
    if args.command == "list-suites":
        return _list_suites()
    return _list_sections()


if __name__ == "__main__":
    raise SystemExit(main())
