"""Command-line front end.

Exit codes: 0/1/2 for equivalent/distinguished/unknown (``equiv``; other
commands return 0 on success), 64 for malformed input, 65 for a literal
outside the chosen carrier, 66 for an unreadable file, 70 for an internal
contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import lts
from .equivalence import DEFAULT_DEPTH, check_equiv, may_equiv, must_equiv
from .lts import ContractError
from .runs import outcome, runs
from .semiring import SEMIRING_IDS, CarrierError, format_value
from .syntax import ParseError, fresh_session, parse_term, print_term
from .traces import decompose, from_json, implement_trace, sync_count

EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66
EX_SOFTWARE = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 2 is reserved for UNKNOWN verdicts
        raise UsageError(message)


def _inputs(p: argparse.ArgumentParser, files: str) -> None:
    p.add_argument("-e", "--expr", action="append", default=[], metavar="TEXT", help="inline input (repeatable)")
    p.add_argument("files", nargs="*", metavar="FILE", help=files)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quantpi", description="Quantitative testing semantics for finite pi-calculus terms.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="print the canonical form of a term")
    _inputs(p, "file holding the term")

    p = sub.add_parser("outcome", help="outcome of a term in a semiring")
    _inputs(p, "file holding the term")
    p.add_argument("--semiring", choices=SEMIRING_IDS, default="nat")

    p = sub.add_parser("runs", help="list runs with their causal order")
    _inputs(p, "file holding the term")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("traces", help="decompose a term into a combination of traces (JSON)")
    _inputs(p, "file holding the term")
    p.add_argument("--semiring", choices=SEMIRING_IDS, default="nat")

    p = sub.add_parser("impl", help="implementation term of a trace")
    _inputs(p, "trace JSON file")

    p = sub.add_parser("sync", help="number of synchronisations of two traces")
    _inputs(p, "two trace JSON files")

    p = sub.add_parser("equiv", help="check observational equivalence of two terms")
    _inputs(p, "two files holding the terms")
    p.add_argument("--semiring", choices=SEMIRING_IDS, default="nat")
    p.add_argument("--mode", choices=("exact", "may", "must"), default="exact",
                   help="compare outcomes exactly, or only success (may/must)")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="prefix budget of battery contexts")
    p.add_argument("--names", default=None, help="comma-separated free names for the battery")
    p.add_argument("--json", action="store_true")
    return parser


def _read(args, count: int) -> list[str]:
    if args.expr and args.files:
        raise UsageError("inline expressions and input files are mutually exclusive")
    if args.expr:
        items = list(args.expr)
    else:
        items = []
        for path in args.files:
            try:
                with open(path, encoding="utf-8") as fh:
                    items.append(fh.read())
            except OSError as exc:
                raise FileNotFoundError(f"{path}: {exc.strerror}") from exc
    if len(items) != count:
        raise UsageError(f"{args.command} expects {count} input{'s' if count > 1 else ''}, got {len(items)}")
    return items


def _trace(text: str):
    try:
        return from_json(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise ParseError(f"invalid trace: {exc}", 1, 1) from exc


def _run(args, out) -> int:
    cmd = args.command
    if cmd == "parse":
        print(print_term(parse_term(_read(args, 1)[0])), file=out)
    elif cmd == "outcome":
        print(format_value(outcome(parse_term(_read(args, 1)[0]), args.semiring)), file=out)
    elif cmd == "runs":
        rs = runs(parse_term(_read(args, 1)[0]))
        if args.json:
            data = [
                {
                    "labels": [lts.render_label(x) for x in r.sorted_labels()],
                    "order": [[lts.render_label(a), lts.render_label(b)] for a, b in r.hasse()],
                }
                for r in rs
            ]
            print(json.dumps(data), file=out)
        else:
            for r in rs:
                labels = " ".join(lts.render_label(x) for x in r.sorted_labels())
                edges = ", ".join(f"{lts.render_label(a)} < {lts.render_label(b)}" for a, b in r.hasse())
                print(f"{{{labels}}}" + (f" order: {edges}" if edges else ""), file=out)
    elif cmd == "traces":
        lc = decompose(parse_term(_read(args, 1)[0]), args.semiring)
        print(json.dumps(lc.to_json()), file=out)
    elif cmd == "impl":
        print(print_term(implement_trace(_trace(_read(args, 1)[0]))), file=out)
    elif cmd == "sync":
        t, u = (_trace(x) for x in _read(args, 2))
        print(sync_count(t, u), file=out)
    elif cmd == "equiv":
        p, q = (parse_term(x) for x in _read(args, 2))
        names = None if args.names is None else [n for n in args.names.split(",") if n]
        if args.depth < 0:
            raise UsageError("--depth must be non-negative")
        if args.mode == "may":
            verdict = may_equiv(p, q, args.depth, names)
        elif args.mode == "must":
            verdict = must_equiv(p, q, args.depth, names)
        else:
            verdict = check_equiv(p, q, args.semiring, args.depth, names)
        if args.json:
            print(json.dumps(verdict.to_json()), file=out)
        else:
            print(verdict.report(), file=out)
        return verdict.exit_code
    return 0


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        with fresh_session():
            return _run(args, out)
    except UsageError as exc:
        print(f"quantpi: usage error: {exc}", file=err)
        return EX_USAGE
    except ParseError as exc:
        print(f"quantpi: parse error at {exc}", file=err)
        return EX_USAGE
    except CarrierError as exc:
        print(f"quantpi: {exc}", file=err)
        return EX_DATAERR
    except FileNotFoundError as exc:
        print(f"quantpi: cannot read {exc}", file=err)
        return EX_NOINPUT
    except ContractError as exc:
        print(f"quantpi: internal error: {exc}", file=err)
        return EX_SOFTWARE
