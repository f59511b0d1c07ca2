"""Command line: ``uml2ts build | emit | check | pattern``.

Exit codes: 0 success / all properties hold, 1 some property violated,
2 usage, parse or validation error.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from . import __version__
from .checker import Checker, CheckError, check
from .ctl import CTLSyntaxError, parse_ctl, render_ctl
from .patterns import PATTERNS, SCOPES, PatternError, PatternSpec, instantiate_pattern
from .smv import EmitError, EmitOptions, emit_smv, find_nusmv, run_nusmv
from .ts import load_unified_dump
from .ubd import UbdError, load_bundle
from .unify import BundleInvalid, reachable_stats, unify_bundle

OK, VIOLATED, ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _pattern_parser(prog="pattern"):
    p = argparse.ArgumentParser(prog=prog, add_help=prog != "pattern-line", exit_on_error=False)
    p.add_argument("pattern", choices=PATTERNS)
    p.add_argument("--scope", default="global", help="one of: " + ", ".join(SCOPES))
    for name in ("p", "q", "r", "s"):
        p.add_argument(f"--{name}", help=f"proposition {name.upper()} (CTL text)")
    return p


def _spec_from_args(a):
    return PatternSpec(a.pattern, a.scope, a.p, a.q, a.r, a.s)


def read_props(path):
    """One CTL formula or ``pattern ...`` line per line; ``#`` comments."""
    props = []
    if path is None:
        return props
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            if line.startswith("pattern "):
                args = _pattern_parser("pattern-line").parse_args(shlex.split(line)[1:])
                props.append(instantiate_pattern(_spec_from_args(args)))
            else:
                props.append(parse_ctl(line))
        except CTLSyntaxError as e:
            raise CliError(f"{path}: line {lineno}: syntax error: {e.message} (column {e.pos + 1})")
        except (PatternError, argparse.ArgumentError, ValueError) as e:
            raise CliError(f"{path}: line {lineno}: {e}")
    return props


def _unified(paths):
    if len(paths) == 1 and not paths[0].endswith(".ubd"):
        return load_unified_dump(Path(paths[0]).read_text(encoding="utf-8"))
    return unify_bundle(load_bundle(paths))


def cmd_build(args, out):
    uts = _unified(args.diagrams)
    declared, reachable = reachable_stats(uts)
    if args.json:
        text = json.dumps({"declared": declared, "reachable": reachable,
                           "states": len(uts.states), "transitions": len(uts.transitions)}, indent=2) + "\n"
    elif args.stats_only:
        text = f"declared={declared} reachable={reachable}\n"
    else:
        text = uts.dump() + f"# declared={declared} reachable={reachable}\n"
    _write(args.out, text, out)
    return OK


def cmd_emit(args, out):
    uts = _unified(args.diagrams)
    props = read_props(args.props)
    text = emit_smv(uts, props, EmitOptions(paper_style=args.paper_style))
    _write(args.out, text, out)
    return OK


def cmd_check(args, out):
    uts = _unified(args.diagrams)
    props = read_props(args.props)
    for f in args.formula or ():
        props.append(parse_ctl(f))
    ck = Checker(uts)
    verdicts = [check(uts, f, ck) for f in props]
    nusmv = None
    if args.cross_validate:
        binary = find_nusmv()
        if binary is None:
            raise CliError("--cross-validate needs a NuSMV binary (set UML2TS_NUSMV)")
        nusmv = run_nusmv(emit_smv(uts, props), binary)
    if args.json:
        report = {"stats": dict(zip(("declared", "reachable"), reachable_stats(uts))),
                  "verdicts": [v.to_dict() for v in verdicts]}
        if nusmv is not None:
            report["nusmv"] = nusmv
        out.write(json.dumps(report, indent=2) + "\n")
    else:
        for i, v in enumerate(verdicts):
            out.write(f"{'SATISFIED' if v.satisfied else 'VIOLATED'}: {render_ctl(v.formula)}\n")
            if v.trace is not None:
                out.write(v.trace.format() + "\n")
            elif not v.satisfied:
                out.write("  (no counterexample for this formula shape)\n")
            if nusmv is not None:
                agree = i < len(nusmv) and nusmv[i] == v.satisfied
                out.write(f"  NuSMV: {'agrees' if agree else 'DISAGREES'}\n")
    if nusmv is not None and nusmv != [v.satisfied for v in verdicts]:
        return ERROR
    return OK if all(v.satisfied for v in verdicts) else VIOLATED


def cmd_pattern(args, out):
    f = instantiate_pattern(_spec_from_args(args))
    out.write(render_ctl(f) + "\n")
    return OK


def _write(path, text, out):
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def make_parser():
    parser = argparse.ArgumentParser(prog="uml2ts", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="unify diagrams and dump the transition system")
    b.add_argument("diagrams", nargs="+")
    b.add_argument("-o", "--out")
    b.add_argument("--stats-only", action="store_true")
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("emit", help="write a NuSMV model")
    e.add_argument("diagrams", nargs="+", help="UBD files, or one TS dump")
    e.add_argument("--props", help="property file")
    e.add_argument("-o", "--out")
    e.add_argument("--paper-style", action="store_true", help="keep '-' in state identifiers")
    e.set_defaults(func=cmd_emit)

    c = sub.add_parser("check", help="model check properties on the unified TS")
    c.add_argument("diagrams", nargs="+")
    c.add_argument("--props", help="property file")
    c.add_argument("-f", "--formula", action="append", help="CTL formula (repeatable)")
    c.add_argument("--json", action="store_true")
    c.add_argument("--cross-validate", action="store_true",
                   help="also run NuSMV (UML2TS_NUSMV) and compare verdicts")
    c.set_defaults(func=cmd_check)

    p = sub.add_parser("pattern", help="instantiate a specification pattern",
                       parents=[_pattern_parser()], add_help=False, conflict_handler="resolve")
    p.set_defaults(func=cmd_pattern)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else ERROR
    try:
        return args.func(args, out)
    except (BundleInvalid, UbdError) as e:
        err.write(f"error: {e}\n")
        if "requires a second diagram" in str(e):
            err.write("error: second diagram required\n")
    except (CliError, CheckError, PatternError, EmitError, CTLSyntaxError, OSError) as e:
        err.write(f"error: {e}\n")
    return ERROR


if __name__ == "__main__":
    sys.exit(main())
