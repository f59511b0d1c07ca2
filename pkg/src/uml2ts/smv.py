"""NuSMV model emission and a checker for the emitted SMV subset.

The model uses state variables only: ``State`` ranges over the rendered
unified names and every guard becomes a ``{dc, false, true}`` variable.
Each unified transition yields one arm in ``next(State)`` and one arm in
every guard's ``next()``, conditioned on the full source tuple.  When a
source has several successors the arms additionally test
``next(Branch)``, a free state variable that picks among them; without it
the first matching ``case`` arm would hide the other successors.  A last
``TRUE`` arm keeps the current value, which makes deadlocks self-loops.
"""
from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass

from .ctl import CTLSyntaxError, Formula, map_names, parse_ctl, render_ctl
from .ts import UnifiedTS

BRANCH = "Branch"
INDENT = "    "


@dataclass(frozen=True)
class EmitOptions:
    paper_style: bool = False   # keep '-' in identifiers, as in the published listing
    guard_prefix: str = ""      # e.g. "vg" turns guard g into variable vgg


class EmitError(ValueError):
    pass


def name_mapper(paper_style: bool):
    return (lambda s: s) if paper_style else (lambda s: s.replace("-", "_"))


def _ident_map(uts: UnifiedTS, opts: EmitOptions):
    fn = name_mapper(opts.paper_style)
    out = {}
    for name in uts.names():
        ident = fn(name)
        if ident in out.values():
            clash = next(k for k, v in out.items() if v == ident)
            raise EmitError(f"state names {clash!r} and {name!r} both map to {ident!r}; "
                            f"use paper-style identifiers")
        out[name] = ident
    return out


def emit_property(f: Formula, opts: EmitOptions = EmitOptions(), logic: str = "CTL") -> str:
    if logic != "CTL":
        raise EmitError(f"unsupported logic {logic!r}")
    g = map_names(f, name_mapper(opts.paper_style))
    if opts.guard_prefix:
        g = _prefix_guards(g, opts.guard_prefix)
    return f"CTLSPEC {render_ctl(g)}"


def _prefix_guards(f, prefix):
    from .ctl import Atom, Const, Not, Temporal, Until
    if isinstance(f, Atom):
        return f if f.is_state else Atom(prefix + f.subject, f.value)
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(_prefix_guards(f.arg, prefix))
    if isinstance(f, Temporal):
        return Temporal(f.op, _prefix_guards(f.arg, prefix))
    if isinstance(f, Until):
        return Until(f.quant, f.kind, _prefix_guards(f.left, prefix), _prefix_guards(f.right, prefix))
    return type(f)(_prefix_guards(f.left, prefix), _prefix_guards(f.right, prefix))


def emit_smv(uts: UnifiedTS, props=(), opts: EmitOptions = EmitOptions()) -> str:
    """Render ``uts`` and ``props`` as a NuSMV ``MODULE main``."""
    if not uts.states:
        raise EmitError("empty transition system")
    ident = _ident_map(uts, opts)
    gvar = {g: opts.guard_prefix + g for g in uts.guards}
    if any(v in (BRANCH, "State") for v in gvar.values()):
        raise EmitError("guard variable collides with a reserved SMV variable")

    out_edges = [[] for _ in uts.states]
    for s, t in uts.transitions:
        out_edges[s].append(t)
    width = max((len(e) for e in out_edges), default=0)

    lines = ["MODULE main", "VAR"]
    lines.append(f"  State: {{{','.join(ident[n] for n in uts.names())}}};")
    for g in uts.guards:
        lines.append(f"  {gvar[g]}: {{dc,false,true}};")
    if width > 1:
        lines.append(f"  {BRANCH}: 0..{width - 1};")
    lines.append("ASSIGN")
    init = uts.initial_state
    lines.append(f"  init(State):= {ident[init.name]};")
    for g in uts.guards:
        lines.append(f"  init({gvar[g]}):= {init.gvs[g].value};")

    arms = []  # (condition, target state)
    for s, targets in enumerate(out_edges):
        src = uts.states[s]
        cond = " & ".join([f"State={ident[src.name]}"] +
                          [f"{gvar[g]}={src.gvs[g].value}" for g in uts.guards])
        for k, t in enumerate(targets):
            c = cond
            if k < len(targets) - 1:
                c += f" & next({BRANCH})={k}"
            arms.append((c, uts.states[t]))

    lines.append("  next(State):= case")
    for c, tgt in arms:
        lines.append(f"{INDENT}{c} : {ident[tgt.name]};")
    lines.append(f"{INDENT}TRUE : State;")
    lines.append("  esac;")
    for g in uts.guards:
        lines.append(f"  next({gvar[g]}):= case")
        for c, tgt in arms:
            lines.append(f"{INDENT}{c} : {tgt.gvs[g].value};")
        lines.append(f"{INDENT}TRUE : {gvar[g]};")
        lines.append("  esac;")
    for f in props:
        lines.append(emit_property(f, opts))
    return "\n".join(lines) + "\n"


# -- grammar check ------------------------------------------------------------

_IDENT = r"[A-Za-z_][A-Za-z0-9_$#-]*"
_VAR_ENUM = re.compile(rf"\s+({_IDENT})\s*:\s*\{{\s*({_IDENT}(?:\s*,\s*{_IDENT})*)\s*\}}\s*;\Z")
_VAR_RANGE = re.compile(rf"\s+({_IDENT})\s*:\s*(\d+)\s*\.\.\s*(\d+)\s*;\Z")
_INIT = re.compile(rf"\s+init\(\s*({_IDENT})\s*\)\s*:=\s*({_IDENT})\s*;\Z")
_NEXT = re.compile(rf"\s+next\(\s*({_IDENT})\s*\)\s*:=\s*case\s*\Z")
_ARM = re.compile(rf"\s+(.+?)\s+:\s+({_IDENT})\s*;\Z")
_COND = re.compile(rf"(?:next\(\s*({_IDENT})\s*\)|({_IDENT}))\s*=\s*({_IDENT}|\d+)\Z")


@dataclass
class SmvModel:
    """What the grammar check learned; used by tests."""

    variables: dict
    init: dict
    arms: dict  # variable -> list of (conditions, result)
    specs: list


def check_smv_syntax(text: str):
    """Check ``text`` against the emitted SMV subset.

    Returns ``(model, errors)``; ``errors`` is empty for a conforming file.
    """
    errors = []
    variables, init, arms, specs = {}, {}, {}, []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    i = 0

    def err(msg):
        errors.append(f"line {i + 1}: {msg}")

    def expect_line(word):
        nonlocal i
        if i >= len(lines) or lines[i].strip() != word:
            err(f"expected {word!r}")
            return False
        i += 1
        return True

    if not expect_line("MODULE main") or not expect_line("VAR"):
        return SmvModel(variables, init, arms, specs), errors
    while i < len(lines) and lines[i].strip() != "ASSIGN":
        m = _VAR_ENUM.match(lines[i])
        r = _VAR_RANGE.match(lines[i])
        if m:
            name = m.group(1)
            vals = [v.strip() for v in m.group(2).split(",")]
            if len(set(vals)) != len(vals):
                err(f"duplicate value in enumeration of {name}")
        elif r:
            name = r.group(1)
            lo, hi = int(r.group(2)), int(r.group(3))
            if lo > hi:
                err(f"empty range for {name}")
            vals = [str(v) for v in range(lo, hi + 1)]
        else:
            err(f"bad VAR declaration {lines[i].strip()!r}")
            i += 1
            continue
        if name in variables:
            err(f"variable {name} declared twice")
        variables[name] = set(vals)
        i += 1
    if not expect_line("ASSIGN"):
        return SmvModel(variables, init, arms, specs), errors

    def in_domain(var, val):
        return var in variables and val in variables[var]

    while i < len(lines) and not lines[i].startswith("CTLSPEC"):
        line = lines[i]
        m_init = _INIT.match(line)
        m_next = _NEXT.match(line)
        if m_init:
            var, val = m_init.groups()
            if not in_domain(var, val):
                err(f"init value {val!r} outside the domain of {var!r}")
            init[var] = val
            i += 1
        elif m_next:
            var = m_next.group(1)
            if var not in variables:
                err(f"next() of undeclared variable {var!r}")
            i += 1
            body = []
            while i < len(lines) and lines[i].strip() != "esac;":
                m = _ARM.match(lines[i])
                if not m or not lines[i].startswith(INDENT):
                    err(f"bad case arm {lines[i].strip()!r}")
                    i += 1
                    continue
                cond_text, result = m.groups()
                conds = []
                if cond_text.strip() != "TRUE":
                    for part in cond_text.split(" & "):
                        c = _COND.match(part.strip())
                        if not c:
                            err(f"bad condition {part.strip()!r}")
                            continue
                        nvar, cvar, val = c.groups()
                        v = nvar or cvar
                        if not in_domain(v, val):
                            err(f"condition value {val!r} outside the domain of {v!r}")
                        conds.append((v, val, bool(nvar)))
                if result not in variables and not in_domain(var, result):
                    err(f"case result {result!r} outside the domain of {var!r}")
                body.append((tuple(conds), result))
                i += 1
            if i >= len(lines):
                err("missing 'esac;'")
                break
            if not body or body[-1][0] != ():
                err(f"case for {var} lacks a final TRUE arm")
            arms[var] = body
            i += 1
        else:
            err(f"unexpected line {line.strip()!r}")
            i += 1
    while i < len(lines):
        line = lines[i]
        if not line.startswith("CTLSPEC "):
            err(f"expected CTLSPEC, found {line.strip()!r}")
        else:
            try:
                specs.append(parse_ctl(line[len("CTLSPEC "):]))
            except CTLSyntaxError as e:
                err(f"CTLSPEC {e}")
        i += 1
    for var in variables:
        if var != BRANCH and var not in init:
            errors.append(f"variable {var} has no init()")
    return SmvModel(variables, init, arms, specs), errors


# -- NuSMV cross-validation -------------------------------------------------------

NUSMV_ENV = "UML2TS_NUSMV"
_RESULT_RE = re.compile(r"^-- specification (.*) is (true|false)\s*$", re.M)


def find_nusmv():
    path = os.environ.get(NUSMV_ENV)
    if path:
        return path if os.path.exists(path) or shutil.which(path) else None
    return shutil.which("NuSMV")


def run_nusmv(smv_text: str, binary: str, timeout: float = 120.0) -> list:
    """Run NuSMV on ``smv_text``; return one bool per CTLSPEC, in order."""
    with tempfile.NamedTemporaryFile("w", suffix=".smv", delete=False, encoding="utf-8") as fh:
        fh.write(smv_text)
        path = fh.name
    try:
        proc = subprocess.run([binary, path], capture_output=True, text=True, timeout=timeout)
    finally:
        os.unlink(path)
    if proc.returncode != 0:
        raise RuntimeError(f"NuSMV failed: {proc.stderr.strip() or proc.stdout.strip()}")
    return [m.group(2) == "true" for m in _RESULT_RE.finditer(proc.stdout)]
