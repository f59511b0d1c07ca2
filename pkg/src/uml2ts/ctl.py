"""CTL formulas in NuSMV concrete syntax.

Grammar (loosest binding first)::

    impl    := or ('->' impl)?
    or      := and ('|' and)*
    and     := unary ('&' unary)*
    unary   := '!' unary | TEMP unary | primary
    primary := '(' impl ')' | ('A'|'E') '[' impl ('U'|'W') impl ']'
             | 'TRUE' | 'FALSE' | IDENT '=' VALUE

``State`` atoms compare against rendered unified names, which may contain
hyphens (``Start-Start-Start``, ``m--a``).  Every other identifier on the
left of ``=`` is a guard.
"""
from __future__ import annotations

import re
from dataclasses import dataclass


class CTLSyntaxError(ValueError):
    def __init__(self, message, pos, text=""):
        self.message = message
        self.pos = pos
        super().__init__(f"syntax error at column {pos + 1}: {message}")


class Formula:
    __slots__ = ()

    def __str__(self):
        return render_ctl(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Atom(Formula):
    subject: str  # "State" or a guard name
    value: str

    @property
    def is_state(self):
        return self.subject == STATE


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Temporal(Formula):
    """Unary temporal operator: AX EX AF EF AG EG."""

    op: str
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    """``A[l U r]``, ``E[l U r]``, ``A[l W r]`` or ``E[l W r]``."""

    quant: str  # "A" or "E"
    kind: str   # "U" or "W"
    left: Formula
    right: Formula


STATE = "State"
UNARY_OPS = ("AX", "EX", "AF", "EF", "AG", "EG")
TRUE_F, FALSE_F = Const(True), Const(False)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>->|[!&|()\[\]=])
  | (?P<name>[A-Za-z0-9_$#]+(?:-(?!>)[A-Za-z0-9_$#]*)*)
""", re.VERBOSE)


def _tokenize(text):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CTLSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        if m.lastgroup != "ws":
            toks.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        tok = self.take()
        if tok[1] != text:
            found = tok[1] or "end of input"
            raise CTLSyntaxError(f"expected {text!r}, found {found!r}", tok[2], self.text)
        return tok

    def parse(self):
        f = self.impl()
        tok = self.peek()
        if tok[0] != "eof":
            raise CTLSyntaxError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return f

    def impl(self):
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Implies(left, self.impl())
        return left

    def disj(self):
        f = self.conj()
        while self.peek()[1] == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek()[1] == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self):
        kind, text, pos = self.peek()
        if text == "!":
            self.take()
            return Not(self.unary())
        if kind == "name" and text in UNARY_OPS:
            self.take()
            return Temporal(text, self.unary())
        return self.primary()

    def primary(self):
        kind, text, pos = self.take()
        if text == "(":
            f = self.impl()
            self.expect(")")
            return f
        if kind == "name" and text in ("A", "E") and self.peek()[1] == "[":
            self.take()
            left = self.impl()
            k, word, p = self.take()
            if word not in ("U", "W"):
                raise CTLSyntaxError(f"expected 'U' or 'W', found {word or 'end of input'!r}", p, self.text)
            right = self.impl()
            self.expect("]")
            return Until(text, word, left, right)
        if kind == "name" and text in ("TRUE", "FALSE"):
            return Const(text == "TRUE")
        if kind == "name" and "-" not in text and text not in UNARY_OPS + ("A", "E", "U", "W"):
            self.expect("=")
            k, value, p = self.take()
            if k != "name":
                raise CTLSyntaxError(f"expected a value after '=', found {value or 'end of input'!r}", p, self.text)
            return Atom(text, value)
        found = text or "end of input"
        raise CTLSyntaxError(f"unexpected {found!r}", pos, self.text)


def parse_ctl(text: str) -> Formula:
    return _Parser(text).parse()


def _wrap(f):
    s = render_ctl(f)
    return f"({s})" if isinstance(f, (And, Or, Implies)) else s


def render_ctl(f: Formula) -> str:
    """Canonical NuSMV text; ``parse_ctl(render_ctl(f)) == f``."""
    if isinstance(f, Const):
        return "TRUE" if f.value else "FALSE"
    if isinstance(f, Atom):
        return f"{f.subject} = {f.value}"
    if isinstance(f, Not):
        return f"!({render_ctl(f.arg)})"
    if isinstance(f, And):
        return f"{_wrap(f.left)} & {_wrap(f.right)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left)} | {_wrap(f.right)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left)} -> {_wrap(f.right)}"
    if isinstance(f, Temporal):
        return f"{f.op} ({render_ctl(f.arg)})"
    if isinstance(f, Until):
        return f"{f.quant} [ {_wrap(f.left)} {f.kind} {_wrap(f.right)} ]"
    raise TypeError(f"not a formula: {f!r}")


def map_names(f: Formula, fn) -> Formula:
    """Rewrite every State atom value through ``fn``."""
    if isinstance(f, Atom):
        return Atom(f.subject, fn(f.value)) if f.is_state else f
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(map_names(f.arg, fn))
    if isinstance(f, Temporal):
        return Temporal(f.op, map_names(f.arg, fn))
    if isinstance(f, Until):
        return Until(f.quant, f.kind, map_names(f.left, fn), map_names(f.right, fn))
    return type(f)(map_names(f.left, fn), map_names(f.right, fn))


def atoms(f: Formula):
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (Not, Temporal)):
        yield from atoms(f.arg)
    elif isinstance(f, Const):
        return
    else:
        yield from atoms(f.left)
        yield from atoms(f.right)


def depth(f: Formula) -> int:
    if isinstance(f, (Atom, Const)):
        return 0
    if isinstance(f, (Not, Temporal)):
        return 1 + depth(f.arg)
    return 1 + max(depth(f.left), depth(f.right))


# Shorthands used by the pattern table and tests.
def AG(f): return Temporal("AG", f)
def AF(f): return Temporal("AF", f)
def AX(f): return Temporal("AX", f)
def EG(f): return Temporal("EG", f)
def EF(f): return Temporal("EF", f)
def EX(f): return Temporal("EX", f)
def AU(a, b): return Until("A", "U", a, b)
def EU(a, b): return Until("E", "U", a, b)
def AW(a, b): return Until("A", "W", a, b)
def EW(a, b): return Until("E", "W", a, b)
