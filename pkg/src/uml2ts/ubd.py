"""Reader and writer for the UBD text format.

A UBD file holds one diagram.  The first statement names its kind::

    sequence ATM            statemachine ATM          activity ATM
    lifeline Customer       state Idle                initial
    msg Insert: A -> B      initial Idle              action Insert
    alt [CardOk]            region R1 {               decision D
      ...                     state A                 edge initial -> Insert
    else [!CardOk]            initial A               edge D -> X [CardOk]
      ...                   }
    end                     trans Idle -> A : ev [g]

Statements end at a newline or ``;``.  ``#`` starts a comment.  Blocks of the
sequence diagram close with ``end``; state machine regions use braces.
"""
from __future__ import annotations

import re
from pathlib import Path

from .model import (
    IDENT_RE, INITIAL_ID, NODE_KINDS, ActivityDiagram, ADEdge, ADNode, Alt, AltBranch,
    DiagramBundle, GuardLiteral, Loop, Message, Opt, Par, Region,
    SequenceDiagram, SMTransition, SourceLocation, StateMachineDiagram,
    is_label,
)


class UbdError(Exception):
    """Base class for UBD input problems."""


class ParseError(UbdError):
    def __init__(self, message, loc: SourceLocation, expected=()):
        self.message = message
        self.loc = loc
        self.expected = tuple(expected)
        text = f"{loc}: {message}"
        if self.expected:
            text += " (expected " + ", ".join(self.expected) + ")"
        super().__init__(text)


class BundleError(UbdError):
    pass


_TOKEN_RE = re.compile(r"\s*(?:(?P<arrow>->)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[:\[\],!{};]))")


class _Tok:
    __slots__ = ("kind", "text", "loc")

    def __init__(self, kind, text, loc):
        self.kind, self.text, self.loc = kind, text, loc

    def __repr__(self):
        return f"_Tok({self.kind}, {self.text!r})"


def _tokenize_line(line, lineno, filename):
    toks = []
    pos = 0
    while pos < len(line):
        if line[pos].isspace():
            pos += 1
            continue
        if line[pos] == "#":
            break
        m = _TOKEN_RE.match(line, pos)
        if m is None or m.end() == pos:
            loc = SourceLocation(filename, lineno, pos + 1)
            ch = line[pos]
            if ch == "-":
                raise ParseError("reserved character '-' in label", loc)
            raise ParseError(f"unexpected character {ch!r}", loc)
        start = m.start(m.lastgroup)
        loc = SourceLocation(filename, lineno, start + 1)
        text = m.group(m.lastgroup)
        kind = "ident" if m.lastgroup == "ident" else text
        toks.append(_Tok(kind, text, loc))
        pos = m.end()
    return toks


def _statements(text, filename):
    """Split the source into statements (lists of tokens)."""
    stmts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        cur = []
        for tok in _tokenize_line(line, lineno, filename):
            if tok.kind == ";":
                if cur:
                    stmts.append(cur)
                cur = []
            elif tok.kind == "{":
                cur.append(tok)
                stmts.append(cur)
                cur = []
            elif tok.kind == "}":
                if cur:
                    stmts.append(cur)
                stmts.append([tok])
                cur = []
            else:
                cur.append(tok)
        if cur:
            stmts.append(cur)
    return stmts


class _Cursor:
    def __init__(self, stmt, eol_loc):
        self.toks = stmt
        self.i = 0
        self.eol_loc = eol_loc

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def at_end(self):
        return self.i >= len(self.toks)

    def _here(self):
        tok = self.peek()
        return tok.loc if tok is not None else self.eol_loc

    def expect(self, kind, what=None):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            found = "end of statement" if tok is None else repr(tok.text)
            raise ParseError(f"syntax error: found {found}", self._here(), [what or repr(kind)])
        self.i += 1
        return tok

    def accept(self, kind):
        tok = self.peek()
        if tok is not None and tok.kind == kind:
            self.i += 1
            return tok
        return None

    def name(self, what="identifier", label=True):
        # diagram, lifeline, region and event names never reach a unified
        # label, so only element labels are checked against reserved words
        tok = self.expect("ident", what)
        if not (is_label(tok.text) if label else IDENT_RE.match(tok.text)):
            raise ParseError(f"invalid or reserved name {tok.text!r}", tok.loc)
        return tok.text

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"syntax error: unexpected {tok.text!r}", tok.loc, ["end of statement"])


def _eol(stmt):
    last = stmt[-1]
    return SourceLocation(last.loc.file, last.loc.line, last.loc.column + len(last.text))


def _guard_list(cur: _Cursor):
    """Parse ``[LIT, LIT, ...]``; the opening bracket is already current."""
    cur.expect("[", "'['")
    lits = []
    seen = set()
    while True:
        neg = cur.accept("!") is not None
        tok = cur.peek()
        g = cur.name("guard name")
        if g in seen:
            raise ParseError(f"guard {g!r} repeated in one literal set", tok.loc)
        seen.add(g)
        lits.append(GuardLiteral(g, not neg))
        if cur.accept(","):
            continue
        cur.expect("]", "',' or ']'")
        return tuple(lits)


def _keyword(stmt):
    tok = stmt[0]
    return tok.text if tok.kind == "ident" else tok.kind


# -- sequence diagrams ---------------------------------------------------------

def _parse_sd(stmts, filename):
    head = _Cursor(stmts[0], _eol(stmts[0]))
    head.expect("ident")
    name = head.name("diagram name", label=False)
    head.done()
    lifelines = []
    seen_lifelines = {}
    pos = 1

    while pos < len(stmts) and _keyword(stmts[pos]) == "lifeline":
        cur = _Cursor(stmts[pos], _eol(stmts[pos]))
        cur.expect("ident")
        tok = cur.peek()
        ll = cur.name("lifeline name", label=False)
        cur.done()
        if ll in seen_lifelines:
            raise ParseError(f"duplicate declaration of lifeline {ll!r}", tok.loc)
        seen_lifelines[ll] = tok.loc
        lifelines.append(ll)
        pos += 1

    def body(stop):
        nonlocal pos
        items = []
        while pos < len(stmts):
            stmt = stmts[pos]
            kw = _keyword(stmt)
            if kw in stop:
                return tuple(items)
            cur = _Cursor(stmt, _eol(stmt))
            first = stmt[0]
            if kw == "msg":
                cur.expect("ident")
                m = cur.name("message name")
                cur.expect(":", "':'")
                src_tok = cur.peek()
                src = cur.name("lifeline", label=False)
                cur.expect("->", "'->'")
                dst_tok = cur.peek()
                dst = cur.name("lifeline", label=False)
                cur.done()
                for ll, tok in ((src, src_tok), (dst, dst_tok)):
                    if ll not in seen_lifelines:
                        raise ParseError(f"undeclared lifeline {ll!r}", tok.loc)
                items.append(Message(m, src, dst, loc=first.loc))
                pos += 1
            elif kw == "alt":
                cur.expect("ident")
                guards = _guard_list(cur)
                cur.done()
                pos += 1
                branches = [AltBranch(guards, body({"else", "end"}), loc=first.loc)]
                while _peek_kw() == "else":
                    st = stmts[pos]
                    c2 = _Cursor(st, _eol(st))
                    c2.expect("ident")
                    g2 = _guard_list(c2)
                    c2.done()
                    pos += 1
                    branches.append(AltBranch(g2, body({"else", "end"}), loc=st[0].loc))
                _close("end", first)
                items.append(Alt(tuple(branches), loc=first.loc))
            elif kw in ("opt", "loop"):
                cur.expect("ident")
                guards = _guard_list(cur)
                cur.done()
                pos += 1
                inner = body({"end"})
                _close("end", first)
                cls = Opt if kw == "opt" else Loop
                items.append(cls(guards, inner, loc=first.loc))
            elif kw == "par":
                cur.expect("ident")
                cur.done()
                pos += 1
                operands = [body({"and", "end"})]
                while _peek_kw() == "and":
                    c2 = _Cursor(stmts[pos], _eol(stmts[pos]))
                    c2.expect("ident")
                    c2.done()
                    pos += 1
                    operands.append(body({"and", "end"}))
                _close("end", first)
                items.append(Par(tuple(operands), loc=first.loc))
            elif kw == "lifeline":
                raise ParseError("lifelines must be declared before the first message", first.loc)
            else:
                raise ParseError(f"unknown keyword {first.text!r}", first.loc,
                                 ["msg", "alt", "opt", "loop", "par"] + sorted(stop - {None}))
        if None not in stop:
            raise ParseError("unterminated block", _eol(stmts[-1]), ["end"])
        return tuple(items)

    def _peek_kw():
        return _keyword(stmts[pos]) if pos < len(stmts) else None

    def _close(word, opener):
        nonlocal pos
        if pos >= len(stmts):
            raise ParseError(f"block opened at line {opener.loc.line} is not closed",
                             _eol(stmts[-1]), [word])
        cur = _Cursor(stmts[pos], _eol(stmts[pos]))
        tok = cur.expect("ident", word)
        if tok.text != word:
            raise ParseError(f"syntax error: found {tok.text!r}", tok.loc, [word])
        cur.done()
        pos += 1

    items = body({None})
    if pos < len(stmts):
        tok = stmts[pos][0]
        raise ParseError(f"unexpected {tok.text!r} outside any block", tok.loc)
    return SequenceDiagram(name, tuple(lifelines), items, loc=stmts[0][0].loc)


# -- state machines --------------------------------------------------------------

def _parse_trans(cur):
    cur.expect("ident")
    src = cur.name("state")
    cur.expect("->", "'->'")
    dst = cur.name("state")
    event = None
    guards = ()
    if cur.accept(":"):
        event = cur.name("event", label=False)
    if cur.peek() is not None and cur.peek().kind == "[":
        guards = _guard_list(cur)
    cur.done()
    return src, dst, event, guards


def _parse_smd(stmts, filename):
    head = _Cursor(stmts[0], _eol(stmts[0]))
    head.expect("ident")
    name = head.name("diagram name", label=False)
    head.done()
    declared = {}
    states = []
    initial = None
    regions = []
    transitions = []
    pos = 1

    def declare(tok, kind):
        if tok.text in declared:
            raise ParseError(f"duplicate declaration of {kind} {tok.text!r}", tok.loc)
        declared[tok.text] = kind

    while pos < len(stmts):
        stmt = stmts[pos]
        kw = _keyword(stmt)
        cur = _Cursor(stmt, _eol(stmt))
        first = stmt[0]
        if kw == "state":
            cur.expect("ident")
            tok = cur.peek()
            s = cur.name("state name")
            cur.done()
            declare(tok, "state")
            states.append(s)
            pos += 1
        elif kw == "initial":
            cur.expect("ident")
            s = cur.name("state name")
            cur.done()
            if initial is not None:
                raise ParseError("duplicate declaration of initial state", first.loc)
            initial = s
            pos += 1
        elif kw == "trans":
            src, dst, event, guards = _parse_trans(cur)
            transitions.append(SMTransition(src, dst, event, guards, loc=first.loc))
            pos += 1
        elif kw == "region":
            cur.expect("ident")
            tok = cur.peek()
            rname = cur.name("region name", label=False)
            cur.expect("{", "'{'")
            cur.done()
            declare(tok, "region")
            pos += 1
            r_states, r_initial, r_trans = [], None, []
            while True:
                if pos >= len(stmts):
                    raise ParseError(f"region {rname!r} is not closed", _eol(stmts[-1]), ["'}'"])
                st = stmts[pos]
                k2 = _keyword(st)
                c2 = _Cursor(st, _eol(st))
                pos += 1
                if k2 == "}":
                    break
                if k2 == "state":
                    c2.expect("ident")
                    t2 = c2.peek()
                    s = c2.name("state name")
                    c2.done()
                    declare(t2, "state")
                    r_states.append(s)
                elif k2 == "initial":
                    c2.expect("ident")
                    s = c2.name("state name")
                    c2.done()
                    if r_initial is not None:
                        raise ParseError("duplicate declaration of region initial state", st[0].loc)
                    r_initial = s
                elif k2 == "trans":
                    src, dst, event, guards = _parse_trans(c2)
                    r_trans.append(SMTransition(src, dst, event, guards, loc=st[0].loc))
                else:
                    raise ParseError(f"unknown keyword {st[0].text!r}", st[0].loc,
                                     ["state", "initial", "trans", "'}'"])
            regions.append(Region(rname, tuple(r_states), r_initial, tuple(r_trans), loc=first.loc))
        else:
            raise ParseError(f"unknown keyword {first.text!r}", first.loc,
                             ["state", "initial", "region", "trans"])
    return StateMachineDiagram(name, tuple(states), initial, tuple(regions),
                               tuple(transitions), loc=stmts[0][0].loc)


# -- activity diagrams -------------------------------------------------------------

def _parse_ad(stmts, filename):
    head = _Cursor(stmts[0], _eol(stmts[0]))
    head.expect("ident")
    name = head.name("diagram name", label=False)
    head.done()
    nodes = []
    edges = []
    declared = set()
    for stmt in stmts[1:]:
        kw = _keyword(stmt)
        cur = _Cursor(stmt, _eol(stmt))
        first = stmt[0]
        if kw == "initial":
            cur.expect("ident")
            cur.done()
            if INITIAL_ID in declared:
                raise ParseError("duplicate declaration of initial node", first.loc)
            declared.add(INITIAL_ID)
            nodes.append(ADNode(INITIAL_ID, "initial", loc=first.loc))
        elif kw in NODE_KINDS:
            cur.expect("ident")
            tok = cur.peek()
            nid = cur.name(f"{kw} name")
            cur.done()
            if nid in declared:
                raise ParseError(f"duplicate declaration of node {nid!r}", tok.loc)
            declared.add(nid)
            nodes.append(ADNode(nid, kw, loc=first.loc))
        elif kw == "edge":
            cur.expect("ident")
            src = cur.expect("ident", "node").text
            cur.expect("->", "'->'")
            dst = cur.expect("ident", "node").text
            guards = ()
            if cur.peek() is not None and cur.peek().kind == "[":
                guards = _guard_list(cur)
            cur.done()
            edges.append(ADEdge(src, dst, guards, loc=first.loc))
        else:
            raise ParseError(f"unknown keyword {first.text!r}", first.loc,
                             list(NODE_KINDS) + ["edge"])
    return ActivityDiagram(name, tuple(nodes), tuple(edges), loc=stmts[0][0].loc)


_PARSERS = {"sequence": _parse_sd, "statemachine": _parse_smd, "activity": _parse_ad}


def parse_diagram(text: str, filename: str = "<string>"):
    """Parse one UBD document into a diagram object."""
    stmts = _statements(text, filename)
    if not stmts:
        raise ParseError("empty document", SourceLocation(filename, 1, 1), list(_PARSERS))
    first = stmts[0][0]
    kw = _keyword(stmts[0])
    if kw not in _PARSERS:
        raise ParseError(f"unknown keyword {first.text!r}", first.loc, list(_PARSERS))
    return _PARSERS[kw](stmts, filename)


# -- serialization ---------------------------------------------------------------

def _lits(guards):
    return "[" + ", ".join(str(l) for l in guards) + "]"


def _sd_lines(body, depth, out):
    ind = "  " * depth
    for el in body:
        if isinstance(el, Message):
            out.append(f"{ind}msg {el.name}: {el.source} -> {el.target}")
        elif isinstance(el, Alt):
            for i, br in enumerate(el.branches):
                out.append(f"{ind}{'alt' if i == 0 else 'else'} {_lits(br.guards)}")
                _sd_lines(br.body, depth + 1, out)
            out.append(f"{ind}end")
        elif isinstance(el, (Opt, Loop)):
            out.append(f"{ind}{'opt' if isinstance(el, Opt) else 'loop'} {_lits(el.guards)}")
            _sd_lines(el.body, depth + 1, out)
            out.append(f"{ind}end")
        elif isinstance(el, Par):
            for i, op in enumerate(el.operands):
                out.append(f"{ind}{'par' if i == 0 else 'and'}")
                _sd_lines(op, depth + 1, out)
            out.append(f"{ind}end")


def _trans_line(t, ind):
    line = f"{ind}trans {t.source} -> {t.target}"
    if t.event:
        line += f" : {t.event}"
    if t.guards:
        line += " " + _lits(t.guards)
    return line


def serialize_diagram(d) -> str:
    """Canonical UBD text for ``d`` (LF line endings, two-space indent)."""
    out = []
    if isinstance(d, SequenceDiagram):
        out.append(f"sequence {d.name}")
        out.extend(f"lifeline {ll}" for ll in d.lifelines)
        _sd_lines(d.body, 0, out)
    elif isinstance(d, StateMachineDiagram):
        out.append(f"statemachine {d.name}")
        out.extend(f"state {s}" for s in d.states)
        if d.initial is not None:
            out.append(f"initial {d.initial}")
        for r in d.regions:
            out.append(f"region {r.name} {{")
            out.extend(f"  state {s}" for s in r.states)
            if r.initial is not None:
                out.append(f"  initial {r.initial}")
            out.extend(_trans_line(t, "  ") for t in r.transitions)
            out.append("}")
        out.extend(_trans_line(t, "") for t in d.transitions)
    elif isinstance(d, ActivityDiagram):
        out.append(f"activity {d.name}")
        for n in d.nodes:
            out.append("initial" if n.kind == "initial" else f"{n.kind} {n.id}")
        for e in d.edges:
            line = f"edge {e.source} -> {e.target}"
            if e.guards:
                line += " " + _lits(e.guards)
            out.append(line)
    else:
        raise TypeError(f"not a diagram: {d!r}")
    return "\n".join(out) + "\n"


# -- bundles -----------------------------------------------------------------

def read_diagram(path):
    path = Path(path)
    text = path.read_bytes().decode("utf-8")
    return parse_diagram(text, str(path))


def load_bundle(paths) -> DiagramBundle:
    """Parse two or three files and assemble them by diagram kind."""
    found = {}
    for p in paths:
        d = read_diagram(p)
        if d.kind in found:
            raise BundleError(f"{p}: two {d.kind} diagrams given ({found[d.kind][0]} and {p})")
        found[d.kind] = (p, d)
    if "sequence" not in found:
        raise BundleError("sequence diagram is mandatory")
    if len(found) < 2:
        raise BundleError("bundle requires a second diagram (state machine or activity)")
    get = lambda k: found[k][1] if k in found else None
    return DiagramBundle(get("sequence"), get("statemachine"), get("activity"))
