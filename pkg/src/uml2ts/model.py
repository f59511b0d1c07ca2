"""Diagram metamodels for sequence, state machine and activity diagrams.

Only the subset of UML 2 that the merge algorithm consumes is modeled:

* sequence diagrams with ``alt``, ``opt``, ``loop`` and ``par`` fragments,
* state machines with flat states plus one layer of orthogonal regions,
* activity diagrams with initial/action/decision/merge/fork/join/final nodes.

All objects are frozen dataclasses.  Source locations are carried for error
reporting but never take part in equality.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

# Words that would make unified labels, CTL text or SMV output ambiguous.
RESERVED_WORDS = frozenset({
    "and", "dc", "true", "false", "TRUE", "FALSE", "State", "Branch",
    "Start", "End", "A", "E", "U", "W",
    "AX", "EX", "AF", "EF", "AG", "EG",
    "MODULE", "VAR", "ASSIGN", "CTLSPEC", "init", "next", "case", "esac",
})


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class GuardLiteral:
    guard: str
    polarity: bool = True

    def __str__(self):
        return self.guard if self.polarity else "!" + self.guard

    def negated(self) -> GuardLiteral:
        return GuardLiteral(self.guard, not self.polarity)


Guards = tuple  # tuple[GuardLiteral, ...], a conjunction


# -- sequence diagrams -------------------------------------------------------

@dataclass(frozen=True)
class Message:
    name: str
    source: str
    target: str
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class AltBranch:
    guards: Guards
    body: tuple
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Alt:
    branches: tuple  # tuple[AltBranch, ...]
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Opt:
    guards: Guards
    body: tuple
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Loop:
    guards: Guards
    body: tuple
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Par:
    operands: tuple  # tuple[tuple[SDElement, ...], ...]
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


SDElement = Union[Message, Alt, Opt, Loop, Par]


@dataclass(frozen=True)
class SequenceDiagram:
    name: str
    lifelines: tuple
    body: tuple
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)

    kind = "sequence"


# -- state machines ----------------------------------------------------------

@dataclass(frozen=True)
class SMTransition:
    source: str
    target: str
    event: Optional[str] = None
    guards: Guards = ()
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Region:
    name: str
    states: tuple
    initial: Optional[str]
    transitions: tuple = ()
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StateMachineDiagram:
    """A flat state machine, optionally with one orthogonal composite.

    ``states`` holds the top-level states only; states declared inside a
    region live in ``Region.states``.  Transitions may sit at top level or
    inside the region that owns both endpoints.
    """

    name: str
    states: tuple
    initial: Optional[str]
    regions: tuple = ()
    transitions: tuple = ()
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)

    kind = "statemachine"

    def all_states(self) -> tuple:
        out = list(self.states)
        for region in self.regions:
            out.extend(region.states)
        return tuple(out)

    def all_transitions(self) -> tuple:
        out = list(self.transitions)
        for region in self.regions:
            out.extend(region.transitions)
        return tuple(out)

    def region_of(self, state: str) -> Optional[Region]:
        for region in self.regions:
            if state in region.states:
                return region
        return None


# -- activity diagrams -------------------------------------------------------

NODE_KINDS = ("initial", "action", "decision", "merge", "fork", "join", "final")
INITIAL_ID = "initial"


@dataclass(frozen=True)
class ADNode:
    id: str
    kind: str
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ADEdge:
    source: str
    target: str
    guards: Guards = ()
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ActivityDiagram:
    name: str
    nodes: tuple
    edges: tuple
    loc: Optional[SourceLocation] = field(default=None, compare=False, repr=False)

    kind = "activity"

    def node(self, node_id: str) -> Optional[ADNode]:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None


Diagram = Union[SequenceDiagram, StateMachineDiagram, ActivityDiagram]


@dataclass(frozen=True)
class DiagramBundle:
    sd: SequenceDiagram
    smd: Optional[StateMachineDiagram] = None
    ad: Optional[ActivityDiagram] = None


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


class ValidationReport(list):
    """A list of :class:`Violation`; empty means valid."""

    @property
    def ok(self) -> bool:
        return not self

    def messages(self) -> list[str]:
        return [v.message for v in self]

    def __str__(self):
        return "\n".join(str(v) for v in self)


def is_label(name: str) -> bool:
    return bool(IDENT_RE.match(name)) and name not in RESERVED_WORDS


def _check_guards(guards, path, report, what):
    seen = set()
    for lit in guards:
        if not is_label(lit.guard):
            report.append(Violation(path, f"invalid guard name {lit.guard!r}"))
        if lit.guard in seen:
            report.append(Violation(path, f"{what} repeats guard {lit.guard!r}"))
        seen.add(lit.guard)


def _validate_body(body, lifelines, path, report):
    if not body:
        report.append(Violation(path, "empty body"))
    for i, el in enumerate(body):
        p = f"{path}[{i}]"
        if isinstance(el, Message):
            if not is_label(el.name):
                report.append(Violation(p, f"invalid message name {el.name!r}"))
            for end in (el.source, el.target):
                if end not in lifelines:
                    report.append(Violation(p, f"undeclared lifeline {end!r}"))
        elif isinstance(el, Alt):
            if len(el.branches) < 2:
                report.append(Violation(p, "alt needs at least two branches"))
            for j, br in enumerate(el.branches):
                if not br.guards:
                    report.append(Violation(f"{p}.branch[{j}]", "alt branch without guard"))
                _check_guards(br.guards, f"{p}.branch[{j}]", report, "alt branch")
                _validate_body(br.body, lifelines, f"{p}.branch[{j}]", report)
        elif isinstance(el, (Opt, Loop)):
            what = "opt" if isinstance(el, Opt) else "loop"
            if not el.guards:
                report.append(Violation(p, f"{what} without guard"))
            _check_guards(el.guards, p, report, what)
            _validate_body(el.body, lifelines, p, report)
        elif isinstance(el, Par):
            if len(el.operands) < 2:
                report.append(Violation(p, "par needs at least two operands"))
            for j, op in enumerate(el.operands):
                _validate_body(op, lifelines, f"{p}.operand[{j}]", report)
        else:
            report.append(Violation(p, f"unknown element {type(el).__name__}"))


def validate_sd(sd: SequenceDiagram, report=None) -> ValidationReport:
    report = ValidationReport() if report is None else report
    path = f"sequence {sd.name}"
    if len(set(sd.lifelines)) != len(sd.lifelines):
        report.append(Violation(path, "duplicate lifeline"))
    for ll in sd.lifelines:
        if not IDENT_RE.match(ll):
            report.append(Violation(path, f"invalid lifeline name {ll!r}"))
    _validate_body(sd.body, set(sd.lifelines), path, report)
    return report


def validate_smd(smd: StateMachineDiagram, report=None) -> ValidationReport:
    report = ValidationReport() if report is None else report
    path = f"statemachine {smd.name}"
    states = smd.all_states()
    if len(set(states)) != len(states):
        report.append(Violation(path, "duplicate state or overlapping regions"))
    for s in states:
        if not is_label(s):
            report.append(Violation(path, f"invalid state name {s!r}"))
    if smd.initial not in states:
        report.append(Violation(path, f"initial state {smd.initial!r} is not declared"))
    for region in smd.regions:
        rp = f"{path}.region {region.name}"
        if not region.states:
            report.append(Violation(rp, "region without states"))
        if region.initial not in region.states:
            report.append(Violation(rp, f"region initial {region.initial!r} not in region"))
        for t in region.transitions:
            if t.source not in region.states or t.target not in region.states:
                report.append(Violation(rp, f"transition {t.source} -> {t.target} leaves its region"))
    outgoing = {}
    for t in smd.all_transitions():
        tp = f"{path}.trans {t.source} -> {t.target}"
        for end in (t.source, t.target):
            if end not in states:
                report.append(Violation(tp, f"undeclared state {end!r}"))
        rs, rt = smd.region_of(t.source), smd.region_of(t.target)
        if rs is not None and rt is not None and rs is not rt:
            report.append(Violation(tp, "transition between different regions"))
        _check_guards(t.guards, tp, report, "transition")
        outgoing.setdefault(t.source, []).append(t)
    for s, ts in outgoing.items():
        if len(ts) > 1 and any(not t.guards for t in ts):
            # unguarded choice would be a second path the guards cannot track
            report.append(Violation(f"{path}.state {s}", "branching state with unguarded transition"))
    return report


def _fork_join_ok(ad, succ, fork_id):
    """Return the join matched by ``fork_id`` or None when pairing fails."""
    hits = set()
    for start in succ.get(fork_id, ()):
        stack, seen = [start], set()
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            node = ad.node(n)
            if node is None or node.kind == "final":
                return None
            if node.kind == "join":
                hits.add(n)
                continue
            if node.kind == "fork":
                inner = _fork_join_ok(ad, succ, n)
                if inner is None:
                    return None
                stack.extend(succ.get(inner, ()))
                continue
            stack.extend(succ.get(n, ()))
    if len(hits) != 1:
        return None
    join = hits.pop()
    indeg = sum(1 for e in ad.edges if e.target == join)
    return join if indeg == len(succ.get(fork_id, ())) else None


def validate_ad(ad: ActivityDiagram, report=None) -> ValidationReport:
    report = ValidationReport() if report is None else report
    path = f"activity {ad.name}"
    ids = [n.id for n in ad.nodes]
    if len(set(ids)) != len(ids):
        report.append(Violation(path, "duplicate node"))
    kinds = [n.kind for n in ad.nodes]
    if kinds.count("initial") != 1:
        report.append(Violation(path, "exactly one initial node required"))
    if kinds.count("final") < 1:
        report.append(Violation(path, "at least one final node required"))
    for n in ad.nodes:
        if n.kind not in NODE_KINDS:
            report.append(Violation(path, f"unknown node kind {n.kind!r}"))
        if n.kind != "initial" and not is_label(n.id):
            report.append(Violation(path, f"invalid node name {n.id!r}"))
    succ = {}
    for e in ad.edges:
        ep = f"{path}.edge {e.source} -> {e.target}"
        for end in (e.source, e.target):
            if end not in ids:
                report.append(Violation(ep, f"undeclared node {end!r}"))
        _check_guards(e.guards, ep, report, "edge")
        succ.setdefault(e.source, []).append(e.target)
    for n in ad.nodes:
        out = [e for e in ad.edges if e.source == n.id]
        np_ = f"{path}.{n.kind} {n.id}"
        if n.kind == "decision":
            if len(out) < 2:
                report.append(Violation(np_, "decision needs at least two outgoing edges"))
            if any(not e.guards for e in out):
                report.append(Violation(np_, "decision edge without guard"))
        elif n.kind == "fork":
            if len(out) < 2:
                report.append(Violation(np_, "fork needs at least two outgoing edges"))
            elif _fork_join_ok(ad, succ, n.id) is None:
                report.append(Violation(np_, "fork without matching join"))
        elif n.kind == "final":
            if out:
                report.append(Violation(np_, "final node with outgoing edge"))
        elif len(out) > 1:
            report.append(Violation(np_, f"{n.kind} node with several outgoing edges"))
    return report


def validate(bundle: DiagramBundle) -> ValidationReport:
    """Collect every structural violation in ``bundle``."""
    report = ValidationReport()
    if bundle.sd is None:
        report.append(Violation("bundle", "sequence diagram is mandatory"))
    else:
        validate_sd(bundle.sd, report)
    if bundle.smd is None and bundle.ad is None:
        report.append(Violation("bundle", "bundle requires a second diagram"))
    if bundle.smd is not None:
        validate_smd(bundle.smd, report)
    if bundle.ad is not None:
        validate_ad(bundle.ad, report)
    return report


# -- guards --------------------------------------------------------------------

def _sd_guard_order(body, out):
    for el in body:
        if isinstance(el, Alt):
            for br in el.branches:
                out.extend(l.guard for l in br.guards)
                _sd_guard_order(br.body, out)
        elif isinstance(el, (Opt, Loop)):
            out.extend(l.guard for l in el.guards)
            _sd_guard_order(el.body, out)
        elif isinstance(el, Par):
            for op in el.operands:
                _sd_guard_order(op, out)


def diagram_guards(d: Diagram) -> list[str]:
    out: list[str] = []
    if isinstance(d, SequenceDiagram):
        _sd_guard_order(d.body, out)
    elif isinstance(d, StateMachineDiagram):
        # textual order: top-level transitions come after the region blocks
        for region in d.regions:
            for t in region.transitions:
                out.extend(l.guard for l in t.guards)
        for t in d.transitions:
            out.extend(l.guard for l in t.guards)
    elif isinstance(d, ActivityDiagram):
        for e in d.edges:
            out.extend(l.guard for l in e.guards)
    return list(dict.fromkeys(out))


def collect_guards(bundle: DiagramBundle) -> list[str]:
    """Every guard name in the bundle, SD first, then SMD, then AD."""
    out: list[str] = []
    for d in (bundle.sd, bundle.smd, bundle.ad):
        if d is not None:
            out.extend(diagram_guards(d))
    return list(dict.fromkeys(out))
