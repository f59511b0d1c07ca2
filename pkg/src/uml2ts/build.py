"""Per-diagram transition system builders.

Sequence and activity diagrams are both lowered to a small control-flow
graph (actions, junctions, forks, joins) and then explored with a token
game: every token sitting on an action advances one action per step, so
parallel branches move in lockstep and their labels are ``and``-joined.
A branch that reaches its join early waits there and keeps showing its
last label.  Decision points are dissolved: the guard literals collected
on the way from one action to the next become the transition's updates.

State machines are explored directly; orthogonal regions step
synchronously.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .model import (
    INITIAL_ID, ActivityDiagram, Alt, Loop, Message, Opt, Par,
    SequenceDiagram, StateMachineDiagram,
)
from .ts import (
    END, START, ComponentTS, CState, CTransition, GuardValuation, Label,
    gvs_overwrite, updates_conflict, updates_of,
)

_END = "END"


@dataclass
class FlowGraph:
    kinds: dict = field(default_factory=dict)    # node -> initial/action/junction/fork/join/final
    labels: dict = field(default_factory=dict)   # action node -> label text
    edges: dict = field(default_factory=dict)    # node -> [(target, updates, reassign)]
    arity: dict = field(default_factory=dict)    # join -> number of tokens it waits for

    def add(self, node, kind, label=None):
        self.kinds[node] = kind
        if label is not None:
            self.labels[node] = label
        self.edges.setdefault(node, [])

    def connect(self, src, dst, updates=frozenset(), reassign=frozenset()):
        self.edges[src].append((dst, frozenset(updates), frozenset(reassign)))


# -- lowering ------------------------------------------------------------------

def sd_flow(sd: SequenceDiagram) -> FlowGraph:
    fg = FlowGraph()
    counter = itertools.count()
    fresh = lambda prefix: f"{prefix}#{next(counter)}"

    def link(pending, dst):
        for src, upd, rea in pending:
            fg.connect(src, dst, upd, rea)

    def seq(body, pending):
        for el in body:
            if isinstance(el, Message):
                n = fresh("msg")
                fg.add(n, "action", el.name)
                link(pending, n)
                pending = [(n, frozenset(), frozenset())]
            elif isinstance(el, Alt):
                d = fresh("alt")
                fg.add(d, "junction")
                link(pending, d)
                pending = []
                for br in el.branches:
                    pending += seq(br.body, [(d, updates_of(br.guards), frozenset())])
            elif isinstance(el, Opt):
                d = fresh("opt")
                fg.add(d, "junction")
                link(pending, d)
                pending = seq(el.body, [(d, updates_of(el.guards), frozenset())])
                pending += [(d, updates_of([l.negated()]), frozenset()) for l in el.guards]
            elif isinstance(el, Loop):
                d = fresh("loop")
                fg.add(d, "junction")
                link(pending, d)
                names = frozenset(l.guard for l in el.guards)
                link(seq(el.body, [(d, updates_of(el.guards), names)]), d)
                pending = [(d, updates_of([l.negated()]), frozenset({l.guard}))
                           for l in el.guards]
            elif isinstance(el, Par):
                f, j = fresh("fork"), fresh("join")
                fg.add(f, "fork")
                fg.add(j, "join")
                fg.arity[j] = len(el.operands)
                link(pending, f)
                for op in el.operands:
                    link(seq(op, [(f, frozenset(), frozenset())]), j)
                pending = [(j, frozenset(), frozenset())]
        return pending

    fg.add(INITIAL_ID, "initial", "Start")
    exits = seq(sd.body, [(INITIAL_ID, frozenset(), frozenset())])
    fg.add("final", "final")
    link(exits, "final")
    return fg


def ad_flow(ad: ActivityDiagram) -> FlowGraph:
    fg = FlowGraph()
    kind_map = {"decision": "junction", "merge": "junction"}
    for n in ad.nodes:
        kind = kind_map.get(n.kind, n.kind)
        fg.add(n.id, kind, "Start" if n.kind == "initial" else (n.id if n.kind == "action" else None))
    for e in ad.edges:
        fg.connect(e.source, e.target, updates_of(e.guards))
    for n in ad.nodes:
        if n.kind == "join":
            fg.arity[n.id] = sum(1 for e in ad.edges if e.target == n.id)
    return fg


# -- token game ----------------------------------------------------------------

def _merge(a, b):
    if updates_conflict(a, b):
        return None
    return a | b


def _reach(fg, node, last, upd, rea, visited):
    """Yield (tokens, updates, reassign) for every way to settle after ``node``."""
    kind = fg.kinds[node]
    if kind in ("action", "initial"):
        yield ((node, fg.labels[node]),), upd, rea
    elif kind == "final":
        yield _END, upd, rea
    elif kind == "join":
        yield ((node, last),), upd, rea
    elif kind == "junction":
        if node in visited:
            return
        for dst, eu, er in fg.edges[node]:
            m = _merge(upd, eu)
            if m is not None:
                yield from _reach(fg, dst, last, m, rea | er, visited | {node})
    elif kind == "fork":
        branches = [list(_reach(fg, dst, last, eu, er, frozenset()))
                    for dst, eu, er in fg.edges[node]]
        for combo in itertools.product(*branches):
            toks, u, r = (), upd, rea
            ok = True
            for btoks, bu, br in combo:
                if btoks is _END:
                    ok = False
                    break
                u = _merge(u, bu)
                if u is None:
                    ok = False
                    break
                toks += btoks
                r |= br
            if ok:
                yield toks, u, r


def _advance(fg, node, last):
    for dst, eu, er in fg.edges[node]:
        yield from _reach(fg, dst, last, eu, er, frozenset())


def _complete_joins(fg, tokens, upd, rea):
    """Fire every join whose tokens have all arrived; yields settled configs."""
    if tokens is _END:
        yield _END, upd, rea
        return
    for j in dict.fromkeys(n for n, _ in tokens):
        if fg.kinds[j] != "join":
            continue
        here = [i for i, (n, _) in enumerate(tokens) if n == j]
        if len(here) < fg.arity.get(j, 0):
            continue
        last = "and".join(tokens[i][1] for i in here)
        for out, u, r in _advance(fg, j, last):
            m = _merge(upd, u)
            if m is None:
                continue
            if out is _END:
                yield _END, m, rea | r
                continue
            first = here[0]
            rest = tuple(t for i, t in enumerate(tokens) if i not in here)
            new = rest[:first] + out + rest[first:]
            yield from _complete_joins(fg, new, m, rea | r)
        return
    yield tokens, upd, rea


def _step(fg, tokens):
    """All (next_tokens, updates, reassign) from one lockstep step."""
    options = []
    moved = False
    for node, label in tokens:
        if fg.kinds[node] in ("action", "initial"):
            opts = [o for o in _advance(fg, node, label)]
            if opts:
                moved = True
                options.append(opts)
                continue
        options.append([(((node, label),), frozenset(), frozenset())])
    if not moved:
        return []
    out = []
    for combo in itertools.product(*options):
        toks, u, r = (), frozenset(), frozenset()
        end = False
        for t, cu, cr in combo:
            u = _merge(u, cu)
            if u is None:
                break
            r |= cr
            if t is _END:
                end = True
            else:
                toks += t
        else:
            out.extend(_complete_joins(fg, _END if end else toks, u, r))
    return out


def _label(tokens):
    if tokens is _END:
        return END
    return Label(tuple(lbl for _, lbl in tokens))


def _explore(kind, guards, start_cfg, step, label_of):
    """Breadth-first exploration keyed on (configuration, gvs)."""
    guards = tuple(guards)
    gvs0 = GuardValuation.all_dc(guards)
    cts = ComponentTS(kind, guards)
    ids = {}

    def intern(cfg, gvs):
        key = (cfg, gvs.values)
        if key not in ids:
            ids[key] = len(cts.states)
            cts.states.append(CState(ids[key], label_of(cfg), gvs))
            queue.append((cfg, gvs))
        return ids[key]

    queue = deque()
    cts.initial = intern(start_cfg, gvs0)
    trans = set()
    order = []
    while queue:
        cfg, gvs = queue.popleft()
        src = ids[(cfg, gvs.values)]
        succs = []
        for nxt, upd, rea in step(cfg):
            succs.append((label_of(nxt).render(), repr(nxt), sorted(upd), nxt, upd, rea))
        succs.sort(key=lambda s: s[:3])
        for *_, nxt, upd, rea in succs:
            dst = intern(nxt, gvs_overwrite(gvs, upd))
            t = CTransition(src, dst, upd, rea)
            if t not in trans:
                trans.add(t)
                order.append(t)
    cts.transitions = order
    return cts


def flow_to_ts(fg: FlowGraph, kind: str, guards) -> ComponentTS:
    start = ((INITIAL_ID, "Start"),)
    step = lambda cfg: [] if cfg is _END else _step(fg, cfg)
    return _explore(kind, guards, start, step, _label)


def sd_to_ts(sd: SequenceDiagram, guards) -> ComponentTS:
    """Component TS of a sequence diagram (``Start`` ... ``End``)."""
    return flow_to_ts(sd_flow(sd), "SD", guards)


def ad_to_ts(ad: ActivityDiagram, guards) -> ComponentTS:
    """Component TS of an activity diagram; decision and merge nodes are dissolved."""
    return flow_to_ts(ad_flow(ad), "AD", guards)


# -- state machines ---------------------------------------------------------------

def smd_to_ts(smd: StateMachineDiagram, guards) -> ComponentTS:
    """Component TS of a state machine.

    Configurations are ``("top", state)`` or ``("comp", (s1, s2, ...))`` with
    one state per region.  Inside the composite every region with an enabled
    internal transition steps at once; exits are only taken once no region
    can move internally, and the first region (declaration order) with an
    exit wins.  There is no synthetic ``End``.
    """
    regions = smd.regions
    region_idx = {s: i for i, r in enumerate(regions) for s in r.states}
    out = {}
    for t in smd.all_transitions():
        out.setdefault(t.source, []).append(t)

    def enter(target):
        if target not in region_idx:
            return ("top", target)
        k = region_idx[target]
        return ("comp", tuple(target if i == k else r.initial for i, r in enumerate(regions)))

    def step(cfg):
        if cfg == ("start",):
            return [(enter(smd.initial), frozenset(), frozenset())]
        tag, where = cfg
        if tag == "top":
            return [(enter(t.target), updates_of(t.guards), frozenset())
                    for t in out.get(where, ())]
        per_region = []
        any_internal = False
        for i, s in enumerate(where):
            internal = [t for t in out.get(s, ()) if region_idx.get(t.target) == i]
            any_internal |= bool(internal)
            per_region.append(internal)
        if any_internal:
            results = [((), frozenset())]
            for i, internal in enumerate(per_region):
                nxt = []
                for states, acc in results:
                    opts = [t for t in internal if not updates_conflict(acc, updates_of(t.guards))]
                    if not opts:
                        nxt.append((states + (where[i],), acc))
                    for t in opts:
                        nxt.append((states + (t.target,), acc | updates_of(t.guards)))
                results = nxt
            return [(("comp", states), acc, frozenset()) for states, acc in results]
        for s in where:
            exits = [t for t in out.get(s, ()) if t.target not in region_idx]
            if exits:
                return [(("top", t.target), updates_of(t.guards), frozenset()) for t in exits]
        return []

    def label_of(cfg):
        if cfg == ("start",):
            return START
        tag, where = cfg
        return Label.of(where) if tag == "top" else Label(tuple(where))

    return _explore("SMD", guards, ("start",), step, label_of)
