"""Explicit-state CTL model checking on a :class:`~uml2ts.ts.UnifiedTS`.

Sat sets are computed bottom-up.  Only EX, EU and EG have their own
algorithms (pre-image, least and greatest fixpoint); everything else is
rewritten onto them.  States without successors are treated as having a
self-loop, the same totalization the SMV emitter applies.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .ctl import (
    And, Atom, Const, Formula, Implies, Not, Or, Temporal, Until, render_ctl,
)
from .ts import GUARD_VALUES, UnifiedState, UnifiedTS


class CheckError(ValueError):
    pass


class UnsupportedWitness(Exception):
    pass


@dataclass(frozen=True)
class Trace:
    prefix: tuple  # tuple[UnifiedState, ...]
    loop_start: Optional[int] = None
    indices: tuple = ()

    def format(self) -> str:
        """NuSMV-style listing: numbered states, loop marker before the cycle."""
        lines = []
        guards = self.prefix[0].gvs.guards if self.prefix else ()
        prev = None
        for i, st in enumerate(self.prefix):
            if self.loop_start is not None and i == self.loop_start:
                lines.append("  -- loop starts here --")
            lines.append(f"  -> State: {i + 1} <-")
            lines.append(f"    State = {st.name}")
            for g in guards:
                if prev is None or prev.gvs[g] != st.gvs[g]:
                    lines.append(f"    {g} = {st.gvs[g].value}")
            prev = st
        return "\n".join(lines)

    def to_dict(self):
        return {
            "states": [{"State": s.name, **{g: s.gvs[g].value for g in s.gvs}} for s in self.prefix],
            "loop_start": self.loop_start,
        }


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    formula: Formula
    trace: Optional[Trace] = None
    trace_supported: bool = True

    def to_dict(self):
        return {
            "formula": render_ctl(self.formula),
            "satisfied": self.satisfied,
            "trace": self.trace.to_dict() if self.trace else None,
            "trace_supported": self.trace_supported,
        }


class Checker:
    """Fixpoint labeling over one unified TS; Sat sets are cached per subformula."""

    def __init__(self, uts: UnifiedTS):
        self.uts = uts
        n = len(uts.states)
        self.n = n
        self.all = frozenset(range(n))
        self.succ = []
        self.pred = [[] for _ in range(n)]
        for i in range(n):
            succ = list(dict.fromkeys(uts.successors(i))) or [i]
            self.succ.append(succ)
            for j in succ:
                self.pred[j].append(i)
        self.names = {}
        for i, s in enumerate(uts.states):
            self.names.setdefault(s.name, set()).add(i)
        self._cache = {}

    # -- Sat ---------------------------------------------------------------

    def sat(self, f: Formula) -> frozenset:
        if f not in self._cache:
            self._cache[f] = frozenset(self._sat(f))
        return self._cache[f]

    def _atom(self, f: Atom):
        if f.is_state:
            if f.value not in self.names:
                raise CheckError(f"unknown state name {f.value!r}")
            return self.names[f.value]
        if f.subject not in self.uts.guards:
            raise CheckError(f"unknown guard {f.subject!r}")
        if f.value not in {v.value for v in GUARD_VALUES}:
            raise CheckError(f"guard {f.subject} compared with {f.value!r}; expected dc, false or true")
        return {i for i, s in enumerate(self.uts.states) if s.gvs[f.subject].value == f.value}

    def _sat(self, f):
        if isinstance(f, Const):
            return self.all if f.value else set()
        if isinstance(f, Atom):
            return self._atom(f)
        if isinstance(f, Not):
            return self.all - self.sat(f.arg)
        if isinstance(f, And):
            return self.sat(f.left) & self.sat(f.right)
        if isinstance(f, Or):
            return self.sat(f.left) | self.sat(f.right)
        if isinstance(f, Implies):
            return (self.all - self.sat(f.left)) | self.sat(f.right)
        if isinstance(f, Temporal):
            a = f.arg
            if f.op == "EX":
                return self.ex(self.sat(a))
            if f.op == "EG":
                return self.eg(self.sat(a))
            if f.op == "EF":
                return self.eu(self.all, self.sat(a))
            if f.op == "AX":
                return self.all - self.ex(self.all - self.sat(a))
            if f.op == "AF":
                return self.all - self.eg(self.all - self.sat(a))
            if f.op == "AG":
                return self.all - self.eu(self.all, self.all - self.sat(a))
            raise CheckError(f"unknown operator {f.op}")
        if isinstance(f, Until):
            p, q = self.sat(f.left), self.sat(f.right)
            if f.quant == "E" and f.kind == "U":
                return self.eu(p, q)
            if f.quant == "E":
                return self.eu(p, q) | self.eg(p)
            nq = self.all - q
            bad = self.eu(nq, (self.all - p) & nq)
            if f.kind == "U":
                return self.all - (bad | self.eg(nq))
            return self.all - bad
        raise TypeError(f"not a formula: {f!r}")

    def ex(self, target):
        return {i for i in range(self.n) if any(j in target for j in self.succ[i])}

    def eu(self, p, q):
        """Least fixpoint Z = q | (p & EX Z) by backward search."""
        z = set(q)
        queue = deque(z)
        while queue:
            j = queue.popleft()
            for i in self.pred[j]:
                if i not in z and i in p:
                    z.add(i)
                    queue.append(i)
        return z

    def eg(self, p):
        """Greatest fixpoint Z = p & EX Z."""
        z = set(p)
        changed = True
        while changed:
            changed = False
            for i in list(z):
                if not any(j in z for j in self.succ[i]):
                    z.discard(i)
                    changed = True
        return z

    # -- witnesses ---------------------------------------------------------

    def witness(self, f: Formula, start: int):
        """Path (list of state ids, loop index or None) showing ``f`` at ``start``."""
        g = existential_nnf(f)
        path, loop = self._wit(g, start)
        return path, loop

    def _wit(self, f, s):
        if s not in self.sat(f):
            raise AssertionError("witness requested for a state that does not satisfy the formula")
        if _is_state_formula(f):
            return [s], None
        if isinstance(f, Or):
            for side in (f.left, f.right):
                if s in self.sat(side) and _is_state_formula(side):
                    return [s], None
            side = f.left if s in self.sat(f.left) else f.right
            return self._wit(side, s)
        if isinstance(f, And):
            lt, rt = _is_state_formula(f.left), _is_state_formula(f.right)
            if lt:
                return self._wit(f.right, s)
            if rt:
                return self._wit(f.left, s)
            raise UnsupportedWitness("conjunction of two temporal subformulas")
        if isinstance(f, Temporal) and f.op == "EX":
            target = self.sat(f.arg)
            t = min(j for j in self.succ[s] if j in target)
            rest, loop = self._wit(f.arg, t)
            return self._join([s], rest, loop)
        if isinstance(f, Until) and f.quant == "E" and f.kind == "U":
            seg = self._shortest(s, self.sat(f.left), self.sat(f.right))
            rest, loop = self._wit(f.right, seg[-1])
            return self._join(seg[:-1], rest, loop)
        if isinstance(f, Temporal) and f.op == "EG":
            return self._lasso(s, self.sat(f))
        raise UnsupportedWitness(f"no witness for {render_ctl(f)}")

    @staticmethod
    def _join(head, rest, loop):
        return head + rest, (None if loop is None else loop + len(head))

    def _shortest(self, s, p, q):
        parent = {s: None}
        queue = deque([s])
        while queue:
            i = queue.popleft()
            if i in q:
                path = []
                while i is not None:
                    path.append(i)
                    i = parent[i]
                return path[::-1]
            if i not in p:
                continue
            for j in sorted(self.succ[i]):
                if j not in parent:
                    parent[j] = i
                    queue.append(j)
        raise AssertionError("no E[U] path although the state satisfies it")

    def _lasso(self, s, inv):
        """Shortest prefix inside ``inv`` to a state on a cycle inside ``inv``."""
        def cycle_from(c):
            parent = {}
            queue = deque()
            for j in sorted(self.succ[c]):
                if j in inv and j not in parent:
                    parent[j] = c
                    queue.append(j)
            while queue:
                i = queue.popleft()
                if i == c:
                    path = [c]
                    k = parent[c]
                    while k != c:
                        path.append(k)
                        k = parent[k]
                    return [c] + path[1:][::-1]
                for j in sorted(self.succ[i]):
                    if j in inv and j not in parent:
                        parent[j] = i
                        queue.append(j)
            return None

        parent = {s: None}
        queue = deque([s])
        while queue:
            i = queue.popleft()
            cyc = cycle_from(i)
            if cyc is not None:
                prefix = []
                k = parent[i]
                while k is not None:
                    prefix.append(k)
                    k = parent[k]
                prefix = prefix[::-1]
                return prefix + cyc, len(prefix)
            for j in sorted(self.succ[i]):
                if j in inv and j not in parent:
                    parent[j] = i
                    queue.append(j)
        raise AssertionError("EG state without a cycle")


def _is_state_formula(f):
    """True for boolean combinations of atoms (no temporal operator)."""
    if isinstance(f, (Atom, Const)):
        return True
    if isinstance(f, Not):
        return _is_state_formula(f.arg)
    if isinstance(f, (And, Or, Implies)):
        return _is_state_formula(f.left) and _is_state_formula(f.right)
    return False


def existential_nnf(f: Formula, neg: bool = False) -> Formula:
    """Push negations inward, rewriting universal operators existentially.

    Raises :class:`UnsupportedWitness` when a universal path quantifier
    survives (e.g. ``AG`` under an even number of negations inside ``EF``).
    """
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return existential_nnf(f.arg, not neg)
    if isinstance(f, And):
        l, r = existential_nnf(f.left, neg), existential_nnf(f.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(f, Or):
        l, r = existential_nnf(f.left, neg), existential_nnf(f.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(f, Implies):
        return existential_nnf(Or(Not(f.left), f.right), neg)
    if isinstance(f, Temporal):
        op, a = f.op, f.arg
        table = {
            ("EX", False): lambda: Temporal("EX", existential_nnf(a)),
            ("AX", True): lambda: Temporal("EX", existential_nnf(a, True)),
            ("EF", False): lambda: Until("E", "U", Const(True), existential_nnf(a)),
            ("AG", True): lambda: Until("E", "U", Const(True), existential_nnf(a, True)),
            ("EG", False): lambda: Temporal("EG", existential_nnf(a)),
            ("AF", True): lambda: Temporal("EG", existential_nnf(a, True)),
        }
        if (op, neg) in table:
            return table[(op, neg)]()
        raise UnsupportedWitness(f"universal operator {op} in witness position")
    if isinstance(f, Until):
        p, q = f.left, f.right
        if f.quant == "E" and not neg:
            left, right = existential_nnf(p), existential_nnf(q)
            if f.kind == "U":
                return Until("E", "U", left, right)
            return Or(Until("E", "U", left, right), Temporal("EG", left))
        if f.quant == "A" and neg:
            nq = existential_nnf(q, True)
            np_ = existential_nnf(p, True)
            bad = Until("E", "U", nq, And(np_, nq))
            return Or(bad, Temporal("EG", nq)) if f.kind == "U" else bad
        raise UnsupportedWitness(f"universal {f.quant}[{f.kind}] in witness position")
    raise TypeError(f"not a formula: {f!r}")


def check(uts: UnifiedTS, f: Formula, checker: Optional[Checker] = None) -> Verdict:
    """Decide ``f`` at the initial state; attach a counterexample when it fails."""
    ck = checker or Checker(uts)
    ok = uts.initial in ck.sat(f)
    if ok:
        return Verdict(True, f)
    try:
        trace = counterexample(uts, f, ck)
    except UnsupportedWitness:
        return Verdict(False, f, None, trace_supported=False)
    return Verdict(False, f, trace)


def counterexample(uts: UnifiedTS, f: Formula, checker: Optional[Checker] = None) -> Trace:
    ck = checker or Checker(uts)
    if uts.initial in ck.sat(f):
        raise CheckError("formula holds; there is no counterexample")
    path, loop = ck.witness(Not(f), uts.initial)
    return Trace(tuple(uts.states[i] for i in path), loop, tuple(path))


def validate_trace(uts: UnifiedTS, trace: Trace) -> bool:
    """All steps are TS transitions (or the self-loop of a deadlock state)."""
    idx = trace.indices
    if not idx or idx[0] != uts.initial:
        return False

    def step_ok(a, b):
        succ = uts.successors(a)
        return b in succ or (not succ and a == b)

    if any(not step_ok(a, b) for a, b in zip(idx, idx[1:])):
        return False
    if trace.loop_start is not None:
        if not 0 <= trace.loop_start < len(idx):
            return False
        return step_ok(idx[-1], idx[trace.loop_start])
    return True
