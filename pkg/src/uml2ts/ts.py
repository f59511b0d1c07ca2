"""Transition-system data model shared by the builders, unifier and checker."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional


class GuardValue(str, Enum):
    DC = "dc"
    FALSE = "false"
    TRUE = "true"

    def __str__(self):
        return self.value

    @classmethod
    def of(cls, v) -> GuardValue:
        if isinstance(v, GuardValue):
            return v
        if isinstance(v, bool):
            return cls.TRUE if v else cls.FALSE
        return cls(v)


DC, FALSE, TRUE = GuardValue.DC, GuardValue.FALSE, GuardValue.TRUE
GUARD_VALUES = (DC, FALSE, TRUE)


class GuardError(ValueError):
    pass


@dataclass(frozen=True)
class GuardValuation(Mapping):
    """Total map from the bundle's guard list to :class:`GuardValue`."""

    guards: tuple
    values: tuple

    def __post_init__(self):
        if len(self.guards) != len(self.values):
            raise ValueError("guards and values differ in length")

    @classmethod
    def all_dc(cls, guards: Iterable[str]) -> GuardValuation:
        guards = tuple(guards)
        return cls(guards, (DC,) * len(guards))

    @classmethod
    def from_dict(cls, guards, d) -> GuardValuation:
        guards = tuple(guards)
        return cls(guards, tuple(GuardValue.of(d.get(g, DC)) for g in guards))

    def __getitem__(self, g):
        try:
            return self.values[self.guards.index(g)]
        except ValueError:
            raise KeyError(g) from None

    def __iter__(self):
        return iter(self.guards)

    def __len__(self):
        return len(self.guards)

    def __str__(self):
        return " ".join(f"{g}={v.value}" for g, v in zip(self.guards, self.values))


# An update set is a frozenset of (guard, bool) pairs.
Updates = frozenset


def updates_of(literals) -> frozenset:
    """Turn guard literals into an update set."""
    return frozenset((l.guard, l.polarity) for l in literals)


def updates_conflict(a, b) -> bool:
    da = dict(a)
    return any(g in da and da[g] != v for g, v in b)


def _check_known(current: GuardValuation, updates):
    for g, _ in updates:
        if g not in current.guards:
            raise GuardError(f"unknown guard {g!r}")


def gvs_consistent(current: GuardValuation, updates, reassign=frozenset()) -> bool:
    """True when every update agrees with ``current`` or hits a dc slot.

    Guards named in ``reassign`` are re-evaluated by the transition and may
    be overwritten whatever their current value.
    """
    _check_known(current, updates)
    for g, v in updates:
        if g in reassign:
            continue
        cur = current[g]
        if cur is not DC and cur is not GuardValue.of(v):
            return False
    return True


def gvs_apply(current: GuardValuation, updates, reassign=frozenset()) -> GuardValuation:
    if not gvs_consistent(current, updates, reassign):
        raise GuardError(f"update {sorted(updates)} inconsistent with {current}")
    return gvs_overwrite(current, updates)


def gvs_overwrite(current: GuardValuation, updates) -> GuardValuation:
    """Pointwise overwrite without a consistency check."""
    _check_known(current, updates)
    d = dict(updates)
    if len(d) != len(updates):
        raise GuardError(f"update set assigns a guard twice: {sorted(updates)}")
    vals = tuple(GuardValue.of(d[g]) if g in d else v
                 for g, v in zip(current.guards, current.values))
    return GuardValuation(current.guards, vals)


PLACEHOLDER = "-"


@dataclass(frozen=True)
class Label:
    parts: tuple

    def __post_init__(self):
        if not self.parts:
            raise ValueError("label needs at least one part")

    @classmethod
    def of(cls, *parts) -> Label:
        return cls(tuple(parts))

    @property
    def is_placeholder(self) -> bool:
        return self.parts == (PLACEHOLDER,)

    def render(self) -> str:
        return "and".join(self.parts)

    def __str__(self):
        return self.render()


START = Label.of("Start")
END = Label.of("End")
MISSING = Label.of(PLACEHOLDER)


@dataclass(frozen=True)
class CState:
    id: int
    label: Label
    gvs: GuardValuation


@dataclass(frozen=True)
class CTransition:
    source: int
    target: int
    updates: frozenset = frozenset()
    reassign: frozenset = frozenset()


@dataclass
class ComponentTS:
    """Transition system built from a single diagram."""

    kind: str  # "SD", "SMD" or "AD"
    guards: tuple
    states: list = field(default_factory=list)
    transitions: list = field(default_factory=list)
    initial: int = 0

    def __post_init__(self):
        self._out = None

    def outgoing(self, sid: int) -> list:
        if self._out is None:
            self._out = {}
            for t in self.transitions:
                self._out.setdefault(t.source, []).append(t)
        return self._out.get(sid, [])

    def state(self, sid: int) -> CState:
        return self.states[sid]

    def dump(self) -> str:
        return component_dump(self)


def render_unified(msg: Label, st: Label, act: Label) -> str:
    """``msg-st-act``; a placeholder slot renders empty, giving ``m--a``."""
    return "-".join("" if l.is_placeholder else l.render() for l in (msg, st, act))


@dataclass(frozen=True)
class UnifiedState:
    msg: Label
    st: Label
    act: Label
    gvs: GuardValuation

    @property
    def name(self) -> str:
        return render_unified(self.msg, self.st, self.act)

    @property
    def key(self):
        return (self.name, self.gvs.values)

    def __str__(self):
        return state_text(self.name, self.gvs)


def state_text(name: str, gvs: GuardValuation) -> str:
    return f"{name} | {gvs}" if len(gvs) else name


@dataclass
class UnifiedTS:
    guards: tuple
    states: list  # list[UnifiedState], index = node id, first-BFS-occurrence order
    transitions: list  # list[(int, int)], deduplicated
    initial: int = 0

    def __post_init__(self):
        self._succ = None
        self._index = None

    @property
    def initial_state(self) -> UnifiedState:
        return self.states[self.initial]

    def successors(self, i: int) -> list:
        if self._succ is None:
            self._succ = [[] for _ in self.states]
            for s, t in self.transitions:
                self._succ[s].append(t)
        return self._succ[i]

    def names(self) -> list:
        """Distinct rendered names in first-occurrence order."""
        return list(dict.fromkeys(s.name for s in self.states))

    def find(self, name: str, gvs: Optional[GuardValuation] = None):
        if self._index is None:
            self._index = {s.key: i for i, s in enumerate(self.states)}
        if gvs is None:
            return [i for i, s in enumerate(self.states) if s.name == name]
        return self._index.get((name, gvs.values))

    def dump(self) -> str:
        return unified_dump(self)


def component_dump(cts: ComponentTS) -> str:
    states = sorted(state_text(s.label.render(), s.gvs) for s in cts.states)
    trans = sorted(
        f"{state_text(cts.states[t.source].label.render(), cts.states[t.source].gvs)} -> "
        f"{state_text(cts.states[t.target].label.render(), cts.states[t.target].gvs)}"
        for t in cts.transitions)
    head = [f"# {cts.kind}", "guards " + " ".join(cts.guards),
            "initial " + state_text(cts.states[cts.initial].label.render(),
                                    cts.states[cts.initial].gvs)]
    return "\n".join(head + states + trans) + "\n"


def unified_dump(uts: UnifiedTS) -> str:
    """Debug dump: header, then sorted state lines, then sorted ``SRC -> DST`` lines."""
    text = [str(s) for s in uts.states]
    states = sorted(text)
    trans = sorted(f"{text[s]} -> {text[t]}" for s, t in uts.transitions)
    head = ["guards " + " ".join(uts.guards), "initial " + text[uts.initial]]
    return "\n".join(head + states + trans) + "\n"


def _parse_state_text(line, guards):
    if " | " in line:
        name, vals = line.split(" | ", 1)
        d = dict(kv.split("=", 1) for kv in vals.split())
    else:
        name, d = line, {}
    if set(d) != set(guards):
        raise ValueError(f"state line {line!r} does not match guard list")
    return name, GuardValuation.from_dict(guards, d)


def _split_name(name):
    parts = name.split("-")
    if len(parts) != 3:
        raise ValueError(f"unified name {name!r} does not have three slots")
    return [Label(tuple(p.split("and"))) if p else MISSING for p in parts]


def load_unified_dump(text: str) -> UnifiedTS:
    """Rebuild a :class:`UnifiedTS` from :func:`unified_dump` output.

    Slot labels are recovered by splitting on ``-``; the ``and`` structure of
    a slot is not recoverable and is kept as one part, which renders the same.
    """
    guards: tuple = ()
    initial_line = None
    state_lines, trans_lines = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("guards"):
            guards = tuple(line.split()[1:])
        elif line.startswith("initial "):
            initial_line = line[len("initial "):]
        elif " -> " in line:
            trans_lines.append(line)
        else:
            state_lines.append(line)
    if initial_line is None:
        raise ValueError("dump has no initial line")
    order = [initial_line] + [l for l in state_lines if l != initial_line]
    index = {}
    states = []
    for line in order:
        name, gvs = _parse_state_text(line, guards)
        msg, st, act = (Label.of(p.render()) if not p.is_placeholder else p
                        for p in _split_name(name))
        index[line] = len(states)
        states.append(UnifiedState(msg, st, act, gvs))
    trans = []
    for line in trans_lines:
        src, dst = line.split(" -> ")
        trans.append((index[src], index[dst]))
    return UnifiedTS(guards, states, sorted(set(trans)), 0)
