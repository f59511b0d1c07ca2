"""Property specification patterns (Dwyer et al. catalogue) mapped to CTL.

``P`` is the proposition of interest, ``S`` the second proposition of the
order patterns (precedence: S precedes P; response: S responds to P), and
``Q``/``R`` delimit the scope.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ctl import AF, AG, AU, AW, And, Formula, Implies, Not, Or, parse_ctl

PATTERNS = ("absence", "existence", "universality", "precedence", "response")
SCOPES = ("global", "before-r", "after-q", "between-q-r", "after-q-until-r")

_SCOPE_ALIASES = {
    "globally": "global", "before": "before-r", "before r": "before-r",
    "after": "after-q", "after q": "after-q", "between": "between-q-r",
    "between q and r": "between-q-r", "after q until r": "after-q-until-r",
    "after-until": "after-q-until-r",
}

# LTL strings of the catalogue, kept for documentation/emission.
LTL = {
    ("absence", "global"): "G(!P)",
    ("absence", "before-r"): "F(R) -> (!P U R)",
    ("absence", "after-q"): "G(Q -> G(!P))",
    ("absence", "between-q-r"): "G((Q & !R & F(R)) -> (!P U R))",
    ("absence", "after-q-until-r"): "G(Q & !R -> (!P W R))",
    ("existence", "global"): "F(P)",
    ("existence", "before-r"): "!R W (P & !R)",
    ("existence", "after-q"): "G(!Q) | F(Q & F(P))",
    ("existence", "between-q-r"): "G(Q & !R -> (!R W (P & !R)))",
    ("existence", "after-q-until-r"): "G(Q & !R -> (!R U (P & !R)))",
    ("universality", "global"): "G(P)",
    ("universality", "before-r"): "F(R) -> (P U R)",
    ("universality", "after-q"): "G(Q -> G(P))",
    ("universality", "between-q-r"): "G((Q & !R & F(R)) -> (P U R))",
    ("universality", "after-q-until-r"): "G(Q & !R -> (P W R))",
    ("precedence", "global"): "!P W S",
    ("precedence", "before-r"): "F(R) -> (!P U (S | R))",
    ("precedence", "after-q"): "G(!Q) | (!Q U (Q & (!P W S)))",  # first Q opens the scope
    ("precedence", "between-q-r"): "G((Q & !R & F(R)) -> (!P U (S | R)))",
    ("precedence", "after-q-until-r"): "G(Q & !R -> (!P W (S | R)))",
    ("response", "global"): "G(P -> F(S))",
    ("response", "before-r"): "F(R) -> (P -> (!R U (S & !R))) U R",
    ("response", "after-q"): "G(Q -> G(P -> F(S)))",
    ("response", "between-q-r"): "G((Q & !R & F(R)) -> (P -> (!R U (S & !R))) U R)",
    ("response", "after-q-until-r"): "G(Q & !R -> ((P -> (!R U (S & !R))) W R))",
}


class PatternError(ValueError):
    pass


class UnsupportedCell(PatternError):
    def __init__(self, pattern, scope):
        cells = ", ".join(f"{p}/{s}" for p in PATTERNS for s in SCOPES)
        super().__init__(f"unsupported pattern/scope cell {pattern}/{scope}; supported cells: {cells}")


@dataclass(frozen=True)
class PatternSpec:
    pattern: str
    scope: str = "global"
    p: Optional[Formula] = None
    q: Optional[Formula] = None
    r: Optional[Formula] = None
    s: Optional[Formula] = None


def normalize_scope(scope: str) -> str:
    key = scope.strip().lower().replace("_", "-")
    return _SCOPE_ALIASES.get(key, _SCOPE_ALIASES.get(key.replace("-", " "), key))


def _as_formula(x):
    if x is None or isinstance(x, Formula):
        return x
    return parse_ctl(x)


def instantiate_pattern(spec: PatternSpec) -> Formula:
    pattern = spec.pattern.strip().lower()
    scope = normalize_scope(spec.scope)
    if pattern not in PATTERNS or scope not in SCOPES:
        raise UnsupportedCell(spec.pattern, spec.scope)
    P, Q, R, S = (_as_formula(x) for x in (spec.p, spec.q, spec.r, spec.s))
    needed = {"p": P}
    if pattern in ("precedence", "response"):
        needed["s"] = S
    if scope in ("after-q", "between-q-r", "after-q-until-r"):
        needed["q"] = Q
    if scope in ("before-r", "between-q-r", "after-q-until-r"):
        needed["r"] = R
    missing = [k for k, v in needed.items() if v is None]
    if missing:
        raise PatternError(f"{pattern}/{scope} needs {', '.join(m.upper() for m in missing)}")

    def inside(body):
        # between-q-r and after-q-until-r wrap the same body
        return AG(Implies(And(Q, Not(R)), body))

    if pattern == "absence":
        if scope == "global":
            return AG(Not(P))
        if scope == "before-r":
            return AW(Or(Not(P), AG(Not(R))), R)
        if scope == "after-q":
            return AG(Implies(Q, AG(Not(P))))
        if scope == "between-q-r":
            return inside(AW(Or(Not(P), AG(Not(R))), R))
        return inside(AW(Not(P), R))
    if pattern == "existence":
        if scope == "global":
            return AF(P)
        if scope == "before-r":
            return AW(Not(R), And(P, Not(R)))
        if scope == "after-q":
            return AW(Not(Q), And(Q, AF(P)))
        if scope == "between-q-r":
            return inside(AW(Not(R), And(P, Not(R))))
        return inside(AU(Not(R), And(P, Not(R))))
    if pattern == "universality":
        if scope == "global":
            return AG(P)
        if scope == "before-r":
            return AW(Or(P, AG(Not(R))), R)
        if scope == "after-q":
            return AG(Implies(Q, AG(P)))
        if scope == "between-q-r":
            return inside(AW(Or(P, AG(Not(R))), R))
        return inside(AW(P, R))
    if pattern == "precedence":
        if scope == "global":
            return AW(Not(P), S)
        if scope == "before-r":
            return AW(Or(Not(P), AG(Not(R))), Or(S, R))
        if scope == "after-q":
            return AW(Not(Q), And(Q, AW(Not(P), S)))
        if scope == "between-q-r":
            return inside(AW(Or(Not(P), AG(Not(R))), Or(S, R)))
        return inside(AW(Not(P), Or(S, R)))
    # response
    respond = Implies(P, AU(Not(R), And(S, Not(R)))) if R is not None else None
    if scope == "global":
        return AG(Implies(P, AF(S)))
    if scope == "before-r":
        return AW(Or(respond, AG(Not(R))), R)
    if scope == "after-q":
        return AW(Not(Q), And(Q, AG(Implies(P, AF(S)))))
    if scope == "between-q-r":
        return inside(AW(Or(respond, AG(Not(R))), R))
    return inside(AW(respond, R))
