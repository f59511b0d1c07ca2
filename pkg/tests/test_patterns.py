import itertools
import random
import re

import pytest

from uml2ts.checker import Checker
from uml2ts.ctl import AF, AG, AW, And, Atom, Implies, Not, Or, parse_ctl, render_ctl
from uml2ts.patterns import (
    LTL, PATTERNS, SCOPES, PatternError, PatternSpec, UnsupportedCell,
    instantiate_pattern, normalize_scope,
)
from uml2ts.ts import FALSE, MISSING, TRUE, GuardValuation, Label, UnifiedState, UnifiedTS

from generators import ltl_holds, parse_ltl

Q_ATM = "(CardOk = false | PinOk = false)"
P_ATM = "State = WaitAccount-CardValidandPinValid-InitiateTransaction"
REQ1 = ("AG ((CardOk = false | PinOk = false) -> "
        "AG (!(State = WaitAccount-CardValidandPinValid-InitiateTransaction)))")
REQ2 = ("A[!(State = InsuffFunds-Modify-ShowBalance) W ((State = InsuffFunds-Modify-ShowBalance) "
        "& AF(State = CashAdvance-Chkbal-CheckBalance))]")


def squash(text):
    return re.sub(r"\s+", "", text)


def test_absence_after_q_reproduces_requirement_1():
    f = instantiate_pattern(PatternSpec("absence", "after-q", p=P_ATM, q=Q_ATM))
    assert f == parse_ctl(REQ1)
    assert squash(render_ctl(f)) == squash(REQ1)


def test_existence_after_q_reproduces_requirement_2():
    q = "State = InsuffFunds-Modify-ShowBalance"
    p = "State = CashAdvance-Chkbal-CheckBalance"
    f = instantiate_pattern(PatternSpec("existence", "after q", p=p, q=q))
    assert f == parse_ctl(REQ2)


def test_absence_global():
    p = Atom("State", "X")
    assert instantiate_pattern(PatternSpec("absence", "global", p=p)) == AG(Not(p))


def test_shapes_of_the_after_q_cells():
    p, q = Atom("p", "true"), Atom("q", "true")
    assert instantiate_pattern(PatternSpec("absence", "after-q", p=p, q=q)) == AG(Implies(q, AG(Not(p))))
    assert instantiate_pattern(PatternSpec("existence", "after-q", p=p, q=q)) == AW(Not(q), And(q, AF(p)))


def test_missing_anchor():
    with pytest.raises(PatternError, match="needs Q"):
        instantiate_pattern(PatternSpec("absence", "after-q", p="State = X"))


def test_unknown_cell_lists_supported_cells():
    with pytest.raises(UnsupportedCell) as exc:
        instantiate_pattern(PatternSpec("bounded-existence", "global", p="State = X"))
    assert "absence/global" in str(exc.value)
    assert "response/after-q-until-r" in str(exc.value)


@pytest.mark.parametrize("alias, scope", [
    ("globally", "global"), ("after Q", "after-q"), ("between Q and R", "between-q-r"),
    ("after_q_until_r", "after-q-until-r"), ("before", "before-r"),
])
def test_scope_aliases(alias, scope):
    assert normalize_scope(alias) == scope


# -- every cell against its LTL reading on single-path models ---------------------

LETTERS = "PQRS"


def lasso_model(word, loop):
    """A deterministic TS whose only path spells ``word`` then repeats from ``loop``."""
    guards = tuple(LETTERS)
    states = [UnifiedState(Label.of(f"w{i}"), MISSING, MISSING,
                           GuardValuation(guards, tuple(TRUE if c in w else FALSE for c in LETTERS)))
              for i, w in enumerate(word)]
    trans = [(i, i + 1) for i in range(len(word) - 1)] + [(len(word) - 1, loop)]
    return UnifiedTS(guards, states, trans, 0)


def words(rng, count):
    for _ in range(count):
        n = rng.randint(1, 7)
        word = [frozenset(c for c in LETTERS if rng.random() < 0.3) for _ in range(n)]
        yield word, rng.randrange(n)


CELLS = list(itertools.product(PATTERNS, SCOPES))


@pytest.mark.parametrize("pattern, scope", CELLS)
def test_cell_agrees_with_its_ltl_on_lassos(pattern, scope):
    atoms = {k.lower(): Atom(k, "true") for k in LETTERS}
    f = instantiate_pattern(PatternSpec(pattern, scope, **atoms))
    ltl = parse_ltl(LTL[(pattern, scope)])
    rng = random.Random(f"{pattern}/{scope}")
    for word, loop in words(rng, 400):
        uts = lasso_model(word, loop)
        ctl_says = uts.initial in Checker(uts).sat(f)
        assert ctl_says == ltl_holds(ltl, word, loop), (word, loop)


def test_ltl_reader_sanity():
    # letters true from position 1 on, looping at 1
    word = [frozenset(), frozenset("P")]
    assert ltl_holds(parse_ltl("F(P)"), word, 1)
    assert not ltl_holds(parse_ltl("G(P)"), word, 1)
    assert ltl_holds(parse_ltl("!P U P"), word, 1)
    assert ltl_holds(parse_ltl("F(R) -> (P U R)"), word, 1)
    assert not ltl_holds(parse_ltl("Q | R"), word, 1)
    assert ltl_holds(parse_ltl("X(P)"), word, 1)
