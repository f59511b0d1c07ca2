import random

import pytest
from hypothesis import given, settings, strategies as st

from uml2ts import ATM_FILES, fixture_path
from uml2ts.checker import CheckError, Checker, check, counterexample, validate_trace
from uml2ts.ctl import AF, AG, EF, EG, EU, EX, Atom, Not, Temporal, Until, parse_ctl
from uml2ts.ts import DC, MISSING, GuardValuation, Label, UnifiedState, UnifiedTS
from uml2ts.ubd import load_bundle
from uml2ts.unify import unify_bundle

from generators import PathOracle, random_formula, random_uts

INSUFF = "InsuffFunds-Modify-ShowBalance"
CASH = "CashAdvance-Chkbal-CheckBalance"
REQ1 = ("AG ((CardOk = false | PinOk = false) -> "
        "AG (!(State = WaitAccount-CardValidandPinValid-InitiateTransaction)))")
REQ2 = f"A[!(State = {INSUFF}) W ((State = {INSUFF}) & AF(State = {CASH}))]"


@pytest.fixture(scope="module")
def atm():
    return unify_bundle(load_bundle([str(fixture_path(n)) for n in ATM_FILES]))


def chain(*names, loops=(), guards=()):
    dc = GuardValuation.all_dc(guards)
    states = [UnifiedState(Label.of(n), MISSING, MISSING, dc) for n in names]
    trans = [(i, i + 1) for i in range(len(names) - 1)] + list(loops)
    return UnifiedTS(tuple(guards), states, trans, 0)


def refutes(uts, trace, f):
    """Does the path in ``trace`` violate the universal formula ``f``?"""
    oracle = PathOracle(uts)
    idx = list(trace.indices)
    holds = lambda g, i: oracle.ev(g, i)  # noqa: E731
    if isinstance(f, Temporal) and f.op == "AG":
        return any(not holds(f.arg, i) for i in idx)
    if isinstance(f, Temporal) and f.op == "AX":
        nxt = idx[1] if len(idx) > 1 else idx[0]
        return not holds(f.arg, nxt)
    if isinstance(f, Temporal) and f.op == "AF":
        return trace.loop_start is not None and not any(holds(f.arg, i) for i in idx)
    if isinstance(f, Until) and f.quant == "A":
        for i in idx:
            if holds(f.right, i):
                return False
            if not holds(f.left, i):
                return True
        return f.kind == "U" and trace.loop_start is not None
    raise ValueError(f)


def test_requirement_1_satisfied(atm):
    assert check(atm, parse_ctl(REQ1)).satisfied


def test_requirement_2_violated_with_lasso(atm):
    v = check(atm, parse_ctl(REQ2))
    assert not v.satisfied and v.trace is not None
    names = [s.name for s in v.trace.prefix]
    assert INSUFF in names
    assert v.trace.loop_start is not None
    after = names[names.index(INSUFF):]
    assert CASH not in after
    assert validate_trace(atm, v.trace)
    assert refutes(atm, v.trace, parse_ctl(REQ2))


def test_initial_state_atom(atm):
    assert check(atm, Atom("State", atm.initial_state.name)).satisfied


def test_unknown_names_are_errors(atm):
    with pytest.raises(CheckError, match="unknown state"):
        check(atm, parse_ctl("AG (!(State = Nowhere-Idle-End))"))
    with pytest.raises(CheckError, match="unknown guard"):
        check(atm, parse_ctl("AG (Bogus = dc)"))
    with pytest.raises(CheckError):
        check(atm, parse_ctl("AG (CardOk = maybe)"))


def test_failed_safety_gives_shortest_path():
    u = chain("Start", "a", "p", "b", loops=[(0, 2), (3, 3)])
    v = check(u, AG(Not(Atom("State", "p--"))))
    assert [s.name for s in v.trace.prefix] == ["Start--", "p--"]
    assert v.trace.loop_start is None


def test_failed_af_on_self_loop_gives_one_state_lasso():
    # two states, the second loops on itself; p never holds
    u = UnifiedTS((), chain("Start", "s").states + chain("p").states, [(0, 1), (1, 1)], 0)
    v = check(u, AF(Atom("State", "p--")))
    assert not v.satisfied
    assert [s.name for s in v.trace.prefix] == ["Start--", "s--"]
    assert v.trace.loop_start == 1


def test_deadlocks_behave_as_self_loops():
    u = chain("Start", "a")
    assert check(u, parse_ctl("AG (State = Start-- | EX (State = a--))")).satisfied
    assert check(u, parse_ctl("EF (EG (State = a--))")).satisfied
    assert check(u, parse_ctl("AF (AG (State = a--))")).satisfied


def test_guard_atoms():
    g = ("g",)
    states = [UnifiedState(Label.of("Start"), MISSING, MISSING, GuardValuation(g, (DC,))),
              UnifiedState(Label.of("a"), MISSING, MISSING, GuardValuation.from_dict(g, {"g": "true"}))]
    u = UnifiedTS(g, states, [(0, 1)], 0)
    assert check(u, parse_ctl("g = dc & AX (g = true)")).satisfied
    assert not check(u, parse_ctl("EF (g = false)")).satisfied


def test_counterexample_of_a_true_formula_is_an_error():
    u = chain("Start")
    with pytest.raises(CheckError):
        counterexample(u, Atom("State", "Start--"))


def test_nested_universal_witness_is_verdict_only():
    u = chain("Start", "a", "b", loops=[(2, 1)])
    v = check(u, parse_ctl("EF (AG (State = a--))"))
    assert not v.satisfied
    assert v.trace is None and not v.trace_supported


def test_trace_format_marks_the_loop(atm):
    text = check(atm, parse_ctl(REQ2)).trace.format()
    assert "-- loop starts here --" in text
    assert text.startswith("  -> State: 1 <-\n    State = Start-Start-Start\n    CardOk = dc")


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_agrees_with_path_oracle_and_negation(rnd):
    rng = random.Random(rnd.getrandbits(32))
    u = random_uts(rng)
    ck, oracle = Checker(u), PathOracle(u)
    for _ in range(10):
        f = random_formula(rng, u.names(), u.guards)
        v = check(u, f, ck)
        assert v.satisfied == oracle.holds(f)
        assert check(u, Not(f), ck).satisfied != v.satisfied
        if v.trace is not None:
            assert validate_trace(u, v.trace)


_UNIVERSAL = ("AG", "AF", "AX")


@settings(max_examples=300, deadline=None)
@given(st.randoms(use_true_random=False))
def test_traces_refute_universal_formulas(rnd):
    rng = random.Random(rnd.getrandbits(32))
    u = random_uts(rng)
    names = u.names()
    sub = lambda: random_formula(rng, names, u.guards, depth=2)  # noqa: E731
    for _ in range(10):
        kind = rng.choice(_UNIVERSAL + ("AU", "AW"))
        f = Temporal(kind, sub()) if kind in _UNIVERSAL else Until("A", kind[1], sub(), sub())
        v = check(u, f)
        if v.satisfied or v.trace is None:
            continue
        assert validate_trace(u, v.trace)
        assert refutes(u, v.trace, f)


def test_fixpoints_match_textbook_identities():
    rng = random.Random(7)
    for _ in range(100):
        u = random_uts(rng)
        ck = Checker(u)
        p = random_formula(rng, u.names(), u.guards, depth=1)
        q = random_formula(rng, u.names(), u.guards, depth=1)
        # EG p = p & EX EG p, E[p U q] = q | (p & EX E[p U q])
        assert ck.sat(EG(p)) == ck.sat(p) & ck.sat(EX(EG(p)))
        assert ck.sat(EU(p, q)) == ck.sat(q) | (ck.sat(p) & ck.sat(EX(EU(p, q))))
        assert ck.sat(EF(p)) >= ck.sat(p)
