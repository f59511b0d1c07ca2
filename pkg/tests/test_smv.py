import random

import pytest
from hypothesis import given, settings, strategies as st

from uml2ts import ATM_FILES, fixture_path
from uml2ts.checker import check
from uml2ts.ctl import AG, Atom, Not, parse_ctl
from uml2ts.smv import (
    EmitError, EmitOptions, check_smv_syntax, emit_property, emit_smv, find_nusmv, run_nusmv,
)
from uml2ts.ts import DC, MISSING, GuardValuation, Label, UnifiedState, UnifiedTS
from uml2ts.ubd import load_bundle
from uml2ts.unify import unify_bundle

from generators import random_bundle, random_uts

FIRST_ARM = ("State=Start-Start-Start & CardOk=dc & PinOk=dc & BalOk=dc : "
              "InsertCard-Idle-InsertCard;")
REQ1 = ("AG ((CardOk = false | PinOk = false) -> "
        "AG (!(State = WaitAccount-CardValidandPinValid-InitiateTransaction)))")
REQ2 = ("A[!(State = InsuffFunds-Modify-ShowBalance) W ((State = InsuffFunds-Modify-ShowBalance) "
        "& AF(State = CashAdvance-Chkbal-CheckBalance))]")


@pytest.fixture(scope="module")
def atm():
    return unify_bundle(load_bundle([str(fixture_path(n)) for n in ATM_FILES]))


def case_arms(text, var="State"):
    lines = text.splitlines()
    start = lines.index(f"  next({var}):= case") + 1
    end = lines.index("  esac;", start)
    return lines[start:end]


def simulate(model):
    """Successor map {(State, g...): {(State, g...)}} read off the emitted cases."""
    guard_vars = [v for v in model.variables if v not in ("State", "Branch")]
    branch_vals = sorted(model.variables.get("Branch", {None}), key=str)
    out = {}
    for state in model.variables["State"]:
        for vals in _product([sorted(model.variables[g]) for g in guard_vars]):
            cur = dict(zip(guard_vars, vals), State=state)
            nexts = set()
            for b in branch_vals:
                nxt = {}
                for var in ["State"] + guard_vars:
                    for conds, result in model.arms[var]:
                        if all((b is not None and str(b) == val) if is_next else cur[v] == val
                               for v, val, is_next in conds):
                            nxt[var] = cur[result] if result in cur else result
                            break
                nexts.add(tuple(nxt[v] for v in ["State"] + guard_vars))
            out[tuple(cur[v] for v in ["State"] + guard_vars)] = nexts
    return out


def _product(lists):
    if not lists:
        yield ()
        return
    for x in lists[0]:
        for rest in _product(lists[1:]):
            yield (x,) + rest


def expected_successors(uts, mapper=lambda s: s.replace("-", "_")):
    def key(i):
        s = uts.states[i]
        return (mapper(s.name),) + tuple(s.gvs[g].value for g in uts.guards)
    return {key(i): {key(j) for j in (uts.successors(i) or [i])} for i in range(len(uts.states))}


def test_paper_style_first_arm_is_byte_identical(atm):
    text = emit_smv(atm, opts=EmitOptions(paper_style=True))
    assert case_arms(text)[0] == "    " + FIRST_ARM


@pytest.mark.parametrize("paper_style", [False, True])
def test_atm_model_is_well_formed(atm, paper_style):
    props = [parse_ctl(REQ1), parse_ctl(REQ2)]
    text = emit_smv(atm, props, EmitOptions(paper_style=paper_style))
    model, errors = check_smv_syntax(text)
    assert errors == []
    assert len(case_arms(text)) - 1 == len(atm.transitions)
    for g in atm.guards:
        assert len(case_arms(text, g)) - 1 == len(atm.transitions)
        assert f"  init({g}):= dc;" in text
    assert len(model.specs) == 2
    assert text.count("CTLSPEC ") == 2


def test_emitted_cases_reproduce_the_transition_relation(atm):
    model, _ = check_smv_syntax(emit_smv(atm))
    sim = simulate(model)
    exp = expected_successors(atm)
    for k, succ in exp.items():
        assert sim[k] == succ


def test_emission_is_deterministic(atm):
    assert emit_smv(atm) == emit_smv(atm)
    again = unify_bundle(load_bundle([str(fixture_path(n)) for n in ATM_FILES]))
    assert emit_smv(again) == emit_smv(atm)


def test_single_state_without_guards():
    u = UnifiedTS((), [UnifiedState(Label.of("Start"), MISSING, MISSING, GuardValuation.all_dc(()))], [], 0)
    text = emit_smv(u)
    assert "  State: {Start__};" in text
    assert case_arms(text) == ["    TRUE : State;"]
    assert check_smv_syntax(text)[1] == []


def test_requirement_1_property_line():
    assert emit_property(parse_ctl(REQ1)) == (
        "CTLSPEC AG ((CardOk = false | PinOk = false) -> "
        "AG (!(State = WaitAccount_CardValidandPinValid_InitiateTransaction)))")


def test_simple_property_line():
    assert emit_property(AG(Not(Atom("State", "p")))) == "CTLSPEC AG (!(State = p))"


def test_requirement_2_property_line():
    line = emit_property(parse_ctl(REQ2))
    assert line.startswith("CTLSPEC A [ ") and " W " in line


def test_guard_prefix_option():
    g = ("g",)
    u = UnifiedTS(g, [UnifiedState(Label.of("Start"), MISSING, MISSING, GuardValuation(g, (DC,)))], [], 0)
    text = emit_smv(u, [parse_ctl("AG (g = dc)")], EmitOptions(guard_prefix="vg"))
    assert "  vgg: {dc,false,true};" in text
    assert "CTLSPEC AG (vgg = dc)" in text
    assert check_smv_syntax(text)[1] == []


def test_underscore_collision_is_reported():
    dc = GuardValuation.all_dc(())
    states = [UnifiedState(Label.of("Start"), MISSING, MISSING, dc),
              UnifiedState(Label.of("a_b"), Label.of("c"), MISSING, dc),
              UnifiedState(Label.of("a"), Label.of("b_c"), MISSING, dc)]
    u = UnifiedTS((), states, [(0, 1), (0, 2)], 0)
    with pytest.raises(EmitError, match="paper-style"):
        emit_smv(u)
    assert check_smv_syntax(emit_smv(u, opts=EmitOptions(paper_style=True)))[1] == []


@pytest.mark.parametrize("broken, why", [
    ("MODULE main\nVAR\n  State: {a,a};\nASSIGN\n  init(State):= a;\n", "duplicate"),
    ("MODULE main\nVAR\n  State: {a};\nASSIGN\n  init(State):= b;\n", "outside the domain"),
    ("MODULE main\nVAR\n  State: {a};\nASSIGN\n  init(State):= a;\n  next(State):= case\n"
     "    State=a : a;\n  esac;\n", "final TRUE arm"),
    ("MODULE main\nVAR\n  State: {a};\nASSIGN\n  init(State):= a;\nCTLSPEC AG (\n", "CTLSPEC"),
    ("MODULE main\nVAR\n  State: {a};\n  G: {dc,false,true};\nASSIGN\n  init(State):= a;\n", "no init"),
    ("VAR\n", "MODULE main"),
])
def test_grammar_check_rejects(broken, why):
    errors = check_smv_syntax(broken)[1]
    assert any(why in e for e in errors), errors


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_random_models_conform(rnd):
    rng = random.Random(rnd.getrandbits(32))
    u = random_uts(rng)
    text = emit_smv(u)
    model, errors = check_smv_syntax(text)
    assert errors == []
    assert len(case_arms(text)) - 1 == len(u.transitions)
    sim, exp = simulate(model), expected_successors(u)
    assert {k: sim[k] for k in exp} == exp


@settings(max_examples=50, deadline=None)
@given(st.randoms(use_true_random=False))
def test_random_bundles_emit(rnd):
    u = unify_bundle(random_bundle(random.Random(rnd.getrandbits(32))))
    text = emit_smv(u)
    assert check_smv_syntax(text)[1] == []
    assert len(case_arms(text)) - 1 == len(u.transitions)


NUSMV = find_nusmv()


@pytest.mark.skipif(NUSMV is None, reason="no NuSMV binary (set UML2TS_NUSMV)")
def test_nusmv_agrees_on_the_fixture(atm):
    props = [parse_ctl(REQ1), parse_ctl(REQ2)]
    assert run_nusmv(emit_smv(atm, props), NUSMV) == [check(atm, f).satisfied for f in props]
