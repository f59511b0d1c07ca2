import random

import pytest
from hypothesis import given, settings, strategies as st

from uml2ts.model import DiagramBundle, Message, Par, collect_guards
from uml2ts.ts import DC, GUARD_VALUES, MISSING, GuardValuation, Label, UnifiedState, UnifiedTS
from uml2ts.ubd import parse_diagram
from uml2ts.unify import BundleInvalid, build_components, reachable_stats, unify, unify_bundle

from generators import grid_oracle, random_bundle

SD2 = "sequence S\nlifeline A\nmsg m1: A -> A\nmsg m2: A -> A\n"


def unify_text(sd, smd=None, ad=None):
    return unify_bundle(DiagramBundle(parse_diagram(sd), smd and parse_diagram(smd), ad and parse_diagram(ad)))


def edges(u):
    return sorted((u.states[s].name, u.states[t].name) for s, t in u.transitions)


def test_situation_a_identical_chains_pair_up():
    u = unify_text(SD2, "statemachine M\nstate s1\nstate s2\ninitial s1\ntrans s1 -> s2\n")
    assert edges(u) == [("Start-Start-", "m1-s1-"), ("m1-s1-", "m2-s2-"), ("m2-s2-", "End-s2-")]


def test_situation_a_with_matching_guard_split():
    u = unify_text("sequence S\nlifeline A\nalt [CardOk]\nmsg ok: A -> A\nelse [!CardOk]\nmsg ko: A -> A\nend\n",
                   "statemachine M\nstate V\nstate C\nstate Ej\ninitial V\n"
                   "trans V -> C [CardOk]\ntrans V -> Ej [!CardOk]\n")
    lines = u.dump().splitlines()
    assert "ok-V- | CardOk=true -> End-C- | CardOk=true" in lines
    assert "ko-V- | CardOk=false -> End-Ej- | CardOk=false" in lines
    assert not any("End-C- | CardOk=false" in l for l in lines)


def test_situation_b_longer_follower_runs_after_sd_ends():
    u = unify_text("sequence S\nlifeline A\nmsg m1: A -> A\n",
                   "statemachine M\nstate s1\nstate s2\nstate s3\ninitial s1\ntrans s1 -> s2\ntrans s2 -> s3\n")
    assert edges(u) == [("End-s2-", "End-s3-"), ("Start-Start-", "m1-s1-"), ("m1-s1-", "End-s2-")]


def test_situation_c_conflicting_follower_shows_placeholder():
    u = unify_text("sequence S\nlifeline A\nopt [g]\nmsg m: A -> A\nend\n",
                   "statemachine M\nstate s1\nstate s2\ninitial s1\ntrans s1 -> s2 [!g]\n")
    assert "m-s1- | g=true -> End-- | g=true" in u.dump().splitlines()


def test_sd_with_ad_leaves_middle_slot_empty():
    u = unify_text(SD2, ad="activity D\ninitial\naction x\naction y\nfinal F\n"
                           "edge initial -> x\nedge x -> y\nedge y -> F\n")
    assert u.initial_state.name == "Start--Start"
    assert all(s.st == MISSING for s in u.states)
    assert [s.name for s in u.states] == ["Start--Start", "m1--x", "m2--y", "End--End"]


def test_sd_only_bundle_is_invalid():
    with pytest.raises(BundleInvalid, match="second diagram"):
        unify_text(SD2)


def test_stats_chain_without_guards():
    u = unify_text(SD2, "statemachine M\nstate s1\nstate s2\ninitial s1\ntrans s1 -> s2\n")
    assert reachable_stats(u) == (4, 4) == grid_oracle(u)


def test_stats_two_names_one_guard_dc_only():
    guards = ("g",)
    dc = GuardValuation(guards, (DC,))
    states = [UnifiedState(Label.of("Start"), Label.of("Start"), MISSING, dc),
              UnifiedState(Label.of("a"), Label.of("b"), MISSING, dc)]
    u = UnifiedTS(guards, states, [(0, 1)], 0)
    assert reachable_stats(u) == (6, 2) == grid_oracle(u)


def test_unify_requires_a_follower():
    sd_ts, _, _ = build_components(DiagramBundle(parse_diagram(SD2)), [])
    with pytest.raises(ValueError):
        unify(sd_ts)


def _distinct_messages(sd):
    names = []

    def walk(body):
        for el in body:
            if isinstance(el, Message):
                names.append(el.name)
            elif isinstance(el, Par):
                for op in el.operands:
                    walk(op)
            else:
                for br in getattr(el, "branches", ()):
                    walk(br.body)
                walk(getattr(el, "body", ()))

    walk(sd.body)
    return len(names) == len(set(names))


def _no_return_to_dc(u):
    for s, t in u.transitions:
        a, b = u.states[s].gvs, u.states[t].gvs
        for g in u.guards:
            if a[g] is not DC:
                assert b[g] is not DC


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False))
def test_unifier_invariants(rnd):
    b = random_bundle(random.Random(rnd.getrandbits(32)))
    u = unify_bundle(b)
    init = u.initial_state
    assert init.msg.render() == "Start"
    assert init.st.render() == ("Start" if b.smd else "-")
    assert init.act.render() == ("Start" if b.ad else "-")
    assert all(v is DC for v in init.gvs.values)
    _no_return_to_dc(u)
    keys = [s.key for s in u.states]
    assert len(set(keys)) == len(keys)
    # product bound over component state counts
    sd_ts, smd_ts, ad_ts = build_components(b)
    bound = len(sd_ts.states) * (len(smd_ts.states) + 1 if smd_ts else 1) \
        * (len(ad_ts.states) + 1 if ad_ts else 1) * 3 ** len(u.guards)
    assert len(u.states) <= bound
    if not collect_guards(b) and _distinct_messages(b.sd):
        assert all(len(set(u.successors(i))) <= 1 for i in range(len(u.states)))
    assert reachable_stats(u) == grid_oracle(u)
    assert unify_bundle(b).dump() == u.dump()


@given(st.integers(min_value=1, max_value=8), st.integers(min_value=1, max_value=8))
def test_guardless_chains_give_one_path(k, j):
    sd = "sequence S\nlifeline A\n" + "".join(f"msg m{i}: A -> A\n" for i in range(k))
    ad = ("activity D\ninitial\n" + "".join(f"action x{i}\n" for i in range(j)) + "final F\n"
          + "".join(f"edge {a} -> {b}\n" for a, b in zip(["initial"] + [f"x{i}" for i in range(j)],
                                                          [f"x{i}" for i in range(j)] + ["F"])))
    u = unify_text(sd, ad=ad)
    assert len(u.transitions) == len(u.states) - 1
    assert all(len(u.successors(i)) <= 1 for i in range(len(u.states)))
    assert reachable_stats(u) == (len(u.states), len(u.states))


def test_grid_oracle_agrees_with_known_values():
    # the oracle itself, on a hand-built TS with an unreachable state
    guards = ("g",)
    vals = [GuardValuation(guards, (v,)) for v in GUARD_VALUES]
    states = [UnifiedState(Label.of("Start"), MISSING, MISSING, vals[0]),
              UnifiedState(Label.of("a"), MISSING, MISSING, vals[2]),
              UnifiedState(Label.of("a"), MISSING, MISSING, vals[1])]
    assert grid_oracle(UnifiedTS(guards, states, [(0, 1)], 0)) == (6, 2)
