"""
ATM walkthrough
===============

From three diagrams to a checked model: unify, count, check, emit.
"""
from uml2ts import ATM_FILES, fixture_path
from uml2ts import check, emit_smv, load_bundle, parse_ctl, reachable_stats, unify_bundle
from uml2ts.model import collect_guards
from uml2ts.smv import EmitOptions

# the bundled fixture: one sequence, one state machine, one activity diagram
paths = [str(fixture_path(n)) for n in ATM_FILES]
bundle = load_bundle(paths)
print("guards:", ", ".join(collect_guards(bundle)))

uts = unify_bundle(bundle)
print(uts.initial_state.name)
print(len(uts.states), "unified states,", len(uts.transitions), "transitions")

# declared = names x 3^guards, reachable = BFS from the initial state
declared, reachable = reachable_stats(uts)
print(f"declared={declared} reachable={reachable}")

# first few lines of the dump
print("\n".join(uts.dump().splitlines()[:6]))

# Req1: a failed card or PIN check never leads to the transaction
req1 = parse_ctl("AG ((CardOk = false | PinOk = false) -> "
                 "AG (!(State = WaitAccount-CardValidandPinValid-InitiateTransaction)))")
print(check(uts, req1).satisfied)

# Req2: after insufficient funds, the cash advance balance check eventually comes
req2 = parse_ctl("A [ !(State = InsuffFunds-Modify-ShowBalance) W "
                 "((State = InsuffFunds-Modify-ShowBalance) & AF (State = CashAdvance-Chkbal-CheckBalance)) ]")
verdict = check(uts, req2)
print(verdict.satisfied)
print(verdict.trace.format())

# the NuSMV model; identifiers use '_' unless paper_style keeps the hyphens
smv = emit_smv(uts, [req1, req2])
print(smv.splitlines()[0], "...", len(smv.splitlines()), "lines")
hyphens = emit_smv(uts, opts=EmitOptions(paper_style=True))
print(next(l for l in hyphens.splitlines() if l.startswith("    State=")).strip())
