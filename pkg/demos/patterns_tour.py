"""
Specification patterns
======================

Pick a pattern and a scope, hand over the propositions, get CTL back.
"""
from uml2ts import PatternSpec, instantiate_pattern, render_ctl
from uml2ts.patterns import LTL, PATTERNS, SCOPES, UnsupportedCell

print("patterns:", ", ".join(PATTERNS))
print("scopes:  ", ", ".join(SCOPES))

# propositions are CTL text (or Formula objects)
wait = "State = WaitAccount-CardValidandPinValid-InitiateTransaction"
bad_check = "(CardOk = false | PinOk = false)"

f = instantiate_pattern(PatternSpec("absence", "after-q", p=wait, q=bad_check))
print(render_ctl(f))

# scope names are forgiving
g = instantiate_pattern(PatternSpec("existence", "after Q",
                                    p="State = CashAdvance-Chkbal-CheckBalance",
                                    q="State = InsuffFunds-Modify-ShowBalance"))
print(render_ctl(g))

# the whole catalog on abstract letters, with the LTL reading next to it
letters = dict(p="P = true", q="Q = true", r="R = true", s="S = true")
for pattern in PATTERNS:
    for scope in SCOPES:
        ctl = render_ctl(instantiate_pattern(PatternSpec(pattern, scope, **letters)))
        print(f"{pattern:>12} / {scope:<16} {ctl}")
        print(f"{'':>31}LTL {LTL[(pattern, scope)]}")

try:
    instantiate_pattern(PatternSpec("bounded-existence", "global", p=wait))
except UnsupportedCell as e:
    print(str(e).splitlines()[0])
