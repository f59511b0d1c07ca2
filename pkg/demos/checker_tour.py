"""
Checking a small bundle
=======================

Two diagrams written inline, one guard, a handful of CTL queries.
"""
from uml2ts import DiagramBundle, check, parse_ctl, parse_diagram, unify_bundle

sd = parse_diagram("""\
sequence Login
lifeline User
lifeline Server
msg submit: User -> Server
alt [Valid]
  msg welcome: Server -> User
else [!Valid]
  msg reject: Server -> User
end
""")

smd = parse_diagram("""\
statemachine Session
state Idle
state Checking
state Open
state Closed
initial Idle
trans Idle -> Checking
trans Checking -> Open [Valid]
trans Checking -> Closed [!Valid]
""")

uts = unify_bundle(DiagramBundle(sd, smd))
print(uts.dump())

# names are msg-state-action; no activity diagram, so the last slot is empty.
# each message pairs with the state the machine is in when it is sent
queries = [
    "AG (State = welcome-Checking- -> Valid = true)",
    "EF (State = End-Closed-)",
    "AF (State = End-Open-)",
    "AG (Valid = false -> AG (!(State = End-Open-)))",
]
for text in queries:
    v = check(uts, parse_ctl(text))
    print("holds " if v.satisfied else "fails ", text)
    if v.trace is not None:
        print(v.trace.format())
