"""A short tour of the proof calculus.

Proofs are lambda terms and propositions are their types.  We parse a few
terms, ask for their most general proposition, reduce a redex away, and build
a proof step by step by filling holes.
"""

from proofsynth.calculus import (Context, Hole, Rule, fill, hole_obligations,
                                 holes, is_normal, normalize, parse_prop,
                                 parse_term, principal_prop, prop_to_sexpr,
                                 term_to_sexpr, typecheck)
from proofsynth.calculus.paths import scope_at

# Every closed term has a most general proposition; atoms are named a, b, ...
for src in ["(lam x (var x))",
            "(lam x (lam y (pair (var y) (var x))))",
            "(lam f (lam x (app (var f) (var x))))"]:
    print(f"{src:45} proves {prop_to_sexpr(principal_prop(parse_term(src)))}")

# Any instance of that proposition is proved by the same term.
swap = parse_term("(lam x (lam y (pair (var y) (var x))))")
instance = parse_prop("(imp (var p) (imp (imp (var q) (var q))"
                      " (prod (imp (var q) (var q)) (var p))))")
print("\nswap also proves", prop_to_sexpr(instance), "->", typecheck([], swap, instance))

# Redexes are detours in a proof; normalizing removes them.
detour = parse_term("(lam x (app (lam y (var y)) (var x)))")
print(f"\n{term_to_sexpr(detour)} is normal: {is_normal(detour)}")
print(f"after normalizing: {term_to_sexpr(normalize(detour))}")

# Building a proof of a -> b -> a by filling holes.  After each step we show
# what every remaining hole still has to prove.
goal = parse_prop("(imp (var a) (imp (var b) (var a)))")
m = Hole(0)
steps = [Context(Rule.Abs), Context(Rule.Abs), None]
print("\ngoal:", prop_to_sexpr(goal))
for step in steps:
    h, path = holes(m)[0]
    if step is None:
        # Close the last hole with the outer binder, the first variable in scope.
        step = scope_at(m, path)[0]
    m = fill(m, h, step)
    obligations = hole_obligations(m, goal) or {}
    todo = ", ".join(f"hole {k}: {prop_to_sexpr(q)}" for k, q in obligations.items())
    print(f"  {term_to_sexpr(m):35} {todo or 'complete'}")
print("proof checks:", typecheck([], m, goal))
