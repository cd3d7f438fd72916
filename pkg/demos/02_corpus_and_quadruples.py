"""From proofs to training data.

We enumerate every proposition with a short normal proof, sample a few
larger random proofs, and cut each proof into per-node training records:
(goal, what the node must prove, where it sits, which rule it uses).
"""

from collections import Counter

from proofsynth import datasetgen as dg
from proofsynth.calculus import prop_to_sexpr, size, term_to_sexpr

for s in range(2, 7):
    print(f"propositions with a normal proof of size <= {s}: {len(dg.small_proof_gen(s))}")

print("\nthe seven smallest:")
for pair in dg.small_proof_gen(3):
    print(f"  {prop_to_sexpr(pair.proposition):55} {term_to_sexpr(pair.proof)}")

big = dg.random_large_proof_gen(15, 25, seed=1, count=3)
print("\nrandom proofs with 15 to 25 nodes:")
for pair in big:
    print(f"  size {size(pair.proof):2}: {prop_to_sexpr(pair.proposition)}")

pair = dg.small_proof_gen(4)[5]
print(f"\nrecords for {term_to_sexpr(pair.proof)}:")
for q in dg.extract_quadruples([pair]):
    where = " ".join(f"{ctx.rule.name}/{i}" for ctx, i in q.path) or "root"
    print(f"  {where:20} must prove {prop_to_sexpr(q.obligation):35} by {q.rule.name}")

quads = dg.extract_quadruples(dg.small_proof_gen(6))
print(f"\n{len(quads)} records from the size <= 6 corpus; rule frequencies:")
for rule, n in Counter(q.rule.name for q in quads).most_common():
    print(f"  {rule:9} {n / len(quads):.3f}")
