"""Train a small rule classifier and let it steer the proof search.

A toy run: a narrow network, a few epochs on the size <= 6 corpus.  It then
proves a handful of held-out propositions and compares the number of search
expansions against the uniform guess.  Takes a few seconds.
"""

import random

from proofsynth import datasetgen as dg
from proofsynth.calculus import prop_to_sexpr, term_to_sexpr
from proofsynth.estimator import (ModelConfig, NeuralEstimator,
                                  UniformEstimator, init, train)
from proofsynth.search import SearchBudget, proof_synthesize

quads = dg.extract_quadruples(dg.small_proof_gen(6))
sp = dg.split(quads, 0.9, seed=0)
store = init(ModelConfig((4, 16, 32, 32), (4, 8), (32, 32)), seed=0)
train(store, sp.train, sp.validation, epochs=4, batch_size=100, seed=0, log=print)

goals = sorted({q.goal for q in sp.validation}, key=prop_to_sexpr)
budget = SearchBudget(max_expansions=20_000, timeout=10)
print(f"\n{'proposition':82} neural uniform")
for p in random.Random(0).sample(goals, 8):
    neural = proof_synthesize(p, NeuralEstimator(store), budget)
    uniform = proof_synthesize(p, UniformEstimator(), budget)
    print(f"{prop_to_sexpr(p):82} {neural.expansions:6} {uniform.expansions:7}")
    if neural.found:
        print(f"  proof: {term_to_sexpr(neural.proof)}")
