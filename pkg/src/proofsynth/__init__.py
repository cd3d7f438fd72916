"""Proof synthesis for intuitionistic propositional logic.

Proofs are lambda terms (Curry-Howard); a tree-convolution network predicts
which inference rule fills each hole of a partial proof, and a best-first
search uses those predictions to synthesise complete proofs.
"""

from . import calculus, datasetgen, estimator, search
from .search import SearchBudget, SearchResult, exhaustive_prove, proof_synthesize, verify

__version__ = "0.1.0"
