"""Rule-likelihood estimators used by proof search and by ``phi``.

An estimator answers ``rule_distribution(goal, path, obligation)`` with eight
probabilities indexed by ``Rule``.  Variable choice is uniform over the
variables in scope (see ``variable_probability``).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..calculus.syntax import RULES, Path, Prop
from .encoding import Forest
from .model import (N_RULES, ParameterStore, PathBatch, aggregate, ast_conv,
                    extract, relu, softmax)
from .training import QueryEncoder


def variable_probability(n_in_scope: int) -> float:
    """Probability of each variable once the Var rule is chosen."""
    return 1.0 / n_in_scope if n_in_scope else 0.0


class UniformEstimator:
    """Every rule equally likely, whatever the query."""

    def rule_distribution(self, goal: Prop, path: Path, obligation: Optional[Prop]) -> np.ndarray:
        return np.full(N_RULES, 1.0 / N_RULES)


class NeuralEstimator:
    """The trained classifier, with per-goal, per-path and per-obligation caches.

    Within one search the goal is fixed, so its aggregated vector and the
    vectors extracted along each path are computed once.
    """

    def __init__(self, store: ParameterStore):
        self.store = store
        self.encoder = QueryEncoder(store.vocab)
        self._goal_vec: dict = {}
        self._path_vec: dict = {}
        self._obl_vec: dict = {}

    def clear_cache(self) -> None:
        self._goal_vec.clear()
        self._path_vec.clear()
        self._obl_vec.clear()

    def _goal_vector(self, key, tree) -> np.ndarray:
        v = self._goal_vec.get(key)
        if v is None:
            p = self.store.params
            f = Forest([tree])
            x = f.feat
            for layer in ("conv1", "conv2", "conv3"):
                x, _ = ast_conv(p, layer, f, x)
            v = self._goal_vec[key] = aggregate(p, "agg", f, x)[0]  # shape (1, d)
        return v

    def _path_vector(self, key, tree, path) -> np.ndarray:
        k = (key, path)
        v = self._path_vec.get(k)
        if v is None:
            v_goal = self._goal_vector(key, tree)
            v = self._path_vec[k] = extract(self.store.params, PathBatch([path]), v_goal)[0][0]
        return v

    def _obligation_vector(self, key, tree) -> np.ndarray:
        v = self._obl_vec.get(key)
        if v is None:
            p = self.store.params
            f = Forest([tree])
            x, _ = ast_conv(p, "oconv", f, f.feat)
            v = self._obl_vec[key] = aggregate(p, "oagg", f, x)[0][0]
        return v

    def logits(self, goal: Prop, path: Path, obligation: Optional[Prop]) -> np.ndarray:
        cfg = self.store.config
        q = None if cfg.obligation_free else obligation
        if q is None and not cfg.obligation_free:
            raise ValueError("this model needs the obligation")
        e = self.encoder.encode(goal, path, q)
        z = self._path_vector(e.goal_key, e.goal_tree, e.path)
        if not cfg.obligation_free:
            z = np.concatenate([z, self._obligation_vector(e.obligation_key, e.obligation_tree)])
        p = self.store.params
        h = relu(p["fc1.weight"] @ z + p["fc1.bias"])
        h = relu(p["fc2.weight"] @ h + p["fc2.bias"])
        return p["fc3.weight"] @ h + p["fc3.bias"]

    def rule_distribution(self, goal: Prop, path: Path, obligation: Optional[Prop]) -> np.ndarray:
        return softmax(self.logits(goal, path, obligation))


def classify(store: ParameterStore, goal: Prop, path: Path,
             obligation: Optional[Prop] = None) -> dict:
    """Rule name -> probability for one query."""
    dist = NeuralEstimator(store).rule_distribution(goal, path, obligation)
    return {r.name: float(dist[r]) for r in RULES}
