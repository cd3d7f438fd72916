"""Probability of a fully annotated proof under a rule-likelihood estimator."""

from __future__ import annotations

from .syntax import Hole, Prop, Rule, Var, child_scope, context_of, rule_of
from .typing import TypedTerm


def phi(t: TypedTerm, est, root: Prop) -> float:
    """Product of per-node likelihoods of a complete annotated proof of ``root``.

    A constructor node contributes the estimator's probability of its rule
    given (root, node type, path).  A variable node contributes the Var-rule
    probability times the probability of choosing that variable, which is
    uniform over the variables visible at the node.
    """

    def go(node: TypedTerm, path, scope: tuple) -> float:
        term = node.term
        if isinstance(term, Hole):
            raise ValueError("phi is defined on complete proofs only")
        dist = est.rule_distribution(root, path, node.prop)
        if isinstance(term, Var):
            visible = set(scope)
            if term.name not in visible:
                return 0.0
            return float(dist[Rule.Var]) / len(visible)
        p = float(dist[rule_of(term)])
        ctx = context_of(term)
        for i, child in enumerate(node.children):
            if p == 0.0:
                break
            p *= go(child, path + ((ctx, i),), scope + child_scope(term, i))
        return p

    return go(t, (), ())
