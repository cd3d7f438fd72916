"""Proof search: best-first synthesis guided by a rule estimator, an
exhaustive smallest-proof prover, and the final proof checker."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .calculus import (CONTEXTS, Context, Hole, HoleState, Prop, Rule, Term,
                       alpha_key, has_forced_redex, hole_obligations, holes,
                       is_complete, is_normal, size, term_to_sexpr, typecheck)
from .calculus.paths import (fill, one_depth_node, replace_at, scope_along,
                             scope_at)


class SearchInvariantError(AssertionError):
    """The search produced something that is not a proof of the goal."""


@dataclass(frozen=True)
class SearchBudget:
    max_expansions: int = 1_000_000
    timeout: float = 180.0

    def __post_init__(self):
        if self.max_expansions <= 0 or self.timeout <= 0:
            raise ValueError("search budgets must be positive")


@dataclass
class SearchResult:
    proof: Optional[Term]
    expansions: int
    elapsed: float
    priority: float = 0.0
    # Likelihood factors along the fill sequence of the returned proof.
    factors: list[float] = field(default_factory=list)
    reason: str = ""

    @property
    def found(self) -> bool:
        return self.proof is not None


def verify(p: Prop, m: Term) -> bool:
    """True iff ``m`` has no holes and proves ``p`` in the empty context."""
    return is_complete(m) and typecheck([], m, p)


def _fill_candidates(m: Term, path) -> list:
    return list(CONTEXTS) + scope_at(m, path)


def _rule_of_candidate(c) -> Rule:
    return c.rule if isinstance(c, Context) else Rule.Var


def _chain(link) -> list[float]:
    out = []
    while link is not None:
        factor, link = link
        out.append(factor)
    return out[::-1]


def proof_synthesize(p: Prop, est, budget: SearchBudget = SearchBudget(),
                     normal_only: bool = False, memo: bool = False,
                     trace: Optional[Callable[[str], None]] = None) -> SearchResult:
    """Best-first search for a proof of the ground proposition ``p``.

    The queue holds partial proofs ordered by priority (ties: first pushed,
    first popped).  For the popped term the hole whose most likely rule is
    most likely is filled with every one-depth context and every variable in
    scope that keeps the term a possible proof of ``p``.  A child's priority
    is the parent's times the estimator's probability of the rule used, and
    for a variable also times one over the number of variables in scope.
    The first complete term produced is returned.
    """
    start = time.monotonic()
    counter = itertools.count()
    root: Term = Hole(0)
    # Queue entries: (-priority, insertion number, term, typing state,
    # next free hole id, chain of likelihood factors).
    queue = [(-1.0, next(counter), root, HoleState.of(root, p), 1, None)]
    seen = set()
    expansions = 0
    while queue:
        if expansions >= budget.max_expansions:
            return SearchResult(None, expansions, time.monotonic() - start, reason="expansions")
        if time.monotonic() - start > budget.timeout:
            return SearchResult(None, expansions, time.monotonic() - start, reason="timeout")
        neg, _, m, state, next_id, link = heapq.heappop(queue)
        priority = -neg
        expansions += 1

        hs = holes(m)
        obligations = state.obligations([h for h, _ in hs])
        best = None
        for h, path in hs:
            dist = est.rule_distribution(p, path, obligations[h])
            score = float(max(dist))
            if best is None or score > best[0]:
                best = (score, h, path, dist)
        _, h, path, dist = best

        scope = scope_along(m, path)
        cands = _fill_candidates(m, path)
        n_vars = len(cands) - len(CONTEXTS)
        pushed = []
        for c in cands:
            node = one_depth_node(c, scope, next_id)
            child_state = state.refine(h, node)
            if child_state is None:
                continue
            mc = replace_at(m, path, node)
            if normal_only and has_forced_redex(mc):
                continue
            factor = float(dist[_rule_of_candidate(c)])
            if not isinstance(c, Context):
                factor /= n_vars
            child = priority * factor
            if not child_state.hole_types:
                if not verify(p, mc):
                    raise SearchInvariantError(f"accepted non-proof {term_to_sexpr(mc)}")
                if trace is not None:
                    trace(_trace_line(m, priority, path, pushed + [(c, child)]))
                return SearchResult(mc, expansions, time.monotonic() - start, child,
                                    _chain((factor, link)))
            if memo:
                key = alpha_key(mc)
                if key in seen:
                    continue
                seen.add(key)
            pushed.append((c, child))
            arity = c.arity if isinstance(c, Context) else 0
            heapq.heappush(queue, (-child, next(counter), mc, child_state,
                                   next_id + arity, (factor, link)))
        if trace is not None:
            trace(_trace_line(m, priority, path, pushed))
    return SearchResult(None, expansions, time.monotonic() - start, reason="exhausted")


def _trace_line(m: Term, priority: float, path, pushed) -> str:
    steps = " ".join(f"{ctx.tag}/{i}" for ctx, i in path) or "root"
    cands = ", ".join(f"{c.tag if isinstance(c, Context) else c}={pr!r}" for c, pr in pushed)
    return f"{term_to_sexpr(m)} @ {priority!r} | hole {steps} | {cands}"


def exhaustive_prove(p: Prop, max_size: int) -> Optional[Term]:
    """Smallest closed beta-eta normal proof of ``p`` with size <= ``max_size``.

    Breadth-first enumeration of partial proofs, filling the leftmost hole
    with one-depth contexts and then variables in scope; each fill adds one
    node, so the first complete proof met is of minimal size, and among
    those the first in this enumeration order.
    """
    queue = deque([Hole(0)])
    while queue:
        m = queue.popleft()
        h, path = holes(m)[0]
        for c in _fill_candidates(m, path):
            mc = fill(m, h, c)
            hs = holes(mc)
            if size(mc) + len(hs) > max_size:
                continue
            if hole_obligations(mc, p) is None or has_forced_redex(mc):
                continue
            if not hs:
                if is_normal(mc):
                    return mc
                continue
            queue.append(mc)
    return None


def success_summary(results: list[SearchResult]) -> dict:
    ok = [r for r in results if r.found]
    return {"successes": len(ok), "total": len(results),
            "mean_seconds": (sum(r.elapsed for r in ok) / len(ok)) if ok else math.nan}
