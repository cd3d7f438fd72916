"""Random terms and propositions for property tests (seeded, reproducible)."""

from __future__ import annotations

import random

from proofsynth.calculus import (CONTEXTS, App, CasePair, CaseSum, Hole, Imp,
                                 Lam, Left, Pair, Prod, PVar, Right, Sum, Var,
                                 children, fill, hole_ids, holes, is_typable,
                                 prop_vars, size)
from proofsynth.calculus.paths import scope_at
from proofsynth.calculus.reduction import all_names
from proofsynth.calculus.syntax import rebuild


def random_typed_term(rng: random.Random, max_size: int, partial: bool = False):
    """A closed typable term of at most ``max_size`` nodes, built by filling
    holes with random contexts and variables.  Redexes are allowed.  With
    ``partial`` the construction may stop early, leaving holes."""
    if max_size < 2:
        raise ValueError("no closed term has fewer than two nodes")
    m = Hole(0)
    while True:
        hs = holes(m)
        if not hs:
            return m
        if partial and rng.random() < 0.08:
            return m
        h, path = hs[rng.randrange(len(hs))] if partial else hs[0]
        names = scope_at(m, path)
        room = max_size - size(m) - len(hs)
        cands = list(names) if room <= 0 or (names and rng.random() < 0.35) else []
        if not cands:
            cands = list(CONTEXTS) + list(names)
        rng.shuffle(cands)
        for c in cands:
            mc = fill(m, h, c)
            if size(mc) + len(hole_ids(mc)) <= max_size and is_typable(mc):
                m = mc
                break
        else:
            return random_typed_term(rng, max_size, partial)


def subterm_paths(m, path=()):
    """Child-index paths to every subterm, preorder."""
    yield path
    for i, c in enumerate(children(m)):
        yield from subterm_paths(c, path + (i,))


def get_at(m, path):
    for i in path:
        m = children(m)[i]
    return m


def replace_at(m, path, new):
    if not path:
        return new
    kids = list(children(m))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return rebuild(m, tuple(kids))


def _fresh(m, base="w"):
    taken = all_names(m)
    k = 0
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def redex_wrappers(m, n, rng: random.Random):
    """Ways to wrap subterm ``n`` of ``m`` into a beta- or eta-redex."""
    z = _fresh(m)
    z2 = _fresh(Pair(m, Var(z)))
    arg = Lam(z2, Var(z2))
    return [
        App(Lam(z, n), arg),
        CasePair(Pair(arg, arg), z, z2, n),
        CaseSum(Left(arg), z, n, z, n),
        CaseSum(Right(arg), z, n, z, n),
        Lam(z, App(n, Var(z))),
        Pair(CasePair(n, z, z2, Var(z)), CasePair(n, z, z2, Var(z2))),
        CaseSum(n, z, Left(Var(z)), z2, Right(Var(z2))),
        CaseSum(n, z, arg, z2, arg),
    ]


def inject_redexes(rng: random.Random, m, k: int, typed: bool = True):
    """Wrap up to ``k`` random subterms of ``m`` in redex patterns."""
    for _ in range(k):
        paths = list(subterm_paths(m))
        path = paths[rng.randrange(len(paths))]
        options = redex_wrappers(m, get_at(m, path), rng)
        rng.shuffle(options)
        for w in options:
            new = replace_at(m, path, w)
            if not typed or is_typable(new):
                m = new
                break
    return m


def random_prop(rng: random.Random, depth: int = 3, names="abc"):
    if depth == 0 or rng.random() < 0.3:
        return PVar(rng.choice(names))
    cls = rng.choice((Imp, Prod, Sum))
    return cls(random_prop(rng, depth - 1, names), random_prop(rng, depth - 1, names))


def ground_instance(rng: random.Random, p, names="pqr"):
    """Substitute a random small proposition for each variable of ``p``."""
    sub = {v: random_prop(rng, 2, names) for v in prop_vars(p)}

    def go(q):
        if isinstance(q, PVar):
            return sub[q.name]
        return type(q)(go(q.lhs), go(q.rhs))

    return go(p)
