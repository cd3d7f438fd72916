"""Independent reference implementations used as test oracles.

Nothing here calls the library's typing, reduction or enumeration code.
Terms are compared through a local de Bruijn encoding, types are inferred
with a separate unifier, and redexes are recognised by direct pattern
matching (the sum eta rule by trying every subset of candidate
occurrences).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from proofsynth.calculus import (App, CasePair, CaseSum, Hole, Imp, Lam, Left,
                                 Pair, Prod, PVar, Right, Sum, Var)


# ---------------------------------------------------------------------------
# de Bruijn form


def db(t, env=()):
    """Nameless form: bound variables become ("b", distance)."""
    if isinstance(t, Hole):
        return ("hole",)
    if isinstance(t, Var):
        for k, name in enumerate(reversed(env)):
            if name == t.name:
                return ("b", k)
        return ("f", t.name)
    if isinstance(t, Lam):
        return ("lam", db(t.body, env + (t.var,)))
    if isinstance(t, App):
        return ("app", db(t.fun, env), db(t.arg, env))
    if isinstance(t, Pair):
        return ("pair", db(t.fst, env), db(t.snd, env))
    if isinstance(t, Left):
        return ("left", db(t.body, env))
    if isinstance(t, Right):
        return ("right", db(t.body, env))
    if isinstance(t, CasePair):
        return ("cpair", db(t.scrut, env), db(t.body, env + (t.fst_var, t.snd_var)))
    if isinstance(t, CaseSum):
        return ("csum", db(t.scrut, env), db(t.left, env + (t.left_var,)),
                db(t.right, env + (t.right_var,)))
    raise TypeError(t)


_BINDS = {"lam": (1,), "app": (0, 0), "pair": (0, 0), "left": (0,), "right": (0,),
          "cpair": (0, 2), "csum": (0, 1, 1)}


def _kids(d):
    return d[1:] if d[0] in _BINDS else ()


def occurs(d, k: int) -> bool:
    """Whether index ``k`` (relative to ``d``'s top) occurs free in ``d``."""
    if d[0] == "b":
        return d[1] == k
    if d[0] in _BINDS:
        return any(occurs(c, k + n) for c, n in zip(_kids(d), _BINDS[d[0]]))
    return False


def db_alpha_eq(a, b) -> bool:
    return db(a) == db(b)


# ---------------------------------------------------------------------------
# Redexes


def _left_x_sites(d, depth=0, path=()):
    """Paths to occurrences of ("left", ("b", depth)) where ``depth`` tracks x."""
    if d == ("left", ("b", depth)):
        yield path
        return
    if d[0] in _BINDS:
        for i, (c, n) in enumerate(zip(_kids(d), _BINDS[d[0]])):
            yield from _left_x_sites(c, depth + n, path + (i,))


def _replace(d, path, new):
    if not path:
        return new
    i = path[0]
    kids = list(_kids(d))
    kids[i] = _replace(kids[i], path[1:], new)
    return (d[0],) + tuple(kids)


def _marker_to_right(d, depth=0):
    if d == ("z",):
        return ("right", ("b", depth))
    if d[0] in _BINDS:
        return (d[0],) + tuple(_marker_to_right(c, depth + n)
                               for c, n in zip(_kids(d), _BINDS[d[0]]))
    return d


def _sum_eta(left, right) -> bool:
    sites = list(_left_x_sites(left))
    for r in range(len(sites) + 1):
        for chosen in itertools.combinations(sites, r):
            n = left
            for path in chosen:
                n = _replace(n, path, ("z",))
            if occurs(n, 0):
                continue
            if _marker_to_right(n) == right:
                return True
    return False


def is_redex(d) -> bool:
    tag = d[0]
    if tag == "app" and d[1][0] == "lam":
        return True
    if tag == "cpair" and d[1][0] == "pair":
        return True
    if tag == "csum" and d[1][0] in ("left", "right"):
        return True
    if tag == "lam" and d[1][0] == "app" and d[1][2] == ("b", 0) and not occurs(d[1][1], 0):
        return True
    if (tag == "pair" and d[1][0] == "cpair" and d[2][0] == "cpair"
            and d[1][2] == ("b", 1) and d[2][2] == ("b", 0) and d[1][1] == d[2][1]):
        return True
    if tag == "csum" and _sum_eta(d[2], d[3]):
        return True
    return False


def redex_positions(t) -> list:
    """Every subterm position (as a child-index tuple) holding a redex."""
    out = []

    def go(d, path):
        if is_redex(d):
            out.append(path)
        for i, c in enumerate(_kids(d)):
            go(c, path + (i,))

    go(db(t), ())
    return out


def oracle_is_normal(t) -> bool:
    return not redex_positions(t)


# ---------------------------------------------------------------------------
# Types


class _Unifier:
    def __init__(self):
        self.sub = {}
        self.n = 0

    def fresh(self):
        self.n += 1
        return ("m", self.n)

    def find(self, t):
        while t[0] == "m" and t in self.sub:
            t = self.sub[t]
        return t

    def occurs(self, m, t) -> bool:
        t = self.find(t)
        if t == m:
            return True
        return t[0] != "m" and any(self.occurs(m, c) for c in t[1:])

    def unify(self, a, b) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return True
        if a[0] == "m":
            if self.occurs(a, b):
                return False
            self.sub[a] = b
            return True
        if b[0] == "m":
            return self.unify(b, a)
        if a[0] != b[0]:
            return False
        return self.unify(a[1], b[1]) and self.unify(a[2], b[2])

    def resolve(self, t):
        t = self.find(t)
        if t[0] == "m":
            return t
        return (t[0], self.resolve(t[1]), self.resolve(t[2]))


def oracle_infer(t):
    """Principal type of a closed term as a nested tuple, or None if untypable."""
    u = _Unifier()

    def go(t, env):
        if isinstance(t, Hole):
            return u.fresh()
        if isinstance(t, Var):
            for name, ty in reversed(env):
                if name == t.name:
                    return ty
            raise LookupError(t.name)
        if isinstance(t, Lam):
            a = u.fresh()
            return ("imp", a, go(t.body, env + ((t.var, a),)))
        if isinstance(t, App):
            f = go(t.fun, env)
            a = go(t.arg, env)
            r = u.fresh()
            if not u.unify(f, ("imp", a, r)):
                raise ValueError
            return r
        if isinstance(t, Pair):
            return ("prod", go(t.fst, env), go(t.snd, env))
        if isinstance(t, (Left, Right)):
            a = go(t.body, env)
            other = u.fresh()
            return ("sum", a, other) if isinstance(t, Left) else ("sum", other, a)
        if isinstance(t, CasePair):
            s = go(t.scrut, env)
            a, b = u.fresh(), u.fresh()
            if not u.unify(s, ("prod", a, b)):
                raise ValueError
            return go(t.body, env + ((t.fst_var, a), (t.snd_var, b)))
        if isinstance(t, CaseSum):
            s = go(t.scrut, env)
            a, b = u.fresh(), u.fresh()
            if not u.unify(s, ("sum", a, b)):
                raise ValueError
            l = go(t.left, env + ((t.left_var, a),))
            r = go(t.right, env + ((t.right_var, b),))
            if not u.unify(l, r):
                raise ValueError
            return l
        raise TypeError(t)

    try:
        return u.resolve(go(t, ()))
    except ValueError:
        return None


def canonical_sexpr(ty) -> str:
    """Render a tuple type with metas renamed a, b, c, ... by first occurrence."""
    names: dict = {}

    def go(t):
        if t[0] == "m":
            if t not in names:
                names[t] = "abcdefghijklmnopqrstuvwxyz"[len(names)]
            return f"(var {names[t]})"
        return f"({t[0]} {go(t[1])} {go(t[2])})"

    return go(ty)


def prop_to_tuple(p):
    if isinstance(p, PVar):
        return ("v", p.name)
    tag = {Imp: "imp", Prod: "prod", Sum: "sum"}[type(p)]
    return (tag, prop_to_tuple(p.lhs), prop_to_tuple(p.rhs))


def oracle_typechecks(t, p) -> bool:
    """Whether closed ``t`` has ground type ``p``: match its principal type onto ``p``."""
    ty = oracle_infer(t)
    if ty is None:
        return False
    target = prop_to_tuple(p)
    sub: dict = {}

    def match(a, b) -> bool:
        if a[0] == "m":
            if a in sub:
                return sub[a] == b
            sub[a] = b
            return True
        return a[0] == b[0] and match(a[1], b[1]) and match(a[2], b[2])

    return match(ty, target)


# ---------------------------------------------------------------------------
# Naive enumeration of closed terms


@lru_cache(maxsize=None)
def closed_terms(n: int, depth: int = 0) -> tuple:
    """Every term of exactly ``n`` nodes whose free variables are among
    ``v0 .. v{depth-1}``; binders are named by depth."""
    if n <= 0:
        return ()
    out = []
    if n == 1:
        out.extend(Var(f"v{k}") for k in range(depth))
    x = f"v{depth}"
    y = f"v{depth + 1}"
    out.extend(Lam(x, b) for b in closed_terms(n - 1, depth + 1))
    out.extend(Left(b) for b in closed_terms(n - 1, depth))
    out.extend(Right(b) for b in closed_terms(n - 1, depth))
    for k in range(1, n - 1):
        for a in closed_terms(k, depth):
            for b in closed_terms(n - 1 - k, depth):
                out.append(App(a, b))
                out.append(Pair(a, b))
            for b in closed_terms(n - 1 - k, depth + 2):
                out.append(CasePair(a, x, y, b))
    for k in range(1, n - 2):
        for j in range(1, n - 1 - k):
            rest = n - 1 - k - j
            for a in closed_terms(k, depth):
                for l in closed_terms(j, depth + 1):
                    for r in closed_terms(rest, depth + 1):
                        out.append(CaseSum(a, x, l, x, r))
    return tuple(out)


def oracle_small_proofs(s: int) -> dict[str, int]:
    """Principal proposition (canonical s-expression) -> minimal normal proof size."""
    best: dict[str, int] = {}
    for n in range(1, s + 1):
        for t in closed_terms(n):
            ty = oracle_infer(t)
            if ty is None or not oracle_is_normal(t):
                continue
            key = canonical_sexpr(ty)
            if key not in best:
                best[key] = n
    return best


def oracle_proofs_of(p, s: int) -> list:
    """All closed normal proofs of ground ``p`` with at most ``s`` nodes, one per
    alpha class."""
    return [t for n in range(1, s + 1) for t in closed_terms(n)
            if oracle_typechecks(t, p) and oracle_is_normal(t)]
