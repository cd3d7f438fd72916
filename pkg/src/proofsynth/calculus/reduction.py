"""Free variables, substitution, alpha-equivalence and beta/eta reduction."""

from __future__ import annotations

from typing import Optional

from .syntax import (App, CasePair, CaseSum, Hole, Lam, Left, Pair, Right,
                     Term, Var, child_scope, children, rebuild)


def free_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, Hole):
        return frozenset()
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, CasePair):
        return free_vars(t.scrut) | (free_vars(t.body) - {t.fst_var, t.snd_var})
    if isinstance(t, CaseSum):
        return (free_vars(t.scrut) | (free_vars(t.left) - {t.left_var})
                | (free_vars(t.right) - {t.right_var}))
    out = frozenset()
    for c in children(t):
        out |= free_vars(c)
    return out


def all_names(t: Term) -> set[str]:
    """Every variable name occurring in ``t``, bound or free."""
    out: set[str] = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        elif isinstance(u, Lam):
            out.add(u.var)
        elif isinstance(u, CasePair):
            out.update((u.fst_var, u.snd_var))
        elif isinstance(u, CaseSum):
            out.update((u.left_var, u.right_var))
        stack.extend(children(u))
    return out


def has_holes(t: Term) -> bool:
    if isinstance(t, Hole):
        return True
    return any(has_holes(c) for c in children(t))


def fresh_name(base: str, avoid) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def _under(name: str, body: Term, s: dict[str, Term], fv_s: set[str]):
    """Push a simultaneous substitution under one binder, renaming if needed."""
    inner = {k: v for k, v in s.items() if k != name}
    if not inner:
        return name, body
    if name in fv_s:
        new = fresh_name(name, fv_s | all_names(body) | inner.keys())
        inner[name] = Var(new)
        name = new
    return name, _subst(body, inner, fv_s)


def _subst(m: Term, s: dict[str, Term], fv_s: set[str]) -> Term:
    if isinstance(m, Var):
        return s.get(m.name, m)
    if isinstance(m, Hole):
        return m
    if isinstance(m, Lam):
        x, body = _under(m.var, m.body, s, fv_s)
        return Lam(x, body)
    if isinstance(m, CasePair):
        scrut = _subst(m.scrut, s, fv_s)
        inner = {k: v for k, v in s.items() if k not in (m.fst_var, m.snd_var)}
        x, y, body = m.fst_var, m.snd_var, m.body
        if inner:
            if x in fv_s or y in fv_s:
                avoid = fv_s | all_names(body) | inner.keys() | {x, y}
                if x in fv_s:
                    nx = fresh_name(x, avoid)
                    avoid.add(nx)
                    inner[x] = Var(nx)
                    x = nx
                if y in fv_s:
                    ny = fresh_name(y, avoid)
                    inner[m.snd_var] = Var(ny)
                    y = ny
            body = _subst(body, inner, fv_s)
        return CasePair(scrut, x, y, body)
    if isinstance(m, CaseSum):
        scrut = _subst(m.scrut, s, fv_s)
        x, left = _under(m.left_var, m.left, s, fv_s)
        y, right = _under(m.right_var, m.right, s, fv_s)
        return CaseSum(scrut, x, left, y, right)
    return rebuild(m, tuple(_subst(c, s, fv_s) for c in children(m)))


def substitute_many(m: Term, s: dict[str, Term]) -> Term:
    """Simultaneous capture-avoiding substitution."""
    fv_s: set[str] = set()
    for v in s.values():
        fv_s |= free_vars(v)
    return _subst(m, s, fv_s)


def substitute(m: Term, x: str, n: Term) -> Term:
    """``[n/x]m``, renaming binders of ``m`` that would capture ``n``'s free variables."""
    return substitute_many(m, {x: n})


# ---------------------------------------------------------------------------
# Alpha-equivalence


def alpha_key(t: Term, _env: tuple = ()) -> tuple:
    """Nameless form of ``t``; equal keys iff alpha-equivalent.

    Bound variables become de Bruijn indices and hole identifiers are dropped.
    """
    if isinstance(t, Var):
        for i in range(len(_env) - 1, -1, -1):
            if _env[i] == t.name:
                return ("b", len(_env) - 1 - i)
        return ("f", t.name)
    if isinstance(t, Hole):
        return ("hole",)
    if isinstance(t, Lam):
        return ("lam", alpha_key(t.body, _env + (t.var,)))
    if isinstance(t, CasePair):
        return ("casepair", alpha_key(t.scrut, _env),
                alpha_key(t.body, _env + (t.fst_var, t.snd_var)))
    if isinstance(t, CaseSum):
        return ("casesum", alpha_key(t.scrut, _env),
                alpha_key(t.left, _env + (t.left_var,)),
                alpha_key(t.right, _env + (t.right_var,)))
    return (type(t).__name__,) + tuple(alpha_key(c, _env) for c in children(t))


def alpha_eq(a: Term, b: Term) -> bool:
    return alpha_key(a) == alpha_key(b)


# ---------------------------------------------------------------------------
# Redexes


def beta_contract(t: Term) -> Optional[Term]:
    """Contractum if ``t`` itself is a beta-redex."""
    if isinstance(t, App) and isinstance(t.fun, Lam):
        return substitute(t.fun.body, t.fun.var, t.arg)
    if isinstance(t, CasePair) and isinstance(t.scrut, Pair):
        return substitute_many(t.body, {t.fst_var: t.scrut.fst, t.snd_var: t.scrut.snd})
    if isinstance(t, CaseSum):
        if isinstance(t.scrut, Left):
            return substitute(t.left, t.left_var, t.scrut.body)
        if isinstance(t.scrut, Right):
            return substitute(t.right, t.right_var, t.scrut.body)
    return None


def _sum_eta_body(t: CaseSum, z: str) -> Optional[Term]:
    """Find ``N`` with left = [Left x/z]N, right = [Right y/z]N, x, y not free in N."""
    x, y = t.left_var, t.right_var

    def resolve(env, name):
        for i in range(len(env) - 1, -1, -1):
            if env[i] == name:
                return i
        return None

    def walk(a: Term, b: Term, ea: tuple, eb: tuple) -> Optional[Term]:
        if (isinstance(a, Left) and isinstance(a.body, Var) and a.body.name == x
                and resolve(ea, x) is None and isinstance(b, Right)
                and isinstance(b.body, Var) and b.body.name == y
                and resolve(eb, y) is None):
            return Var(z)
        if type(a) is not type(b):
            return None
        if isinstance(a, Hole):
            return a
        if isinstance(a, Var):
            ia, ib = resolve(ea, a.name), resolve(eb, b.name)
            if ia is None and ib is None:
                if a.name != b.name or a.name == x or b.name == y:
                    return None
                return a
            return a if ia == ib else None
        kids = []
        for i, (ca, cb) in enumerate(zip(children(a), children(b))):
            na, nb = child_scope(a, i), child_scope(b, i)
            k = walk(ca, cb, ea + na, eb + nb)
            if k is None:
                return None
            kids.append(k)
        return rebuild(a, tuple(kids))

    return walk(t.left, t.right, (), ())


def eta_contract(t: Term, forced_only: bool = False) -> Optional[Term]:
    """Contractum if ``t`` itself is an eta-redex.

    With ``forced_only`` the pieces inspected by the side conditions must be
    hole-free, so that the redex survives every way of filling the holes.
    """
    if isinstance(t, Lam) and isinstance(t.body, App):
        f, a = t.body.fun, t.body.arg
        if isinstance(a, Var) and a.name == t.var and t.var not in free_vars(f):
            if not (forced_only and has_holes(f)):
                return f
        return None
    if isinstance(t, Pair):
        p, q = t.fst, t.snd
        if (isinstance(p, CasePair) and isinstance(q, CasePair)
                and p.fst_var != p.snd_var and q.fst_var != q.snd_var
                and p.body == Var(p.fst_var) and q.body == Var(q.snd_var)
                and alpha_eq(p.scrut, q.scrut)):
            if not (forced_only and (has_holes(p.scrut) or has_holes(q.scrut))):
                return p.scrut
        return None
    if isinstance(t, CaseSum):
        if forced_only and (has_holes(t.left) or has_holes(t.right)):
            return None
        z = fresh_name("z", all_names(t))
        body = _sum_eta_body(t, z)
        if body is None:
            return None
        return substitute(body, z, t.scrut)
    return None


def _step(t: Term, contract) -> Optional[Term]:
    r = contract(t)
    if r is not None:
        return r
    kids = children(t)
    for i, c in enumerate(kids):
        r = _step(c, contract)
        if r is not None:
            return rebuild(t, kids[:i] + (r,) + kids[i + 1:])
    return None


def beta_step(m: Term) -> Optional[Term]:
    """Contract the leftmost-outermost beta-redex, or ``None`` if there is none."""
    return _step(m, beta_contract)


def eta_step(m: Term) -> Optional[Term]:
    """Contract the leftmost-outermost eta-redex, or ``None`` if there is none."""
    return _step(m, eta_contract)


def _has_redex(t: Term, forced: bool) -> bool:
    if beta_contract(t) is not None:
        return True
    if eta_contract(t, forced_only=forced) is not None:
        return True
    return any(_has_redex(c, forced) for c in children(t))


def is_normal(m: Term) -> bool:
    """No beta- or eta-redex at any position (holes are opaque leaves)."""
    return not _has_redex(m, False)


def has_forced_redex(m: Term) -> bool:
    """Whether every completion of the partial term ``m`` is non-normal.

    Beta-redexes are forced as soon as their shape is present; eta-redexes
    only when the subterms their side conditions inspect are hole-free.
    On hole-free terms this is exactly ``not is_normal(m)``.
    """
    return _has_redex(m, True)


def normalize(m: Term, max_steps: int = 10_000) -> Term:
    """Repeated leftmost-outermost steps (beta before eta) until normal."""
    for _ in range(max_steps):
        n = beta_step(m)
        if n is None:
            n = eta_step(m)
        if n is None:
            return m
        m = n
    raise RuntimeError(f"no normal form within {max_steps} steps")
