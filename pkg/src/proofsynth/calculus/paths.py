"""Paths into terms, holes, hole filling and scope queries."""

from __future__ import annotations

from typing import Union

from .errors import BadPathError, HoleAtPathError, NoSuchHoleError
from .syntax import (CasePair, CaseSum, Context, Hole, Imp, Lam, Path, Prod,
                     Prop, Rule, Sum, Term, Var, build, child_scope, children,
                     context_of, rebuild, rule_of)
from .typing import TypedTerm, annotate_principal


def size(m: Term) -> int:
    """Number of non-hole nodes."""
    if isinstance(m, Hole):
        return 0
    return 1 + sum(size(c) for c in children(m))


def holes(m: Term) -> list[tuple[int, Path]]:
    """Every hole with its root-to-hole path, leftmost (preorder) first."""
    out: list[tuple[int, Path]] = []

    def go(t: Term, path: Path):
        if isinstance(t, Hole):
            out.append((t.id, path))
            return
        if isinstance(t, Var):
            return
        ctx = context_of(t)
        for i, c in enumerate(children(t)):
            go(c, path + ((ctx, i),))

    go(m, ())
    return out


def hole_ids(m: Term) -> list[int]:
    out = []
    stack = [m]
    while stack:
        t = stack.pop()
        if isinstance(t, Hole):
            out.append(t.id)
        else:
            stack.extend(reversed(children(t)))
    return out


def is_complete(m: Term) -> bool:
    return not hole_ids(m)


def subterm_at(m: Term, path: Path) -> Term:
    t = m
    for ctx, i in path:
        if isinstance(t, (Hole, Var)) or rule_of(t) != ctx.rule:
            raise BadPathError(f"path step {ctx.tag}/{i} does not match {t}")
        kids = children(t)
        if not 0 <= i < len(kids):
            raise BadPathError(f"child index {i} out of range for {ctx.tag}")
        t = kids[i]
    return t


def scope_along(m: Term, path: Path) -> tuple[str, ...]:
    """Every binder crossed on the way down ``path``, outermost first
    (shadowed names included)."""
    t, out = m, []
    for ctx, i in path:
        if isinstance(t, (Hole, Var)) or rule_of(t) != ctx.rule:
            raise BadPathError(f"path step {ctx.tag}/{i} does not match {t}")
        kids = children(t)
        if not 0 <= i < len(kids):
            raise BadPathError(f"child index {i} out of range for {ctx.tag}")
        out.extend(child_scope(t, i))
        t = kids[i]
    return tuple(out)


def scope_at(m: Term, path: Path) -> list[str]:
    """Names of the variables bound above the node at ``path``, outermost first."""
    # Keep only the innermost binding of a shadowed name.
    seen, visible = set(), []
    for name in reversed(scope_along(m, path)):
        if name not in seen:
            seen.add(name)
            visible.append(name)
    return visible[::-1]


def binder_names(scope, rule: Rule) -> tuple[str, ...]:
    """Deterministic fresh binders ``x<k>`` for a constructor placed under ``scope``.

    ``k`` starts at the number of variables in scope and skips names that
    are already bound there, so a new binder never shadows an old one.
    """
    taken = set(scope)
    k = len(scope)

    def take():
        nonlocal k
        while f"x{k}" in taken:
            k += 1
        name = f"x{k}"
        k += 1
        return name

    if rule == Rule.Abs:
        return (take(),)
    if rule == Rule.CasePair:
        first = take()
        return (first, take())
    if rule == Rule.CaseSum:
        name = take()
        return (name, name)
    return ()


def _max_hole(m: Term) -> int:
    ids = hole_ids(m)
    return max(ids) if ids else -1


def fill(m: Term, h: int, c: Union[Context, str, Var]) -> Term:
    """Replace hole ``h`` with a variable or a one-depth context.

    Child holes of a context get fresh ids (one more than the largest id in
    ``m``, in child order).  Binder names missing from the context are chosen
    as ``x<k>`` where ``k`` counts the variables in scope at the hole.
    """
    next_id = _max_hole(m) + 1
    found = False

    def go(t: Term, scope: tuple) -> Term:
        nonlocal found
        if isinstance(t, Hole):
            if t.id != h:
                return t
            found = True
            return one_depth_node(c, scope, next_id)
        if isinstance(t, Var):
            return t
        kids = children(t)
        new = tuple(go(k, scope + child_scope(t, i)) for i, k in enumerate(kids))
        if all(a is b for a, b in zip(new, kids)):
            return t
        return rebuild(t, new)

    out = go(m, ())
    if not found:
        raise NoSuchHoleError(h)
    return out


def one_depth_node(c: Union[Context, str, Var], scope, first_id: int) -> Term:
    """The node ``fill`` puts in a hole whose scope is ``scope``; child holes
    are numbered from ``first_id``."""
    if isinstance(c, str):
        return Var(c)
    if isinstance(c, Var):
        return c
    names = c.binders or binder_names(scope, c.rule)
    return build(c.rule, names, tuple(Hole(first_id + i) for i in range(c.arity)))


def replace_at(m: Term, path: Path, new: Term) -> Term:
    """``m`` with the subterm at ``path`` replaced; only the spine is rebuilt."""
    if not path:
        return new
    (ctx, i), rest = path[0], path[1:]
    if isinstance(m, (Hole, Var)) or rule_of(m) != ctx.rule:
        raise BadPathError(f"path step {ctx.tag}/{i} does not match {m}")
    kids = list(children(m))
    kids[i] = replace_at(kids[i], rest, new)
    return rebuild(m, tuple(kids))


def typed_at(t: TypedTerm, path: Path) -> TypedTerm:
    node = t
    for ctx, i in path:
        if isinstance(node.term, (Hole, Var)) or rule_of(node.term) != ctx.rule:
            raise BadPathError(f"path step {ctx.tag}/{i} does not match {node.term}")
        if not 0 <= i < len(node.children):
            raise BadPathError(f"child index {i} out of range for {ctx.tag}")
        node = node.children[i]
    return node


def rule_at(t: TypedTerm, path: Path) -> Rule:
    node = typed_at(t, path)
    if isinstance(node.term, Hole):
        raise HoleAtPathError(f"hole {node.term.id} at path")
    return rule_of(node.term)


def _binder_types(node: TypedTerm, i: int) -> list[tuple[str, Prop]]:
    t = node.term
    if isinstance(t, Lam):
        p = node.prop
        return [(t.var, p.lhs)] if isinstance(p, Imp) else []
    if isinstance(t, CasePair) and i == 1:
        s = node.children[0].prop
        return [(t.fst_var, s.lhs), (t.snd_var, s.rhs)] if isinstance(s, Prod) else []
    if isinstance(t, CaseSum) and i > 0:
        s = node.children[0].prop
        if not isinstance(s, Sum):
            return []
        return [(t.left_var, s.lhs)] if i == 1 else [(t.right_var, s.rhs)]
    return []


def bound_vars_at(m: Term, path: Path) -> list[tuple[str, Prop]]:
    """Typing context at ``path``: binders above it with their principal types.

    The context is in binding order; a later entry shadows an earlier one of
    the same name.  Types use the canonical naming of the principal
    annotation of ``m``.
    """
    subterm_at(m, path)
    node = annotate_principal(m)
    out: list[tuple[str, Prop]] = []
    for _, i in path:
        out.extend(_binder_types(node, i))
        node = node.children[i]
    return out
