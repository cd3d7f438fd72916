"""Type checking and principal type inference by first-order unification.

Propositional variables occurring in a goal are rigid; the inference engine
works with its own unification metavariables (:class:`Meta`).  Holes accept
any type, so each hole simply receives the type expected at its position.
Metavariables that survive to the end are rendered back into ordinary
propositional variables: canonical letters for principal types, ``?k`` names
for obligations read off a partial proof checked against a fixed goal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import IllTypedError, UnboundVariableError, UnifyError
from .syntax import (App, CasePair, CaseSum, Hole, Imp, Lam, Left, Pair, Prod,
                     Prop, PVar, Right, Sum, Term, Var, canonical_names,
                     children, prop_vars)


@dataclass(frozen=True, slots=True)
class Meta:
    id: int


class Inference:
    """One run of constraint generation and solving over a term."""

    def __init__(self, record_nodes: bool = False, record_envs: bool = False):
        self.subst: dict[int, object] = {}
        self.counter = 0
        self.hole_types: dict[int, object] = {}
        self.hole_envs: Optional[dict[int, dict]] = {} if record_envs else None
        self.node_types: Optional[list] = [] if record_nodes else None

    def fresh(self) -> Meta:
        self.counter += 1
        return Meta(self.counter)

    def walk(self, t):
        while isinstance(t, Meta):
            s = self.subst.get(t.id)
            if s is None:
                return t
            t = s
        return t

    def _occurs(self, mid: int, t) -> bool:
        stack = [t]
        while stack:
            t = self.walk(stack.pop())
            if isinstance(t, Meta):
                if t.id == mid:
                    return True
            elif not isinstance(t, PVar):
                stack.append(t.lhs)
                stack.append(t.rhs)
        return False

    def unify(self, a, b) -> None:
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            a, b = self.walk(a), self.walk(b)
            if a is b:
                continue
            if isinstance(a, Meta):
                if isinstance(b, Meta) and a.id == b.id:
                    continue
                if self._occurs(a.id, b):
                    raise UnifyError("occurs check")
                self.subst[a.id] = b
            elif isinstance(b, Meta):
                if self._occurs(b.id, a):
                    raise UnifyError("occurs check")
                self.subst[b.id] = a
            elif isinstance(a, PVar) or isinstance(b, PVar):
                if a != b:
                    raise UnifyError(f"cannot unify {a} with {b}")
            elif type(a) is type(b):
                stack.append((a.rhs, b.rhs))
                stack.append((a.lhs, b.lhs))
            else:
                raise UnifyError(f"cannot unify {type(a).__name__} with {type(b).__name__}")

    def _split(self, expected, cls):
        """Components of ``expected`` as a ``cls`` type, unifying if needed."""
        e = self.walk(expected)
        if type(e) is cls:
            return e.lhs, e.rhs
        a, b = self.fresh(), self.fresh()
        self.unify(e, cls(a, b))
        return a, b

    def check(self, term: Term, env: dict, expected) -> None:
        """Constrain ``term`` to have type ``expected`` under ``env``."""
        if self.node_types is not None:
            self.node_types.append(expected)
        if isinstance(term, Hole):
            self.hole_types[term.id] = expected
            if self.hole_envs is not None:
                self.hole_envs[term.id] = env
        elif isinstance(term, Var):
            try:
                t = env[term.name]
            except KeyError:
                raise UnboundVariableError(term.name) from None
            self.unify(t, expected)
        elif isinstance(term, Lam):
            a, b = self._split(expected, Imp)
            self.check(term.body, {**env, term.var: a}, b)
        elif isinstance(term, App):
            a = self.fresh()
            self.check(term.fun, env, Imp(a, expected))
            self.check(term.arg, env, a)
        elif isinstance(term, Pair):
            a, b = self._split(expected, Prod)
            self.check(term.fst, env, a)
            self.check(term.snd, env, b)
        elif isinstance(term, CasePair):
            a, b = self.fresh(), self.fresh()
            self.check(term.scrut, env, Prod(a, b))
            self.check(term.body, {**env, term.fst_var: a, term.snd_var: b}, expected)
        elif isinstance(term, Left):
            a, _ = self._split(expected, Sum)
            self.check(term.body, env, a)
        elif isinstance(term, Right):
            _, b = self._split(expected, Sum)
            self.check(term.body, env, b)
        elif isinstance(term, CaseSum):
            a, b = self.fresh(), self.fresh()
            self.check(term.scrut, env, Sum(a, b))
            self.check(term.left, {**env, term.left_var: a}, expected)
            self.check(term.right, {**env, term.right_var: b}, expected)
        else:
            raise TypeError(f"not a term: {term!r}")

    def zonk(self, t):
        t = self.walk(t)
        if isinstance(t, (Meta, PVar)):
            return t
        return type(t)(self.zonk(t.lhs), self.zonk(t.rhs))


def _metas(t, out: dict) -> None:
    if isinstance(t, Meta):
        out.setdefault(t.id, None)
    elif not isinstance(t, PVar):
        _metas(t.lhs, out)
        _metas(t.rhs, out)


def _render(t, names: dict[int, str]) -> Prop:
    if isinstance(t, Meta):
        return PVar(names[t.id])
    if isinstance(t, PVar):
        return t
    return type(t)(_render(t.lhs, names), _render(t.rhs, names))


def _fresh_names(avoid: set[str]) -> Iterator[str]:
    k = 0
    while True:
        name = f"?{k}"
        k += 1
        if name not in avoid:
            yield name


class _Renderer:
    """Turns leftover metavariables into propositional variables consistently."""

    def __init__(self, names: Iterator[str]):
        self._names = names
        self._map: dict[int, str] = {}

    def __call__(self, t) -> Prop:
        found: dict[int, None] = {}
        _metas(t, found)
        for mid in found:
            if mid not in self._map:
                self._map[mid] = next(self._names)
        return _render(t, self._map)


def _ground_env(ctx) -> dict:
    # Later bindings shadow earlier ones.
    return {name: prop for name, prop in ctx}


def run_inference(m: Term, goal: Optional[Prop] = None, ctx=(),
                  record_nodes: bool = False) -> Inference:
    """Solve the typing constraints of ``m``; raises on failure."""
    inf = Inference(record_nodes)
    root = goal if goal is not None else inf.fresh()
    inf.root = root
    inf.check(m, _ground_env(ctx), root)
    return inf


def infer_principal(m: Term) -> tuple[Prop, dict[int, Prop]]:
    """Principal proposition of a closed term and the obligation at each hole.

    Variables are renamed canonically (a, b, c, ... by first occurrence in the
    root type, then in the hole types by hole id order of appearance).
    Raises :class:`UnifyError` if no assignment of types makes ``m`` typable.
    """
    inf = run_inference(m)
    render = _Renderer(canonical_names())
    root = render(inf.zonk(inf.root))
    holes = {h: render(inf.zonk(t)) for h, t in inf.hole_types.items()}
    return root, holes


def principal_prop(m: Term) -> Prop:
    return infer_principal(m)[0]


def typecheck(ctx, m: Term, p: Prop) -> bool:
    """Whether ``ctx |- m : p`` is derivable; holes admit any type."""
    try:
        run_inference(m, p, ctx)
    except (UnifyError, UnboundVariableError):
        return False
    return True


def is_typable(m: Term) -> bool:
    try:
        run_inference(m)
    except (UnifyError, UnboundVariableError):
        return False
    return True


def hole_obligations(m: Term, goal: Prop) -> Optional[dict[int, Prop]]:
    """Most general obligation at each hole of ``m`` checked against ``goal``.

    Returns ``None`` when ``m`` cannot be completed to a proof of ``goal``.
    Unsolved metavariables become fresh ``?k`` variables distinct from the
    goal's own variables.
    """
    try:
        inf = run_inference(m, goal)
    except (UnifyError, UnboundVariableError):
        return None
    render = _Renderer(_fresh_names(set(prop_vars(goal))))
    return {h: render(inf.zonk(t)) for h, t in inf.hole_types.items()}


class HoleState:
    """Solved typing constraints of a partial proof checked against a goal.

    Keeps the expected type and the typing context of every hole, so that
    filling one hole only needs the new node to be checked (see ``refine``).
    """

    __slots__ = ("goal", "subst", "counter", "hole_types", "hole_envs")

    def __init__(self, goal, subst, counter, hole_types, hole_envs):
        self.goal = goal
        self.subst = subst
        self.counter = counter
        self.hole_types = hole_types
        self.hole_envs = hole_envs

    @classmethod
    def of(cls, m: Term, goal: Prop) -> Optional["HoleState"]:
        """State of ``m`` against ``goal``, or None if ``m`` cannot prove it."""
        inf = Inference(record_envs=True)
        try:
            inf.check(m, {}, goal)
        except (UnifyError, UnboundVariableError):
            return None
        return cls(goal, inf.subst, inf.counter, inf.hole_types, inf.hole_envs)

    def refine(self, h: int, node: Term) -> Optional["HoleState"]:
        """State after hole ``h`` is replaced by ``node`` (whose own holes are new).

        Returns None when the filled term can no longer prove the goal.  The
        constraints of the rest of the term are already solved, so checking
        ``node`` at the type expected for ``h`` decides this.
        """
        inf = Inference(record_envs=True)
        inf.subst = dict(self.subst)
        inf.counter = self.counter
        inf.hole_types = {k: t for k, t in self.hole_types.items() if k != h}
        inf.hole_envs = {k: e for k, e in self.hole_envs.items() if k != h}
        try:
            inf.check(node, self.hole_envs[h], self.hole_types[h])
        except (UnifyError, UnboundVariableError):
            return None
        return HoleState(self.goal, inf.subst, inf.counter, inf.hole_types, inf.hole_envs)

    def obligations(self, order) -> dict[int, Prop]:
        """Obligations of the holes listed in ``order`` (as ``hole_obligations``
        would name them when ``order`` is the preorder of the holes)."""
        inf = Inference()
        inf.subst = self.subst
        render = _Renderer(_fresh_names(set(prop_vars(self.goal))))
        return {h: render(inf.zonk(self.hole_types[h])) for h in order}


@dataclass(frozen=True)
class TypedTerm:
    """A term whose every node carries the proposition it proves."""

    term: Term
    prop: Prop
    children: tuple["TypedTerm", ...]

    def __iter__(self):
        """Preorder traversal."""
        yield self
        for c in self.children:
            yield from c


def _assemble(term: Term, types: Iterator[Prop]) -> TypedTerm:
    prop = next(types)
    kids = tuple(_assemble(c, types) for c in children(term))
    return TypedTerm(term, prop, kids)


def annotate(m: Term, p: Prop) -> TypedTerm:
    """Annotate each node of ``m`` with its type in a derivation of ``|- m : p``."""
    try:
        inf = run_inference(m, p, record_nodes=True)
    except (UnifyError, UnboundVariableError) as e:
        raise IllTypedError(f"term does not prove {p}: {e}") from e
    render = _Renderer(_fresh_names(set(prop_vars(p))))
    types = [render(inf.zonk(t)) for t in inf.node_types]
    return _assemble(m, iter(types))


def annotate_principal(m: Term) -> TypedTerm:
    """Annotation of ``m`` at its principal proposition (canonical names)."""
    inf = run_inference(m, record_nodes=True)
    render = _Renderer(canonical_names())
    types = [render(inf.zonk(t)) for t in inf.node_types]
    return _assemble(m, iter(types))
