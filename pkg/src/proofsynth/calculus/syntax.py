"""Abstract syntax of propositions and proof terms, and their s-expression form.

Propositions are simple types (variables, implication, product, sum).  Proof
terms are simply typed lambda terms with pairs, sums and numbered holes.  All
nodes are immutable and hashable, so they can be used as dictionary keys and
shared freely between workers.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterator, Union

# ---------------------------------------------------------------------------
# Propositions


@dataclass(frozen=True, slots=True)
class PVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Imp:
    lhs: "Prop"
    rhs: "Prop"

    def __str__(self):
        return f"({self.lhs} -> {self.rhs})"


@dataclass(frozen=True, slots=True)
class Prod:
    lhs: "Prop"
    rhs: "Prop"

    def __str__(self):
        return f"({self.lhs} * {self.rhs})"


@dataclass(frozen=True, slots=True)
class Sum:
    lhs: "Prop"
    rhs: "Prop"

    def __str__(self):
        return f"({self.lhs} + {self.rhs})"


Prop = Union[PVar, Imp, Prod, Sum]
CONNECTIVES = (Imp, Prod, Sum)


def prop_vars(p: Prop) -> list[str]:
    """Propositional variables of ``p`` in order of first occurrence."""
    seen: dict[str, None] = {}
    stack = [p]
    while stack:
        q = stack.pop()
        if isinstance(q, PVar):
            seen.setdefault(q.name, None)
        else:
            stack.append(q.rhs)
            stack.append(q.lhs)
    return list(seen)


def prop_size(p: Prop) -> int:
    if isinstance(p, PVar):
        return 1
    return 1 + prop_size(p.lhs) + prop_size(p.rhs)


def rename_prop(p: Prop, mapping: dict[str, str]) -> Prop:
    if isinstance(p, PVar):
        return PVar(mapping.get(p.name, p.name))
    return type(p)(rename_prop(p.lhs, mapping), rename_prop(p.rhs, mapping))


def canonical_names() -> Iterator[str]:
    """a, b, ..., z, v26, v27, ..."""
    for i in range(26):
        yield chr(ord("a") + i)
    i = 26
    while True:
        yield f"v{i}"
        i += 1


def canonicalize_prop(*props: Prop) -> tuple[Prop, ...]:
    """Rename variables jointly to a, b, c, ... by first occurrence."""
    order: dict[str, None] = {}
    for p in props:
        for v in prop_vars(p):
            order.setdefault(v, None)
    mapping = dict(zip(order, canonical_names()))
    return tuple(rename_prop(p, mapping) for p in props)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Hole:
    id: int

    def __str__(self):
        return f"[]{self.id}"


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Lam:
    var: str
    body: "Term"

    def __str__(self):
        return f"(\\{self.var}. {self.body})"


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self):
        return f"({self.fun} {self.arg})"


@dataclass(frozen=True, slots=True)
class Pair:
    fst: "Term"
    snd: "Term"

    def __str__(self):
        return f"({self.fst}, {self.snd})"


@dataclass(frozen=True, slots=True)
class CasePair:
    scrut: "Term"
    fst_var: str
    snd_var: str
    body: "Term"

    def __str__(self):
        return f"(case {self.scrut} of ({self.fst_var}, {self.snd_var}) -> {self.body})"


@dataclass(frozen=True, slots=True)
class Left:
    body: "Term"

    def __str__(self):
        return f"(Left {self.body})"


@dataclass(frozen=True, slots=True)
class Right:
    body: "Term"

    def __str__(self):
        return f"(Right {self.body})"


@dataclass(frozen=True, slots=True)
class CaseSum:
    scrut: "Term"
    left_var: str
    left: "Term"
    right_var: str
    right: "Term"

    def __str__(self):
        return (f"(case {self.scrut} of {{Left {self.left_var} -> {self.left}; "
                f"Right {self.right_var} -> {self.right}}})")


Term = Union[Hole, Var, Lam, App, Pair, CasePair, Left, Right, CaseSum]


class Rule(enum.IntEnum):
    """The eight proof inference rules, in classifier output order."""

    Var = 0
    Abs = 1
    App = 2
    Pair = 3
    CasePair = 4
    Left = 5
    Right = 6
    CaseSum = 7


RULES = tuple(Rule)
CONSTRUCTOR_RULES = RULES[1:]
ARITY = {Rule.Abs: 1, Rule.App: 2, Rule.Pair: 2, Rule.CasePair: 2,
         Rule.Left: 1, Rule.Right: 1, Rule.CaseSum: 3}
# Number of variables bound in each child of a constructor.
CHILD_BINDERS = {Rule.Abs: (1,), Rule.App: (0, 0), Rule.Pair: (0, 0),
                 Rule.CasePair: (0, 2), Rule.Left: (0,), Rule.Right: (0,),
                 Rule.CaseSum: (0, 1, 1)}
_RULE_OF = {Var: Rule.Var, Lam: Rule.Abs, App: Rule.App, Pair: Rule.Pair,
            CasePair: Rule.CasePair, Left: Rule.Left, Right: Rule.Right,
            CaseSum: Rule.CaseSum}


def rule_of(t: Term) -> Rule:
    """Inference rule whose conclusion types the head constructor of ``t``."""
    try:
        return _RULE_OF[type(t)]
    except KeyError:
        raise ValueError("a hole has no proof inference rule") from None


@dataclass(frozen=True, slots=True)
class Context:
    """A one-depth context: one constructor whose children are holes 0..n-1.

    ``binders`` lists the binder names (one for Abs, two for CasePair and
    CaseSum, none otherwise).  An empty tuple on a binding constructor means
    "choose fresh names when filling".
    """

    rule: Rule
    binders: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rule == Rule.Var:
            raise ValueError("Var is not a one-depth context")

    @property
    def arity(self) -> int:
        return ARITY[self.rule]

    @property
    def tag(self) -> str:
        return self.rule.name

    def plug(self, children: tuple[Term, ...]) -> Term:
        return build(self.rule, self.binders, children)

    def __str__(self):
        holes = tuple(Hole(i) for i in range(self.arity))
        binders = self.binders or _placeholder_binders(self.rule)
        return str(build(self.rule, binders, holes))


def _placeholder_binders(rule: Rule) -> tuple[str, ...]:
    return {Rule.Abs: ("x",), Rule.CasePair: ("x", "y"),
            Rule.CaseSum: ("x", "y")}.get(rule, ())


# All seven one-depth contexts with binder names left to the filler.
CONTEXTS = tuple(Context(r) for r in CONSTRUCTOR_RULES)

PathStep = tuple[Context, int]
Path = tuple[PathStep, ...]


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Hole, Var)):
        return ()
    if isinstance(t, (Lam, Left, Right)):
        return (t.body,)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Pair):
        return (t.fst, t.snd)
    if isinstance(t, CasePair):
        return (t.scrut, t.body)
    return (t.scrut, t.left, t.right)


def binders(t: Term) -> tuple[str, ...]:
    if isinstance(t, Lam):
        return (t.var,)
    if isinstance(t, CasePair):
        return (t.fst_var, t.snd_var)
    if isinstance(t, CaseSum):
        return (t.left_var, t.right_var)
    return ()


def child_scope(t: Term, i: int) -> tuple[str, ...]:
    """Variables bound by ``t`` around its ``i``-th child."""
    if isinstance(t, Lam):
        return (t.var,)
    if isinstance(t, CasePair):
        return (t.fst_var, t.snd_var) if i == 1 else ()
    if isinstance(t, CaseSum):
        return () if i == 0 else ((t.left_var,) if i == 1 else (t.right_var,))
    return ()


def context_of(t: Term) -> Context:
    """The one-depth context at the head of a constructor node."""
    return Context(rule_of(t), binders(t))


def build(rule: Rule, names: tuple[str, ...], kids: tuple[Term, ...]) -> Term:
    if rule == Rule.Abs:
        return Lam(names[0], kids[0])
    if rule == Rule.App:
        return App(*kids)
    if rule == Rule.Pair:
        return Pair(*kids)
    if rule == Rule.CasePair:
        return CasePair(kids[0], names[0], names[1], kids[1])
    if rule == Rule.Left:
        return Left(kids[0])
    if rule == Rule.Right:
        return Right(kids[0])
    if rule == Rule.CaseSum:
        return CaseSum(kids[0], names[0], kids[1], names[1], kids[2])
    raise ValueError(f"cannot build a {rule.name} node")


def rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    """Same head as ``t`` (including binder names) with new children."""
    return build(rule_of(t), binders(t), kids)


# ---------------------------------------------------------------------------
# S-expression text format

_TOKEN = re.compile(r"\s*(\(|\)|[^\s()]+)")


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected input at offset {pos}")
        out.append(m.group(1))
        pos = m.end()
    return out


def _read(tokens: list[str], i: int):
    if i >= len(tokens):
        raise ParseError("unexpected end of input")
    tok = tokens[i]
    if tok == ")":
        raise ParseError("unbalanced ')'")
    if tok != "(":
        return tok, i + 1
    items, i = [], i + 1
    while True:
        if i >= len(tokens):
            raise ParseError("missing ')'")
        if tokens[i] == ")":
            return items, i + 1
        item, i = _read(tokens, i)
        items.append(item)


def read_sexpr(text: str):
    tokens = _tokenize(text)
    expr, i = _read(tokens, 0)
    if i != len(tokens):
        raise ParseError("trailing input after expression")
    return expr


def _shape(expr, head: str, n: int):
    if not isinstance(expr, list) or not expr or expr[0] != head or len(expr) != n + 1:
        raise ParseError(f"malformed ({head} ...) form: {expr!r}")
    return expr[1:]


def _atom(x) -> str:
    if not isinstance(x, str):
        raise ParseError(f"expected an identifier, got {x!r}")
    return x


def prop_from_sexpr(expr) -> Prop:
    if not isinstance(expr, list) or not expr:
        raise ParseError(f"expected a proposition, got {expr!r}")
    head = expr[0]
    if head == "var":
        return PVar(_atom(_shape(expr, "var", 1)[0]))
    cls = {"imp": Imp, "prod": Prod, "sum": Sum}.get(head)
    if cls is None:
        raise ParseError(f"unknown proposition form {head!r}")
    a, b = _shape(expr, head, 2)
    return cls(prop_from_sexpr(a), prop_from_sexpr(b))


def term_from_sexpr(expr) -> Term:
    if not isinstance(expr, list) or not expr:
        raise ParseError(f"expected a term, got {expr!r}")
    head = expr[0]
    if head == "hole":
        raw = _atom(_shape(expr, "hole", 1)[0])
        if not raw.isdigit():
            raise ParseError(f"hole id must be a natural number: {raw!r}")
        return Hole(int(raw))
    if head == "var":
        return Var(_atom(_shape(expr, "var", 1)[0]))
    if head == "lam":
        x, body = _shape(expr, "lam", 2)
        return Lam(_atom(x), term_from_sexpr(body))
    if head in ("app", "pair"):
        a, b = _shape(expr, head, 2)
        cls = App if head == "app" else Pair
        return cls(term_from_sexpr(a), term_from_sexpr(b))
    if head == "casepair":
        s, x, y, body = _shape(expr, "casepair", 4)
        return CasePair(term_from_sexpr(s), _atom(x), _atom(y), term_from_sexpr(body))
    if head in ("left", "right"):
        (body,) = _shape(expr, head, 1)
        return (Left if head == "left" else Right)(term_from_sexpr(body))
    if head == "casesum":
        s, x, m, y, n = _shape(expr, "casesum", 5)
        return CaseSum(term_from_sexpr(s), _atom(x), term_from_sexpr(m),
                       _atom(y), term_from_sexpr(n))
    raise ParseError(f"unknown term form {head!r}")


def parse_prop(text: str) -> Prop:
    return prop_from_sexpr(read_sexpr(text))


def parse_term(text: str) -> Term:
    return term_from_sexpr(read_sexpr(text))


def prop_to_sexpr(p: Prop) -> str:
    if isinstance(p, PVar):
        return f"(var {p.name})"
    head = {Imp: "imp", Prod: "prod", Sum: "sum"}[type(p)]
    return f"({head} {prop_to_sexpr(p.lhs)} {prop_to_sexpr(p.rhs)})"


def term_to_sexpr(t: Term) -> str:
    if isinstance(t, Hole):
        return f"(hole {t.id})"
    if isinstance(t, Var):
        return f"(var {t.name})"
    if isinstance(t, Lam):
        return f"(lam {t.var} {term_to_sexpr(t.body)})"
    if isinstance(t, App):
        return f"(app {term_to_sexpr(t.fun)} {term_to_sexpr(t.arg)})"
    if isinstance(t, Pair):
        return f"(pair {term_to_sexpr(t.fst)} {term_to_sexpr(t.snd)})"
    if isinstance(t, CasePair):
        return (f"(casepair {term_to_sexpr(t.scrut)} {t.fst_var} {t.snd_var} "
                f"{term_to_sexpr(t.body)})")
    if isinstance(t, Left):
        return f"(left {term_to_sexpr(t.body)})"
    if isinstance(t, Right):
        return f"(right {term_to_sexpr(t.body)})"
    return (f"(casesum {term_to_sexpr(t.scrut)} {t.left_var} {term_to_sexpr(t.left)} "
            f"{t.right_var} {term_to_sexpr(t.right)})")
