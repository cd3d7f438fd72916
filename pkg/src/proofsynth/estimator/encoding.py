"""Node encoding of propositions and flattening of proposition trees.

Each proposition node gets a 4-vector: ``[f(a), 0, 0, 0]`` for a variable
``a`` and one-hot rows for the three connectives.  ``f`` numbers variables
with positive integers.  Variables are first renamed canonically (by first
occurrence in the goal, then in the obligation) and then looked up in the
training vocabulary; names the vocabulary has never seen get the next unused
integers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ..calculus.syntax import (Imp, Prod, Prop, PVar, Sum, canonical_names,
                               prop_vars, rename_prop)

NODE_CLASSES = ("var", "imp", "prod", "sum")
CLASS_ARITY = {"var": 0, "imp": 2, "prod": 2, "sum": 2}
_CLASS_OF = {PVar: 0, Imp: 1, Prod: 2, Sum: 3}


def enc(node, f_value: Optional[float] = None) -> np.ndarray:
    """Feature vector of one proposition node (a connective class or a variable)."""
    if node in (Imp, "imp", "->"):
        return np.array([0.0, 1.0, 0.0, 0.0])
    if node in (Prod, "prod", "*"):
        return np.array([0.0, 0.0, 1.0, 0.0])
    if node in (Sum, "sum", "+"):
        return np.array([0.0, 0.0, 0.0, 1.0])
    if f_value is None or f_value <= 0:
        raise ValueError("a propositional variable needs a positive number")
    return np.array([float(f_value), 0.0, 0.0, 0.0])


@dataclass
class Vocabulary:
    """Variable name -> positive integer, in order of first occurrence."""

    numbers: dict[str, int] = field(default_factory=dict)

    def add(self, name: str) -> int:
        if name not in self.numbers:
            self.numbers[name] = len(self.numbers) + 1
        return self.numbers[name]

    def f_values(self, names: Iterable[str]) -> dict[str, int]:
        """Numbers for ``names``; unknown names get fresh ones in order."""
        out = {}
        nxt = max(self.numbers.values(), default=0) + 1
        for name in names:
            if name in self.numbers:
                out[name] = self.numbers[name]
            else:
                out[name] = nxt
                nxt += 1
        return out

    @classmethod
    def from_queries(cls, pairs: Iterable[tuple[Prop, Prop]]) -> "Vocabulary":
        vocab = cls()
        for goal, obligation in pairs:
            g, q = canonical_query(goal, obligation)
            for name in prop_vars(g) + prop_vars(q):
                vocab.add(name)
        return vocab


def canonical_query(goal: Prop, obligation: Optional[Prop]) -> tuple[Prop, Optional[Prop]]:
    names: dict[str, None] = dict.fromkeys(prop_vars(goal))
    if obligation is not None:
        names.update(dict.fromkeys(prop_vars(obligation)))
    mapping = dict(zip(names, canonical_names()))
    q = rename_prop(obligation, mapping) if obligation is not None else None
    return rename_prop(goal, mapping), q


@dataclass
class TreeArrays:
    """One proposition tree in preorder: classes, features and links."""

    cls: np.ndarray
    feat: np.ndarray
    parent: np.ndarray   # -1 at the root
    child: np.ndarray    # (n, 2), -1 where absent
    height: np.ndarray

    def __len__(self):
        return len(self.cls)


def tree_arrays(p: Prop, f: dict[str, int]) -> TreeArrays:
    cls, feat, parent, child, height = [], [], [], [], []

    def go(q: Prop, par: int) -> int:
        i = len(cls)
        c = _CLASS_OF[type(q)]
        cls.append(c)
        parent.append(par)
        child.append([-1, -1])
        height.append(0)
        if c == 0:
            feat.append(enc(q, f[q.name]))
            return i
        feat.append(enc(type(q)))
        a = go(q.lhs, i)
        b = go(q.rhs, i)
        child[i] = [a, b]
        height[i] = 1 + max(height[a], height[b])
        return i

    go(p, -1)
    return TreeArrays(np.array(cls), np.array(feat, dtype=np.float64),
                      np.array(parent), np.array(child, dtype=np.int64).reshape(-1, 2),
                      np.array(height))


class Forest:
    """Several trees concatenated, with index groups for vectorised layers.

    Row ``n_nodes`` is a padding row that stands for the zero vector (the
    parent of a root).
    """

    def __init__(self, trees: list[TreeArrays]):
        offsets = np.cumsum([0] + [len(t) for t in trees])
        n = int(offsets[-1])
        self.n_nodes = n
        self.roots = offsets[:-1].astype(np.int64)
        self.cls = np.concatenate([t.cls for t in trees])
        self.feat = np.concatenate([t.feat for t in trees])
        self.height = np.concatenate([t.height for t in trees])
        parent = np.concatenate([np.where(t.parent < 0, -1, t.parent + o)
                                 for t, o in zip(trees, offsets)])
        child = np.concatenate([np.where(t.child < 0, -1, t.child + o)
                                for t, o in zip(trees, offsets)])
        self.parent = np.where(parent < 0, n, parent)
        self.child = np.where(child < 0, n, child)
        self.by_class = [(c, np.flatnonzero(self.cls == c)) for c in range(4)]
        self.by_class = [(c, idx) for c, idx in self.by_class if len(idx)]
        levels = []
        for h in range(int(self.height.max()) + 1 if n else 0):
            at_h = self.height == h
            for c in range(4):
                idx = np.flatnonzero(at_h & (self.cls == c))
                if len(idx):
                    levels.append((c, idx))
        self.levels = levels
