"""Proposition/proof corpora: exhaustive small proofs, random large proofs,
training quadruples, train/validation splits and their JSON Lines files."""

from __future__ import annotations

import json
import math
import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .calculus import (CONTEXTS, Context, Hole, Path, Prop, Rule, Term,
                       annotate, fill, has_forced_redex, hole_ids, holes,
                       is_normal, is_typable, parse_prop, parse_term,
                       principal_prop, prop_to_sexpr, rule_of, size,
                       term_to_sexpr, typecheck)
from .calculus.paths import scope_at


class GiveUpError(RuntimeError):
    """Random generation exhausted its restart budget."""


@dataclass(frozen=True)
class ProofPair:
    proposition: Prop
    proof: Term


@dataclass(frozen=True)
class Quadruple:
    goal: Prop
    obligation: Prop
    path: Path
    rule: Rule


@dataclass
class DatasetSplit:
    train: list
    validation: list
    seed: int


def candidates(m: Term, path: Path) -> list:
    """Every one-depth context, then every variable visible at ``path``."""
    return list(CONTEXTS) + scope_at(m, path)


def _viable(m: Term, bound: int) -> bool:
    # Each remaining hole needs at least one more node.
    if size(m) + len(hole_ids(m)) > bound:
        return False
    return is_typable(m) and not has_forced_redex(m)


def small_proof_gen(s: int) -> list[ProofPair]:
    """All closed beta-eta normal proofs of size <= s, one per principal proposition.

    Breadth-first over partial proofs, always filling the leftmost hole.
    When a proposition is reached again, the strictly smaller proof wins.
    """
    found: dict[Prop, Term] = {}
    queue = deque([Hole(0)])
    while queue:
        m = queue.popleft()
        h, path = holes(m)[0]
        for c in candidates(m, path):
            mc = fill(m, h, c)
            if not _viable(mc, s):
                continue
            if hole_ids(mc):
                queue.append(mc)
                continue
            p = principal_prop(mc)
            old = found.get(p)
            if old is None or size(mc) < size(old):
                found[p] = mc
    return [ProofPair(p, m) for p, m in found.items()]


def _random_proof(l: int, u: int, rng: random.Random, max_restarts: int) -> ProofPair:
    for _ in range(max_restarts):
        m: Term = Hole(0)
        while True:
            hs = holes(m)
            if not hs:
                break
            h, path = hs[0]
            viable = [(c, mc) for c, mc in ((c, fill(m, h, c)) for c in candidates(m, path))
                      if _viable(mc, u)]
            if size(m) >= l:
                variables = [(c, mc) for c, mc in viable if isinstance(c, str)]
                viable = variables or viable
            if not viable:
                break
            m = viable[rng.randrange(len(viable))][1]
        if not hole_ids(m) and l <= size(m) <= u:
            return ProofPair(principal_prop(m), m)
    raise GiveUpError(f"no proof with size in [{l}, {u}] after {max_restarts} restarts")


def _one_large(args) -> ProofPair:
    l, u, seed, index, max_restarts = args
    rng = random.Random(f"{seed}/{index}")
    return _random_proof(l, u, rng, max_restarts)


def random_large_proof_gen(l: int, u: int, seed: int, count: int,
                           max_restarts: int = 10_000,
                           workers: int = 1) -> list[ProofPair]:
    """``count`` random normal proofs with sizes in ``[l, u]``.

    Holes are filled left to right with uniformly chosen constructors that
    keep the term typable and free of forced redexes.  Once the proof has
    reached size ``l`` variables are preferred.  An attempt is restarted when
    it completes below ``l`` or can no longer finish within ``u``.  Proof
    ``i`` uses its own generator seeded from ``(seed, i)``, so the output does
    not depend on ``workers``.
    """
    if l > u:
        raise ValueError("lower bound exceeds upper bound")
    jobs = [(l, u, seed, i, max_restarts) for i in range(count)]
    if workers <= 1:
        return [_one_large(j) for j in jobs]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(_one_large, jobs))


def check_pair(pair: ProofPair) -> None:
    """Raise if the pair breaks the corpus invariants."""
    m = pair.proof
    if hole_ids(m):
        raise AssertionError(f"proof has holes: {m}")
    if not is_normal(m):
        raise AssertionError(f"proof is not beta-eta normal: {m}")
    if not typecheck([], m, pair.proposition):
        raise AssertionError(f"proof does not prove {pair.proposition}: {m}")
    if principal_prop(m) != pair.proposition:
        raise AssertionError(f"{pair.proposition} is not the principal proposition of {m}")


def strip_path(path: Path) -> Path:
    """Path with binder names dropped (only constructor shapes remain)."""
    return tuple((Context(ctx.rule), i) for ctx, i in path)


def extract_quadruples(pairs: Iterable[ProofPair]) -> list[Quadruple]:
    """One (goal, obligation, path, rule) record per node, in preorder."""
    out = []
    for pair in pairs:
        typed = annotate(pair.proof, pair.proposition)

        def walk(node, path):
            rule = rule_of(node.term)
            out.append(Quadruple(pair.proposition, node.prop, path, rule))
            if rule == Rule.Var:
                return
            ctx = Context(rule)
            for i, child in enumerate(node.children):
                walk(child, path + ((ctx, i),))

        walk(typed, ())
    return out


def split(quads: Sequence, ratio: float, seed: int) -> DatasetSplit:
    """Seeded shuffle, then the first ``floor(ratio * n)`` records train."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    order = list(range(len(quads)))
    random.Random(seed).shuffle(order)
    k = math.floor(ratio * len(quads) + 1e-9)
    return DatasetSplit([quads[i] for i in order[:k]],
                        [quads[i] for i in order[k:]], seed)


def size_histogram(pairs: Iterable[ProofPair], width: int = 10) -> dict[str, int]:
    """Number of proofs per size band 1-10, 11-20, ..."""
    counts: dict[int, int] = {}
    for pair in pairs:
        band = (size(pair.proof) - 1) // width
        counts[band] = counts.get(band, 0) + 1
    return {f"{b * width + 1}-{(b + 1) * width}": counts[b] for b in sorted(counts)}


# ---------------------------------------------------------------------------
# JSON Lines files


def path_to_json(path: Path) -> list:
    return [[ctx.tag, i] for ctx, i in path]


def path_from_json(raw) -> Path:
    return tuple((Context(Rule[tag]), int(i)) for tag, i in raw)


def write_corpus(pairs: Iterable[ProofPair], filename) -> None:
    with open(filename, "w", encoding="utf-8") as f:
        for pair in pairs:
            f.write(json.dumps({"proposition": prop_to_sexpr(pair.proposition),
                                "proof": term_to_sexpr(pair.proof)}) + "\n")


def read_corpus(filename) -> list[ProofPair]:
    out = []
    with open(filename, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                out.append(ProofPair(parse_prop(rec["proposition"]), parse_term(rec["proof"])))
    return out


def quad_to_json(q: Quadruple) -> dict:
    return {"goal": prop_to_sexpr(q.goal), "obligation": prop_to_sexpr(q.obligation),
            "path": path_to_json(q.path), "rule": q.rule.name}


def quad_from_json(rec: dict) -> Quadruple:
    return Quadruple(parse_prop(rec["goal"]), parse_prop(rec["obligation"]),
                     path_from_json(rec["path"]), Rule[rec["rule"]])


def write_quadruples(quads: Iterable[Quadruple], filename) -> None:
    with open(filename, "w", encoding="utf-8") as f:
        for q in quads:
            f.write(json.dumps(quad_to_json(q)) + "\n")


def read_quadruples(filename) -> list[Quadruple]:
    with open(filename, encoding="utf-8") as f:
        return [quad_from_json(json.loads(line)) for line in f if line.strip()]
