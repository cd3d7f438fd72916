"""Mini-batch training of the rule classifier, evaluation and gradient checks."""

from __future__ import annotations

import contextlib
import math
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from ..calculus.syntax import Prop, prop_vars
from .encoding import Forest, TreeArrays, Vocabulary, canonical_query, tree_arrays
from .model import (Batch, ParameterStore, PathBatch, cross_entropy, forward,
                    is_bias, loss_and_grads, path_key, softmax)


class NonFiniteLossError(FloatingPointError):
    """Training diverged: the loss is NaN or infinite."""


@dataclass(frozen=True)
class Hyper:
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0001


# ---------------------------------------------------------------------------
# Encoding queries into batches


@dataclass(frozen=True)
class EncodedQuery:
    goal_key: object
    goal_tree: TreeArrays
    obligation_key: object
    obligation_tree: Optional[TreeArrays]
    path: tuple
    label: int = -1


class QueryEncoder:
    """Turns (goal, path, obligation) queries into tree arrays, with caching."""

    def __init__(self, vocab: dict[str, int]):
        self.vocab = Vocabulary(dict(vocab))
        self._trees: dict = {}

    def _tree(self, p: Prop, f: dict[str, int]):
        key = (p, tuple(f[n] for n in prop_vars(p)))
        tree = self._trees.get(key)
        if tree is None:
            tree = self._trees[key] = tree_arrays(p, f)
        return key, tree

    def encode(self, goal: Prop, path, obligation: Optional[Prop],
               label: int = -1) -> EncodedQuery:
        g, q = canonical_query(goal, obligation)
        names = list(dict.fromkeys(prop_vars(g) + (prop_vars(q) if q is not None else [])))
        f = self.vocab.f_values(names)
        gkey, gtree = self._tree(g, f)
        if q is None:
            qkey, qtree = None, None
        else:
            qkey, qtree = self._tree(q, f)
        return EncodedQuery(gkey, gtree, qkey, qtree, path_key(path), int(label))

    def encode_quadruples(self, quads: Iterable) -> list[EncodedQuery]:
        return [self.encode(q.goal, q.path, q.obligation, int(q.rule)) for q in quads]


def make_batch(queries: Sequence[EncodedQuery], with_obligations: bool = True) -> Batch:
    goal_ids: dict = {}
    goal_trees = []
    obl_ids: dict = {}
    obl_trees = []
    gi, oi = [], []
    for e in queries:
        if e.goal_key not in goal_ids:
            goal_ids[e.goal_key] = len(goal_trees)
            goal_trees.append(e.goal_tree)
        gi.append(goal_ids[e.goal_key])
        if with_obligations:
            if e.obligation_tree is None:
                raise ValueError("query without an obligation")
            if e.obligation_key not in obl_ids:
                obl_ids[e.obligation_key] = len(obl_trees)
                obl_trees.append(e.obligation_tree)
            oi.append(obl_ids[e.obligation_key])
    labels = np.array([e.label for e in queries], dtype=np.int64)
    return Batch(Forest(goal_trees), Forest(obl_trees) if with_obligations else None,
                 np.array(gi, dtype=np.int64), np.array(oi, dtype=np.int64),
                 PathBatch([e.path for e in queries]), labels)


def vocabulary_from(quads: Iterable) -> dict[str, int]:
    return Vocabulary.from_queries((q.goal, q.obligation) for q in quads).numbers


# ---------------------------------------------------------------------------
# Optimisation


def adam_update(store: ParameterStore, grads: dict, hyper: Hyper = Hyper()) -> None:
    """One Adam step with weight decay added to the gradients of weights."""
    store.step += 1
    t = store.step
    c1 = 1.0 - hyper.beta1 ** t
    c2 = 1.0 - hyper.beta2 ** t
    for name, w in store.params.items():
        g = grads[name]
        if hyper.weight_decay and not is_bias(name):
            g = g + hyper.weight_decay * w
        m = store.m[name]
        v = store.v[name]
        m *= hyper.beta1
        m += (1.0 - hyper.beta1) * g
        v *= hyper.beta2
        v += (1.0 - hyper.beta2) * g * g
        w -= hyper.alpha * (m / c1) / (np.sqrt(v / c2) + hyper.eps)


def train_step(store: ParameterStore, batch: Batch, hyper: Hyper = Hyper()) -> float:
    """Gradient step on one batch (in place); returns the batch loss before the step."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    loss, grads = loss_and_grads(store, batch)
    if not math.isfinite(loss):
        raise NonFiniteLossError(f"loss became {loss} at step {store.step + 1}")
    adam_update(store, grads, hyper)
    return loss


def predict_proba(store: ParameterStore, queries: Sequence[EncodedQuery],
                  batch_size: int = 2048) -> np.ndarray:
    out = []
    with_obl = not store.config.obligation_free
    for s in range(0, len(queries), batch_size):
        logits, _ = forward(store, make_batch(queries[s:s + batch_size], with_obl))
        out.append(softmax(logits))
    return np.vstack(out) if out else np.zeros((0, 8))


def accuracy(store: ParameterStore, queries: Sequence[EncodedQuery]) -> float:
    """Fraction of queries whose most likely rule (first in rule order on ties) is the label."""
    if not queries:
        return float("nan")
    pred = predict_proba(store, queries).argmax(axis=1)
    labels = np.array([e.label for e in queries])
    return float((pred == labels).mean())


def mean_loss(store: ParameterStore, queries: Sequence[EncodedQuery]) -> float:
    probs = predict_proba(store, queries)
    labels = np.array([e.label for e in queries])
    return float(-np.log(probs[np.arange(len(labels)), labels]).mean())


@contextlib.contextmanager
def deterministic_threads(enabled: bool = True):
    """Limit BLAS to one thread so reductions happen in a fixed order."""
    if enabled:
        with threadpool_limits(limits=1):
            yield
    else:
        yield


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    validation_accuracy: float

    def line(self) -> str:
        return f"epoch {self.epoch} loss {self.loss:.6f} val_acc {self.validation_accuracy:.4f}"


def train(store: ParameterStore, train_quads: Sequence, validation_quads: Sequence = (),
          epochs: int = 10, batch_size: int = 1000, seed: int = 0,
          hyper: Hyper = Hyper(), log: Optional[Callable[[str], None]] = None,
          deterministic: bool = True) -> list[EpochRecord]:
    """Train ``store`` in place.  Batches come from a seeded shuffle per epoch;
    the last partial batch is kept.  Writes one log line per epoch."""
    if not store.vocab:
        store.vocab = vocabulary_from(train_quads)
    enc = QueryEncoder(store.vocab)
    tr = enc.encode_quadruples(train_quads)
    va = enc.encode_quadruples(validation_quads)
    with_obl = not store.config.obligation_free
    rng = random.Random(seed)
    history = []
    with deterministic_threads(deterministic):
        for epoch in range(1, epochs + 1):
            order = list(range(len(tr)))
            rng.shuffle(order)
            total, count = 0.0, 0
            for s in range(0, len(order), batch_size):
                chunk = [tr[i] for i in order[s:s + batch_size]]
                loss = train_step(store, make_batch(chunk, with_obl), hyper)
                total += loss * len(chunk)
                count += len(chunk)
            acc = accuracy(store, va) if va else float("nan")
            rec = EpochRecord(epoch, total / max(count, 1), acc)
            history.append(rec)
            if log is not None:
                log(rec.line())
    return history


# ---------------------------------------------------------------------------
# Gradient checking


def _default_check_quads(seed: int, n: int = 3):
    from ..datasetgen import extract_quadruples, small_proof_gen
    quads = extract_quadruples(small_proof_gen(5))
    return random.Random(seed).sample(quads, n)


def grad_check(config, seed: int, quads: Optional[Sequence] = None,
               store: Optional[ParameterStore] = None, step: float = 1e-5,
               floor: float = 1e-6, bias_jitter: float = 0.1) -> float:
    """Largest relative gap between analytic and central-difference gradients.

    Every parameter entry is perturbed.  With zero biases a rectifier whose
    inputs all vanish sits exactly on its kink, where the loss has no
    derivative, so a fresh store gets biases drawn with std ``bias_jitter``
    first (pass 0 to keep them).  The relative error of an entry is
    ``|a - n| / max(|a|, |n|, floor)``; the floor keeps entries whose true
    gradient is (numerically) zero from dominating.
    """
    from .model import init
    if quads is None:
        quads = _default_check_quads(seed)
    if store is None:
        store = init(config, seed, vocabulary_from(quads))
        rng = np.random.default_rng(seed)
        for name in sorted(store.params):
            if is_bias(name) and bias_jitter:
                store.params[name] += rng.normal(0.0, bias_jitter, store.params[name].shape)
    enc = QueryEncoder(store.vocab)
    batch = make_batch(enc.encode_quadruples(quads), not store.config.obligation_free)
    with deterministic_threads():
        _, grads = loss_and_grads(store, batch)
        worst = 0.0
        for name, w in store.params.items():
            flat = w.reshape(-1)
            g = grads[name].reshape(-1)
            for k in range(flat.size):
                old = flat[k]
                flat[k] = old + step
                up = cross_entropy(forward(store, batch)[0], batch.labels)[0]
                flat[k] = old - step
                down = cross_entropy(forward(store, batch)[0], batch.labels)[0]
                flat[k] = old
                num = (up - down) / (2 * step)
                err = abs(g[k] - num) / max(abs(g[k]), abs(num), floor)
                worst = max(worst, err)
    return worst
