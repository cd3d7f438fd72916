"""Tree-convolution rule classifier with hand-written backpropagation.

The network reads a goal proposition P, a path into the proof under
construction and the obligation Q of the node at that path, and scores the
eight inference rules:

    v_P   = Agg1(conv3(conv2(conv1(Enc(P)))))
    v_Pr  = Extract(path, v_P)
    v_Q   = Agg2(conv4(Enc(Q)))
    probs = softmax(FC3(relu(FC2(relu(FC1([v_Pr; v_Q]))))))

Everything is evaluated over a *forest*: all trees of a mini-batch are
concatenated so each layer is one matrix product per node class.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..calculus.syntax import ARITY, CONSTRUCTOR_RULES, RULES
from .encoding import CLASS_ARITY, NODE_CLASSES, Forest

N_RULES = len(RULES)
# (rule, child index) pairs that can appear on a path.
EXTRACT_KEYS = tuple((r, i) for r in CONSTRUCTOR_RULES for i in range(ARITY[r]))
EXTRACT_INDEX = {k: n for n, k in enumerate(EXTRACT_KEYS)}


@dataclass(frozen=True)
class ModelConfig:
    conv_dims: tuple = (4, 32, 64, 64)
    obligation_dims: tuple = (4, 16)
    fc_dims: tuple = (64, 64)
    obligation_free: bool = False

    def __post_init__(self):
        object.__setattr__(self, "conv_dims", tuple(int(d) for d in self.conv_dims))
        object.__setattr__(self, "obligation_dims", tuple(int(d) for d in self.obligation_dims))
        object.__setattr__(self, "fc_dims", tuple(int(d) for d in self.fc_dims))
        if self.conv_dims[0] != 4 or self.obligation_dims[0] != 4:
            raise ValueError("node encodings are 4-dimensional")
        if len(self.conv_dims) != 4 or len(self.obligation_dims) != 2 or len(self.fc_dims) != 2:
            raise ValueError("expected three goal convolutions, one obligation "
                             "convolution and two hidden fully connected layers")

    @classmethod
    def full_scale(cls, obligation_free: bool = False) -> "ModelConfig":
        """The widths used for the published experiments."""
        return cls((4, 200, 500, 1000), (4, 16), (1016, 1016), obligation_free)

    @property
    def goal_dim(self) -> int:
        return self.conv_dims[-1]

    @property
    def obligation_dim(self) -> int:
        return 0 if self.obligation_free else self.obligation_dims[-1]

    @property
    def fc_layer_dims(self) -> tuple:
        return (self.goal_dim + self.obligation_dim,) + self.fc_dims + (N_RULES,)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(tuple(d["conv_dims"]), tuple(d["obligation_dims"]),
                   tuple(d["fc_dims"]), bool(d["obligation_free"]))


def _tree_layer_shapes(prefix: str, n_in: int, n_out: int, with_parent: bool) -> dict:
    shapes = {}
    for cls in NODE_CLASSES:
        shapes[f"{prefix}.{cls}.self"] = (n_out, n_in)
        if with_parent:
            shapes[f"{prefix}.{cls}.parent"] = (n_out, n_in)
        for i in range(CLASS_ARITY[cls]):
            # Aggregation children carry already aggregated vectors (n_out wide).
            shapes[f"{prefix}.{cls}.child{i}"] = (n_out, n_in if with_parent else n_out)
        shapes[f"{prefix}.{cls}.bias"] = (n_out,)
    return shapes


def parameter_shapes(config: ModelConfig) -> dict[str, tuple]:
    shapes: dict[str, tuple] = {}
    d = config.conv_dims
    for layer in range(1, 4):
        shapes.update(_tree_layer_shapes(f"conv{layer}", d[layer - 1], d[layer], True))
    shapes.update(_tree_layer_shapes("agg", d[3], d[3], False))
    for rule, i in EXTRACT_KEYS:
        shapes[f"ext.{rule.name}.{i}.weight"] = (d[3], d[3])
        shapes[f"ext.{rule.name}.{i}.bias"] = (d[3],)
    shapes["ext.final.weight"] = (d[3], d[3])
    shapes["ext.final.bias"] = (d[3],)
    if not config.obligation_free:
        e = config.obligation_dims
        shapes.update(_tree_layer_shapes("oconv", e[0], e[1], True))
        shapes.update(_tree_layer_shapes("oagg", e[1], e[1], False))
    fc = config.fc_layer_dims
    for k in range(3):
        shapes[f"fc{k + 1}.weight"] = (fc[k + 1], fc[k])
        shapes[f"fc{k + 1}.bias"] = (fc[k + 1],)
    return shapes


def is_bias(name: str) -> bool:
    return name.endswith("bias")


@dataclass
class ParameterStore:
    """Named parameter arrays plus Adam moments and the variable vocabulary."""

    config: ModelConfig
    params: dict[str, np.ndarray]
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0
    vocab: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, w in self.params.items():
            self.m.setdefault(name, np.zeros_like(w))
            self.v.setdefault(name, np.zeros_like(w))

    def copy(self) -> "ParameterStore":
        return ParameterStore(self.config,
                              {k: w.copy() for k, w in self.params.items()},
                              {k: w.copy() for k, w in self.m.items()},
                              {k: w.copy() for k, w in self.v.items()},
                              self.step, dict(self.vocab))

    def n_parameters(self) -> int:
        return sum(w.size for w in self.params.values())


def init(config: ModelConfig, seed: int, vocab: Optional[dict] = None) -> ParameterStore:
    """Gaussian weights with std sqrt(1/fan_in), zero biases, zero moments."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in sorted(parameter_shapes(config).items()):
        if is_bias(name):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.normal(0.0, np.sqrt(1.0 / shape[1]), size=shape)
    return ParameterStore(config, params, vocab=dict(vocab or {}))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Layers.  Each forward returns (output, cache); each backward accumulates
# parameter gradients into ``grads`` and returns the input gradient.


def ast_conv(params: dict, prefix: str, forest: Forest, x: np.ndarray):
    """One simultaneous convolution step over every node of the forest."""
    n = forest.n_nodes
    xp = np.vstack([x, np.zeros((1, x.shape[1]))])
    n_out = params[f"{prefix}.var.bias"].shape[0]
    pre = np.empty((n, n_out))
    for c, idx in forest.by_class:
        cls = NODE_CLASSES[c]
        z = xp[idx] @ params[f"{prefix}.{cls}.self"].T
        z += xp[forest.parent[idx]] @ params[f"{prefix}.{cls}.parent"].T
        for i in range(CLASS_ARITY[cls]):
            z += xp[forest.child[idx, i]] @ params[f"{prefix}.{cls}.child{i}"].T
        z += params[f"{prefix}.{cls}.bias"]
        pre[idx] = z
    return relu(pre), (xp, pre)


def ast_conv_backward(params: dict, prefix: str, forest: Forest, cache, dout, grads):
    xp, pre = cache
    dpre = dout * (pre > 0)
    dxp = np.zeros_like(xp)
    for c, idx in forest.by_class:
        cls = NODE_CLASSES[c]
        g = dpre[idx]
        w = params[f"{prefix}.{cls}.self"]
        grads[f"{prefix}.{cls}.self"] += g.T @ xp[idx]
        dxp[idx] += g @ w
        par = forest.parent[idx]
        w = params[f"{prefix}.{cls}.parent"]
        grads[f"{prefix}.{cls}.parent"] += g.T @ xp[par]
        np.add.at(dxp, par, g @ w)
        for i in range(CLASS_ARITY[cls]):
            ch = forest.child[idx, i]
            w = params[f"{prefix}.{cls}.child{i}"]
            grads[f"{prefix}.{cls}.child{i}"] += g.T @ xp[ch]
            dxp[ch] += g @ w
        grads[f"{prefix}.{cls}.bias"] += g.sum(axis=0)
    return dxp[:-1]


def aggregate(params: dict, prefix: str, forest: Forest, x: np.ndarray):
    """Bottom-up fold of every tree into one vector at its root."""
    n, dim = x.shape
    a = np.zeros((n + 1, dim))
    pres = []
    for c, idx in forest.levels:
        cls = NODE_CLASSES[c]
        z = x[idx] @ params[f"{prefix}.{cls}.self"].T
        for i in range(CLASS_ARITY[cls]):
            z += a[forest.child[idx, i]] @ params[f"{prefix}.{cls}.child{i}"].T
        z += params[f"{prefix}.{cls}.bias"]
        a[idx] = relu(z)
        pres.append(z)
    return a[forest.roots], (x, a, pres)


def aggregate_backward(params: dict, prefix: str, forest: Forest, cache, droots, grads):
    x, a, pres = cache
    da = np.zeros_like(a)
    da[forest.roots] += droots
    dx = np.zeros_like(x)
    for (c, idx), z in zip(reversed(forest.levels), reversed(pres)):
        cls = NODE_CLASSES[c]
        g = da[idx] * (z > 0)
        grads[f"{prefix}.{cls}.self"] += g.T @ x[idx]
        dx[idx] += g @ params[f"{prefix}.{cls}.self"]
        for i in range(CLASS_ARITY[cls]):
            ch = forest.child[idx, i]
            w = params[f"{prefix}.{cls}.child{i}"]
            grads[f"{prefix}.{cls}.child{i}"] += g.T @ a[ch]
            da[ch] += g @ w
        grads[f"{prefix}.{cls}.bias"] += g.sum(axis=0)
    return dx


class PathBatch:
    """Paths of a batch as per-step groups of rows sharing a (rule, child) key."""

    def __init__(self, keys: list[tuple[int, ...]]):
        self.n = len(keys)
        depth = max((len(k) for k in keys), default=0)
        self.steps = []
        for j in range(depth):
            groups: dict[int, list[int]] = {}
            for row, k in enumerate(keys):
                if j < len(k):
                    groups.setdefault(k[j], []).append(row)
            self.steps.append([(EXTRACT_KEYS[g], np.array(rows))
                               for g, rows in sorted(groups.items())])


def path_key(path) -> tuple[int, ...]:
    return tuple(EXTRACT_INDEX[(ctx.rule, i)] for ctx, i in path)


def extract(params: dict, paths: PathBatch, v: np.ndarray):
    """Walk each vector down its path, then apply the final affine map."""
    h = v
    hs, pres = [], []
    for groups in paths.steps:
        hs.append(h)
        h = h.copy()
        step_pres = []
        for (rule, i), rows in groups:
            z = hs[-1][rows] @ params[f"ext.{rule.name}.{i}.weight"].T
            z += params[f"ext.{rule.name}.{i}.bias"]
            h[rows] = relu(z)
            step_pres.append(z)
        pres.append(step_pres)
    out = h @ params["ext.final.weight"].T + params["ext.final.bias"]
    return out, (hs, h, pres)


def extract_backward(params: dict, paths: PathBatch, cache, dout, grads):
    hs, h_last, pres = cache
    grads["ext.final.weight"] += dout.T @ h_last
    grads["ext.final.bias"] += dout.sum(axis=0)
    dh = dout @ params["ext.final.weight"]
    for groups, h_in, step_pres in zip(reversed(paths.steps), reversed(hs), reversed(pres)):
        dprev = dh.copy()
        for ((rule, i), rows), z in zip(groups, step_pres):
            g = dh[rows] * (z > 0)
            w = params[f"ext.{rule.name}.{i}.weight"]
            grads[f"ext.{rule.name}.{i}.weight"] += g.T @ h_in[rows]
            grads[f"ext.{rule.name}.{i}.bias"] += g.sum(axis=0)
            dprev[rows] = g @ w
        dh = dprev
    return dh


# ---------------------------------------------------------------------------
# Whole network on a batch


@dataclass
class Batch:
    """A mini-batch: goal trees, obligation trees and per-example indices."""

    goals: Forest
    obligations: Optional[Forest]
    goal_index: np.ndarray        # example -> goal tree
    obligation_index: np.ndarray  # example -> obligation tree
    paths: PathBatch
    labels: Optional[np.ndarray] = None

    def __len__(self):
        return self.paths.n


def forward(store: ParameterStore, batch: Batch):
    """Logits of every example, plus the cache needed by ``backward``."""
    p = store.params
    cfg = store.config
    f = batch.goals
    x1, c1 = ast_conv(p, "conv1", f, f.feat)
    x2, c2 = ast_conv(p, "conv2", f, x1)
    x3, c3 = ast_conv(p, "conv3", f, x2)
    v_goal, ca = aggregate(p, "agg", f, x3)
    v_path, ce = extract(p, batch.paths, v_goal[batch.goal_index])
    cache = {"c1": c1, "c2": c2, "c3": c3, "ca": ca, "ce": ce}
    if cfg.obligation_free:
        z = v_path
    else:
        o = batch.obligations
        y1, co = ast_conv(p, "oconv", o, o.feat)
        v_obl, coa = aggregate(p, "oagg", o, y1)
        z = np.hstack([v_path, v_obl[batch.obligation_index]])
        cache.update(co=co, coa=coa, n_obl=len(v_obl))
    h1pre = z @ p["fc1.weight"].T + p["fc1.bias"]
    h1 = relu(h1pre)
    h2pre = h1 @ p["fc2.weight"].T + p["fc2.bias"]
    h2 = relu(h2pre)
    logits = h2 @ p["fc3.weight"].T + p["fc3.bias"]
    cache.update(z=z, h1pre=h1pre, h1=h1, h2pre=h2pre, h2=h2, n_goal=len(v_goal))
    return logits, cache


def backward(store: ParameterStore, batch: Batch, cache, dlogits) -> dict[str, np.ndarray]:
    p = store.params
    cfg = store.config
    grads = {k: np.zeros_like(w) for k, w in p.items()}
    grads["fc3.weight"] += dlogits.T @ cache["h2"]
    grads["fc3.bias"] += dlogits.sum(axis=0)
    dh2 = (dlogits @ p["fc3.weight"]) * (cache["h2pre"] > 0)
    grads["fc2.weight"] += dh2.T @ cache["h1"]
    grads["fc2.bias"] += dh2.sum(axis=0)
    dh1 = (dh2 @ p["fc2.weight"]) * (cache["h1pre"] > 0)
    grads["fc1.weight"] += dh1.T @ cache["z"]
    grads["fc1.bias"] += dh1.sum(axis=0)
    dz = dh1 @ p["fc1.weight"]
    gd = cfg.goal_dim
    dv_path = dz[:, :gd]
    if not cfg.obligation_free:
        o = batch.obligations
        dv_obl = np.zeros((cache["n_obl"], cfg.obligation_dim))
        np.add.at(dv_obl, batch.obligation_index, dz[:, gd:])
        dy1 = aggregate_backward(p, "oagg", o, cache["coa"], dv_obl, grads)
        ast_conv_backward(p, "oconv", o, cache["co"], dy1, grads)
    f = batch.goals
    dv_sel = extract_backward(p, batch.paths, cache["ce"], dv_path, grads)
    dv_goal = np.zeros((cache["n_goal"], gd))
    np.add.at(dv_goal, batch.goal_index, dv_sel)
    dx3 = aggregate_backward(p, "agg", f, cache["ca"], dv_goal, grads)
    dx2 = ast_conv_backward(p, "conv3", f, cache["c3"], dx3, grads)
    dx1 = ast_conv_backward(p, "conv2", f, cache["c2"], dx2, grads)
    ast_conv_backward(p, "conv1", f, cache["c1"], dx1, grads)
    return grads


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood of ``labels`` and its gradient in the logits."""
    z = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logz
    b = len(labels)
    loss = -logp[np.arange(b), labels].mean()
    d = np.exp(logp)
    d[np.arange(b), labels] -= 1.0
    return float(loss), d / b


def loss_and_grads(store: ParameterStore, batch: Batch) -> tuple[float, dict]:
    logits, cache = forward(store, batch)
    loss, dlogits = cross_entropy(logits, batch.labels)
    return loss, backward(store, batch, cache, dlogits)
