"""Shallow classifiers on the flattened 310-dim features, plus metrics.

All three trainers share the same Adam/mini-batch protocol and seedable
initialization; gradients are written out by hand so they can be verified
against finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    DimensionMismatch,
    FocusLabel,
    NonFiniteLoss,
    RunMetrics,
    SingleClassAUC,
)

INPUT_DIM = 310
STD_FLOOR = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 64
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    hidden: tuple[int, int] = (128, 32)  # MLP only
    input_dim: int = INPUT_DIM

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray  # floored at STD_FLOOR

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std


def fit_standardizer(train_x: np.ndarray) -> Standardizer:
    """Per-dimension mean/std fitted on the training split only."""
    mean = train_x.mean(axis=0)
    std = np.maximum(train_x.std(axis=0), STD_FLOOR)
    return Standardizer(mean, std)


def _init_uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class _Adam:
    def __init__(self, params: list[np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        c = self.cfg
        self.t += 1
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = c.beta1 * self.m[i] + (1 - c.beta1) * g
            self.v[i] = c.beta2 * self.v[i] + (1 - c.beta2) * g * g
            m_hat = self.m[i] / (1 - c.beta1**self.t)
            v_hat = self.v[i] / (1 - c.beta2**self.t)
            p -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.adam_eps)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_dim(x: np.ndarray, dim: int) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != dim:
        raise DimensionMismatch(f"expected {dim} features, got {x.shape[1]}")
    return x


@dataclass
class LinearModel:
    """Logistic regression or linear SVM, depending on the loss used to fit it."""

    kind: str  # "logreg" | "svm"
    w: np.ndarray
    b: float

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim(x, len(self.w))
        return x @ self.w + self.b

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        # SVM scores go through a sigmoid purely for AUC ranking.
        return _sigmoid(self.scores(x))


@dataclass
class MlpModel:
    layers: list[tuple[np.ndarray, np.ndarray]]  # [(W, b), ...]

    def forward(self, x: np.ndarray):
        x = _check_dim(x, self.layers[0][0].shape[0])
        acts = [x]
        h = x
        for i, (w, b) in enumerate(self.layers):
            z = h @ w + b
            h = np.maximum(z, 0.0) if i < len(self.layers) - 1 else z
            acts.append(h)
        return acts

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        logits = self.forward(x)[-1]
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        probs = e / e.sum(axis=1, keepdims=True)
        return probs[:, FocusLabel.FOCUSED]


def logreg_loss_grad(w, b, x, y):
    """Mean cross-entropy of sigmoid(x@w + b) against y in {0,1}."""
    z = x @ w + b
    p = _sigmoid(z)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    diff = (p - y) / len(y)
    return loss, x.T @ diff, float(diff.sum())


def svm_loss_grad(w, b, x, y):
    """Mean hinge loss with labels mapped to {-1, +1}."""
    s = x @ w + b
    ypm = 2.0 * y - 1.0
    margin = 1.0 - ypm * s
    active = margin > 0
    loss = float(np.mean(np.maximum(margin, 0.0)))
    coeff = np.where(active, -ypm, 0.0) / len(y)
    return loss, x.T @ coeff, float(coeff.sum())


def mlp_loss_grads(layers, x, y):
    """Softmax cross-entropy loss and gradients for every (W, b)."""
    acts = [x]
    h = x
    pre = []
    for i, (w, b) in enumerate(layers):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i < len(layers) - 1 else z
        acts.append(h)
    logits = acts[-1]
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    n = len(y)
    yi = y.astype(np.int64)
    loss = float(-np.mean(np.log(probs[np.arange(n), yi] + 1e-12)))

    delta = probs.copy()
    delta[np.arange(n), yi] -= 1.0
    delta /= n
    grads = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ layers[i][0].T) * (pre[i - 1] > 0)
    return loss, grads


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _guard(loss: float) -> None:
    if not np.isfinite(loss):
        raise NonFiniteLoss(f"loss diverged: {loss}")


def train_logreg(x: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> LinearModel:
    x = _check_dim(x, cfg.input_dim)
    rng = np.random.default_rng(cfg.seed)
    w = _init_uniform(rng, cfg.input_dim, cfg.input_dim)
    b = np.zeros(1)
    opt = _Adam([w, b], cfg)
    for _ in range(cfg.epochs):
        for idx in _batches(len(x), cfg.batch_size, rng):
            loss, gw, gb = logreg_loss_grad(w, b[0], x[idx], y[idx])
            _guard(loss)
            opt.step([w, b], [gw, np.array([gb])])
    return LinearModel("logreg", w, float(b[0]))


def train_svm(x: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> LinearModel:
    x = _check_dim(x, cfg.input_dim)
    rng = np.random.default_rng(cfg.seed)
    w = _init_uniform(rng, cfg.input_dim, cfg.input_dim)
    b = np.zeros(1)
    opt = _Adam([w, b], cfg)
    for _ in range(cfg.epochs):
        for idx in _batches(len(x), cfg.batch_size, rng):
            loss, gw, gb = svm_loss_grad(w, b[0], x[idx], y[idx])
            _guard(loss)
            opt.step([w, b], [gw, np.array([gb])])
    return LinearModel("svm", w, float(b[0]))


def train_mlp(x: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> MlpModel:
    x = _check_dim(x, cfg.input_dim)
    rng = np.random.default_rng(cfg.seed)
    dims = [cfg.input_dim, *cfg.hidden, 2]
    layers = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        layers.append(
            (
                _init_uniform(rng, fan_in, (fan_in, fan_out)),
                _init_uniform(rng, fan_in, fan_out),
            )
        )
    flat = [a for pair in layers for a in pair]
    opt = _Adam(flat, cfg)
    for _ in range(cfg.epochs):
        for idx in _batches(len(x), cfg.batch_size, rng):
            loss, grads = mlp_loss_grads(layers, x[idx], y[idx])
            _guard(loss)
            opt.step(flat, [g for pair in grads for g in pair])
    return MlpModel(layers)


TRAINERS = {"logreg": train_logreg, "svm": train_svm, "mlp": train_mlp}


def train_model(kind: str, x: np.ndarray, y: np.ndarray, cfg: TrainConfig):
    if kind not in TRAINERS:
        raise ValueError(f"unknown model kind {kind!r}")
    return TRAINERS[kind](x, y, cfg)


def config_for_dim(cfg: TrainConfig, dim: int) -> TrainConfig:
    return replace(cfg, input_dim=dim)


def auc_mann_whitney(labels: np.ndarray, scores: np.ndarray) -> float:
    """Rank-based AUC; ties contribute one half."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    pos = labels == FocusLabel.FOCUSED
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassAUC("AUC undefined: only one class present")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    rank = 1
    while i < len(sorted_scores):
        j = i
        while j + 1 < len(sorted_scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        avg = (rank + rank + (j - i)) / 2.0
        ranks[order[i : j + 1]] = avg
        rank += j - i + 1
        i = j + 1
    rank_sum_pos = float(ranks[pos].sum())
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def compute_metrics(labels: np.ndarray, probabilities: np.ndarray) -> RunMetrics:
    """Accuracy, F1 (positive class = Focused), tie-corrected AUC, confusion."""
    labels = np.asarray(labels)
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if len(labels) == 0 or len(labels) != len(probabilities):
        raise DimensionMismatch("labels and probabilities must have equal nonzero length")
    pred = (probabilities >= 0.5).astype(np.int64)
    truth = (labels == FocusLabel.FOCUSED).astype(np.int64)
    tp = int(np.sum((truth == 1) & (pred == 1)))
    fn = int(np.sum((truth == 1) & (pred == 0)))
    fp = int(np.sum((truth == 0) & (pred == 1)))
    tn = int(np.sum((truth == 0) & (pred == 0)))
    accuracy = (tp + tn) / len(labels)
    denom = 2 * tp + fp + fn
    f1 = 2 * tp / denom if denom > 0 else 0.0
    try:
        auc = auc_mann_whitney(labels, probabilities)
    except SingleClassAUC:
        auc = None
    return RunMetrics(accuracy, f1, auc, tp, fn, fp, tn)


def save_model(model, path) -> None:
    """Versioned flat text format: shape header + row-major decimal parameters."""
    with open(path, "w", encoding="utf-8") as fh:
        if isinstance(model, LinearModel):
            fh.write(f"focuspipe-model-v1 {model.kind} {len(model.w)}\n")
            for v in model.w:
                fh.write(f"{v:.17g}\n")
            fh.write(f"{model.b:.17g}\n")
        elif isinstance(model, MlpModel):
            dims = [model.layers[0][0].shape[0]] + [w.shape[1] for w, _ in model.layers]
            fh.write("focuspipe-model-v1 mlp " + " ".join(map(str, dims)) + "\n")
            for w, b in model.layers:
                for v in w.reshape(-1):
                    fh.write(f"{v:.17g}\n")
                for v in b:
                    fh.write(f"{v:.17g}\n")
        else:
            raise TypeError(f"cannot save {type(model)!r}")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if not header or header[0] != "focuspipe-model-v1":
            raise SchemaError(f"{path}: not a focuspipe model file")
        kind = header[1]
        values = [float(line) for line in fh if line.strip()]
    if kind in ("logreg", "svm"):
        dim = int(header[2])
        return LinearModel(kind, np.array(values[:dim]), values[dim])
    if kind == "mlp":
        dims = [int(d) for d in header[2:]]
        layers = []
        pos = 0
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            w = np.array(values[pos : pos + fan_in * fan_out]).reshape(fan_in, fan_out)
            pos += fan_in * fan_out
            b = np.array(values[pos : pos + fan_out])
            pos += fan_out
            layers.append((w, b))
        return MlpModel(layers)
    raise ValueError(f"unknown model kind {kind!r}")


class SchemaError(Exception):
    pass
