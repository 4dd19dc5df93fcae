"""Linear and attentive probes over frozen embeddings.

The linear probe is a single affine layer trained with minibatch SGD plus
momentum under a cosine schedule. The attentive probe is one attention layer
with a learnable query (class) token over a record's patch tokens, followed
by an affine classifier, trained with AdamW. Gradients are analytic; tokens
are frozen inputs. Inference averages class probabilities over views.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from vembench import metrics
from vembench.numkit import LrSchedule, Rng, lr_at, softmax
from vembench.store import EmbeddingSet, pool_tokens


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 256
    warmup_epochs: int = 0
    lr: float = 0.001
    final_lr: float = 0.0
    weight_decay: float = 0.0
    momentum: float = 0.9
    optimizer: str = "sgd_momentum"  # sgd_momentum | adamw
    seed: int = 0
    views: tuple[int, int] = (1, 1)  # (m spatial, n temporal); provenance only here
    n_frames: int = 16
    temporal_stride: int = 1
    flip_augment: bool = False
    heads: int = 1  # attention heads for the attentive probe

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.optimizer not in ("sgd_momentum", "adamw"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class LinearHead:
    W: np.ndarray  # [C, d]
    b: np.ndarray  # [C]
    loss_trace: Optional[list[float]] = field(default=None, repr=False)

    def logits(self, x: np.ndarray) -> np.ndarray:
        return self.W @ np.asarray(x, dtype=np.float64) + self.b


@dataclass
class AttentiveHead:
    q: np.ndarray   # [d] learnable query token
    Wk: np.ndarray  # [d, d]
    Wv: np.ndarray  # [d, d]
    Wo: np.ndarray  # [d, d]
    Wc: np.ndarray  # [C, d]
    bc: np.ndarray  # [C]
    heads: int = 1
    loss_trace: Optional[list[float]] = field(default=None, repr=False)

    def __post_init__(self):
        d = self.q.shape[0]
        if self.heads < 1 or d % self.heads != 0:
            raise ValueError("d must be divisible by the head count")


# ---------------------------------------------------------------------------
# Attentive forward / backward
# ---------------------------------------------------------------------------

def attentive_forward(head: AttentiveHead, tokens: np.ndarray):
    """Logits and per-head attention weights for one token matrix [n, d]."""
    T = np.asarray(tokens, dtype=np.float64)
    if T.ndim != 2 or T.shape[1] != head.q.shape[0]:
        raise ValueError(
            f"tokens must be [n, {head.q.shape[0]}], got {T.shape}"
        )
    d = head.q.shape[0]
    H = head.heads
    dh = d // H
    K = T @ head.Wk  # [n, d]
    V = T @ head.Wv  # [n, d]
    attended = np.empty(d)
    attn = np.empty((H, T.shape[0]))
    for h in range(H):
        sl = slice(h * dh, (h + 1) * dh)
        scores = K[:, sl] @ head.q[sl] / math.sqrt(dh)
        a = softmax(scores)
        attn[h] = a
        attended[sl] = V[:, sl].T @ a
    o = attended @ head.Wo
    logits = head.Wc @ o + head.bc
    return logits, attn


def attentive_grad(head: AttentiveHead, tokens: np.ndarray, label: int):
    """Cross-entropy loss and analytic gradients for all parameters.

    Returns (loss, grads) with grads keyed 'q', 'Wk', 'Wv', 'Wo', 'Wc', 'bc'.
    """
    T = np.asarray(tokens, dtype=np.float64)
    d = head.q.shape[0]
    H = head.heads
    dh = d // H
    C = head.bc.shape[0]
    if not 0 <= label < C:
        raise ValueError(f"label {label} out of range for {C} classes")

    K = T @ head.Wk
    V = T @ head.Wv
    attended = np.empty(d)
    attns = []
    for h in range(H):
        sl = slice(h * dh, (h + 1) * dh)
        a = softmax(K[:, sl] @ head.q[sl] / math.sqrt(dh))
        attns.append(a)
        attended[sl] = V[:, sl].T @ a
    o = attended @ head.Wo
    logits = head.Wc @ o + head.bc

    p = softmax(logits)
    shifted = logits - logits.max()
    loss = float(np.log(np.exp(shifted).sum()) - shifted[label])

    dlogits = p.copy()
    dlogits[label] -= 1.0
    gWc = np.outer(dlogits, o)
    gbc = dlogits
    do = head.Wc.T @ dlogits
    gWo = np.outer(attended, do)
    dattended = head.Wo @ do

    gq = np.zeros(d)
    dK = np.zeros_like(K)
    dV = np.zeros_like(V)
    for h in range(H):
        sl = slice(h * dh, (h + 1) * dh)
        a = attns[h]
        dc = dattended[sl]
        da = V[:, sl] @ dc
        ds = a * (da - float(a @ da))  # softmax jacobian applied to da
        gq[sl] = K[:, sl].T @ ds / math.sqrt(dh)
        dK[:, sl] = np.outer(ds, head.q[sl]) / math.sqrt(dh)
        dV[:, sl] = np.outer(a, dc)
    gWk = T.T @ dK
    gWv = T.T @ dV

    return loss, {"q": gq, "Wk": gWk, "Wv": gWv, "Wo": gWo, "Wc": gWc, "bc": gbc}


# ---------------------------------------------------------------------------
# Training data access
# ---------------------------------------------------------------------------

def _pooled_clip_matrix(es: EmbeddingSet) -> list[np.ndarray]:
    """Per-record [M, d] float64 clip embeddings (patch tokens mean-pooled)."""
    return [pool_tokens(es.block(r)).astype(np.float64) for r in es.records]


def _epoch_clip_choice(rng: Rng, clip_counts: np.ndarray) -> np.ndarray:
    """One seeded clip index per video for this epoch (train_num_clips = 1)."""
    u = rng.uniform(len(clip_counts))
    return np.floor(u * clip_counts).astype(np.int64)


def _schedule(cfg: TrainConfig, steps_per_epoch: int) -> LrSchedule:
    return LrSchedule(
        base_lr=cfg.lr,
        final_lr=cfg.final_lr,
        warmup_steps=cfg.warmup_epochs * steps_per_epoch,
        total_steps=max(1, cfg.epochs * steps_per_epoch),
    )


# ---------------------------------------------------------------------------
# Linear probe
# ---------------------------------------------------------------------------

def train_linear_probe(train: EmbeddingSet, cfg: TrainConfig) -> LinearHead:
    """Train a linear classification head with minibatch SGD + momentum.

    Patch-level sets are mean-pooled first. One seeded random clip per
    (video, epoch) is the training sample; epoch order is reshuffled from
    cfg.seed. The mean minibatch loss per epoch is recorded on the head.
    """
    if cfg.optimizer != "sgd_momentum":
        raise ValueError("linear probing uses the sgd_momentum optimizer")
    if len(train) == 0:
        raise ValueError("empty training set")
    labels = train.labels()
    C = train.n_classes
    if labels.max() >= C:
        raise ValueError("label exceeds class count")
    clips = _pooled_clip_matrix(train)
    clip_counts = np.asarray([c.shape[0] for c in clips])
    d = train.dim
    n = len(clips)

    W = np.zeros((C, d))
    b = np.zeros(C)
    vW = np.zeros_like(W)
    vb = np.zeros_like(b)
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    sched = _schedule(cfg, steps_per_epoch)

    trace = []
    step = 0
    for epoch in range(cfg.epochs):
        rng = Rng(cfg.seed, stream=epoch + 1)
        choice = _epoch_clip_choice(rng, clip_counts)
        X = np.stack([clips[i][choice[i]] for i in range(n)])
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            xb, yb = X[batch], labels[batch]
            logits = xb @ W.T + b
            shifted = logits - logits.max(axis=1, keepdims=True)
            logz = np.log(np.exp(shifted).sum(axis=1))
            losses = logz - shifted[np.arange(len(batch)), yb]
            epoch_loss += float(losses.sum())

            p = softmax(logits)
            p[np.arange(len(batch)), yb] -= 1.0
            g = p / len(batch)
            gW = g.T @ xb + cfg.weight_decay * W
            gb = g.sum(axis=0)

            lr = lr_at(sched, step)
            vW = cfg.momentum * vW + gW
            vb = cfg.momentum * vb + gb
            W -= lr * vW
            b -= lr * vb
            step += 1
        trace.append(epoch_loss / n)

    return LinearHead(W=W, b=b, loss_trace=trace)


# ---------------------------------------------------------------------------
# Attentive probe
# ---------------------------------------------------------------------------

def init_attentive_head(dim: int, n_classes: int, heads: int, seed: int) -> AttentiveHead:
    """Parameters ~ Normal(0, std 0.02); classifier bias zero."""
    rng = Rng(seed, stream=0)
    std = 0.02

    def draw(*shape):
        return std * rng.normal(int(np.prod(shape))).reshape(shape)

    return AttentiveHead(
        q=draw(dim),
        Wk=draw(dim, dim),
        Wv=draw(dim, dim),
        Wo=draw(dim, dim),
        Wc=draw(n_classes, dim),
        bc=np.zeros(n_classes),
        heads=heads,
    )


_PARAMS = ("q", "Wk", "Wv", "Wo", "Wc", "bc")


def train_attentive_probe(train: EmbeddingSet, cfg: TrainConfig) -> AttentiveHead:
    """Train the attentive probe with AdamW under a cosine schedule."""
    if train.level != "patch":
        raise ValueError("attentive probing requires a patch-level set")
    if cfg.optimizer != "adamw":
        raise ValueError("attentive probing uses the adamw optimizer")
    if len(train) == 0:
        raise ValueError("empty training set")
    labels = train.labels()
    head = init_attentive_head(train.dim, train.n_classes, cfg.heads, cfg.seed)
    blocks = [train.block(r).astype(np.float64) for r in train.records]
    clip_counts = np.asarray([b.shape[0] for b in blocks])
    n = len(blocks)

    beta1, beta2, eps = 0.9, 0.999, 1e-8
    m_state = {k: np.zeros_like(getattr(head, k)) for k in _PARAMS}
    v_state = {k: np.zeros_like(getattr(head, k)) for k in _PARAMS}
    steps_per_epoch = math.ceil(n / cfg.batch_size)
    sched = _schedule(cfg, steps_per_epoch)

    trace = []
    step = 0
    for epoch in range(cfg.epochs):
        rng = Rng(cfg.seed, stream=epoch + 1)
        choice = _epoch_clip_choice(rng, clip_counts)
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            grads = {k: np.zeros_like(getattr(head, k)) for k in _PARAMS}
            for i in batch:  # fixed order: deterministic reduction
                tokens = blocks[i][choice[i]]
                loss, g = attentive_grad(head, tokens, int(labels[i]))
                epoch_loss += loss
                for k in _PARAMS:
                    grads[k] += g[k]
            scale = 1.0 / len(batch)

            lr = lr_at(sched, step)
            step += 1
            bias1 = 1.0 - beta1**step
            bias2 = 1.0 - beta2**step
            for k in _PARAMS:
                g = grads[k] * scale
                m_state[k] = beta1 * m_state[k] + (1 - beta1) * g
                v_state[k] = beta2 * v_state[k] + (1 - beta2) * g * g
                update = (m_state[k] / bias1) / (np.sqrt(v_state[k] / bias2) + eps)
                param = getattr(head, k)
                param -= lr * (update + cfg.weight_decay * param)
        trace.append(epoch_loss / n)

    head.loss_trace = trace
    return head


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------

def infer_multiview(head, views: list[np.ndarray], mode: str) -> np.ndarray:
    """Mean of softmax(logits) across views: the multi-view probability."""
    if not views:
        raise ValueError("at least one view is required")
    probs = []
    for v in views:
        if mode == "linear":
            probs.append(softmax(head.logits(v)))
        elif mode == "attentive":
            logits, _ = attentive_forward(head, v)
            probs.append(softmax(logits))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return np.mean(probs, axis=0)


def _record_views(es: EmbeddingSet, rec, mode: str) -> list[np.ndarray]:
    block = es.block(rec)
    if mode == "linear":
        return list(pool_tokens(block).astype(np.float64))
    return [block[c].astype(np.float64) for c in range(rec.clips)]


def evaluate_probe(head, eval_set: EmbeddingSet, cfg: TrainConfig) -> dict:
    """Top-1/top-5 and per-class accuracy from multi-view probabilities.

    Every stored clip of a record acts as one view (spatial views are
    realized at extraction time and appear here as extra clips).
    """
    mode = "linear" if isinstance(head, LinearHead) else "attentive"
    labels = eval_set.labels()
    C = eval_set.n_classes
    probs = np.stack(
        [
            infer_multiview(head, _record_views(eval_set, rec, mode), mode)
            for rec in eval_set.records
        ]
    )
    top1 = metrics.topk_accuracy(probs, labels, 1)
    top5 = metrics.topk_accuracy(probs, labels, min(5, C))
    preds = probs.argmax(axis=1)
    per_class = []
    for c in range(C):
        mask = labels == c
        per_class.append(
            100.0 * float(np.mean(preds[mask] == c)) if mask.any() else float("nan")
        )
    return {"top1": top1, "top5": top5, "per_class": per_class, "predictions": preds}


# ---------------------------------------------------------------------------
# Head serialization: JSON header + base64 float32 block in one file
# ---------------------------------------------------------------------------

def save_head(head, path, config_hash: str = "", seed: int = 0) -> None:
    if isinstance(head, LinearHead):
        kind, names = "linear", ("W", "b")
    elif isinstance(head, AttentiveHead):
        kind, names = "attentive", _PARAMS
    else:
        raise TypeError(f"cannot serialize {type(head).__name__}")
    arrays = [np.asarray(getattr(head, k), dtype=np.float32) for k in names]
    doc = {
        "kind": kind,
        "config_hash": config_hash,
        "seed": seed,
        "shapes": {k: list(a.shape) for k, a in zip(names, arrays)},
        "heads": getattr(head, "heads", 1),
        "data_b64": base64.b64encode(
            b"".join(a.tobytes(order="C") for a in arrays)
        ).decode("ascii"),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_head(path):
    with open(path) as fh:
        doc = json.load(fh)
    raw = base64.b64decode(doc["data_b64"])
    names = ("W", "b") if doc["kind"] == "linear" else _PARAMS
    arrays = {}
    off = 0
    for k in names:
        shape = tuple(doc["shapes"][k])
        count = int(np.prod(shape)) if shape else 1
        arrays[k] = (
            np.frombuffer(raw, dtype="<f4", count=count, offset=off)
            .reshape(shape)
            .astype(np.float64)
        )
        off += count * 4
    if doc["kind"] == "linear":
        return LinearHead(W=arrays["W"], b=arrays["b"])
    return AttentiveHead(heads=int(doc["heads"]), **arrays)
