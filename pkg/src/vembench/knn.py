"""Parameter-free evaluation by K-nearest-neighbor classification.

Three protocol modes exist. `uniform` and `video` classify one video-level
vector per record (a record's clip embeddings averaged; on single-clip sets
that vector is the uniform embedding itself). `clip` lets every query clip
cast k votes from its own nearest training clips and sums the votes across
the video's clips.

Search is exact brute force, read-only over both sets and chunked per query
record, with fully deterministic tie-breaking: equidistant neighbors resolve
to the smallest training ordinal, vote ties to the smallest class index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from vembench.plan import aggregate_clip_embeddings
from vembench.store import EmbeddingSet, pool_tokens

MODES = ("uniform", "clip", "video")


@dataclass
class KnnConfig:
    k: int = 20
    metric: str = "cosine"  # cosine | l2
    mode: str = "video"  # uniform | clip | video
    clip_length_sec: float = 2.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.metric not in ("cosine", "l2"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.clip_length_sec <= 0:
            raise ValueError("clip_length_sec must be positive")


def _record_clips(es: EmbeddingSet, rec) -> np.ndarray:
    """[M, dim] float64 clip matrix (tokens mean-pooled for patch sets)."""
    return pool_tokens(es.block(rec)).astype(np.float64)


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return x / norms


class _TrainIndex:
    """Flat brute-force index over a training set, per protocol mode."""

    def __init__(self, train: EmbeddingSet, cfg: KnnConfig):
        if len(train) == 0:
            raise ValueError("empty training set")
        labels = train.labels()
        video_vecs = np.stack(
            [aggregate_clip_embeddings(_record_clips(train, r)) for r in train.records]
        )
        clip_vecs, clip_labels = [], []
        for rec, lab in zip(train.records, labels):
            clips = _record_clips(train, rec)
            clip_vecs.append(clips)
            clip_labels.extend([lab] * clips.shape[0])
        self.cfg = cfg
        self.n_classes = train.n_classes
        self.video_vecs = self._prep(video_vecs)
        self.video_labels = labels
        self.clip_vecs = self._prep(np.concatenate(clip_vecs, axis=0))
        self.clip_labels = np.asarray(clip_labels, dtype=np.int64)

    def _prep(self, x: np.ndarray) -> np.ndarray:
        return _normalize_rows(x) if self.cfg.metric == "cosine" else x

    def _distances(self, queries: np.ndarray, base: np.ndarray) -> np.ndarray:
        """[Q, N] distances; cosine = -dot on normalized rows, l2 = squared
        euclidean. Both preserve neighbor ordering and ties."""
        q = self._prep(queries)
        if self.cfg.metric == "cosine":
            return -(q @ base.T)
        sq_q = np.sum(q * q, axis=1, keepdims=True)
        sq_b = np.sum(base * base, axis=1)
        return np.maximum(sq_q - 2.0 * (q @ base.T) + sq_b, 0.0)

    def _effective_k(self, n: int) -> int:
        if self.cfg.k > n:
            warnings.warn(
                f"k={self.cfg.k} exceeds {n} training items; clamping to {n}",
                stacklevel=3,
            )
            return n
        return self.cfg.k

    def votes(self, queries: np.ndarray, level: str) -> np.ndarray:
        """[Q, C] neighbor-vote counts for query rows at the given level."""
        base = self.video_vecs if level == "video" else self.clip_vecs
        labels = self.video_labels if level == "video" else self.clip_labels
        k = self._effective_k(base.shape[0])
        dist = self._distances(queries, base)
        out = np.zeros((queries.shape[0], self.n_classes), dtype=np.int64)
        for qi in range(queries.shape[0]):
            # stable sort: equidistant neighbors resolve to the smallest ordinal
            neighbors = np.argsort(dist[qi], kind="stable")[:k]
            out[qi] = np.bincount(labels[neighbors], minlength=self.n_classes)
        return out


def _classify_block(index: _TrainIndex, clips: np.ndarray, mode: str) -> int:
    """Predict one class index for a query video given its [M, dim] clips."""
    if mode in ("uniform", "video"):
        votes = index.votes(aggregate_clip_embeddings(clips)[None, :], "video")[0]
    else:  # clip mode: each clip votes with its own neighbors, votes are summed
        votes = index.votes(clips, "clip").sum(axis=0)
    return int(np.argmax(votes))  # argmax takes the smallest class on ties


def knn_classify(train: EmbeddingSet, query_block: np.ndarray, cfg: KnnConfig) -> int:
    """Class index for one query record block ([M, tokens, dim] or [M, dim])."""
    block = np.asarray(query_block, dtype=np.float64)
    if block.ndim == 3:
        clips = pool_tokens(block).astype(np.float64)
    elif block.ndim == 2:
        clips = block
    else:
        raise ValueError("query block must be [M, tokens, dim] or [M, dim]")
    return _classify_block(_TrainIndex(train, cfg), clips, cfg.mode)


def knn_evaluate(train: EmbeddingSet, eval_set: EmbeddingSet, cfg: KnnConfig) -> dict:
    """Top-1 accuracy over the evaluation videos for the configured mode."""
    if train.class_names != eval_set.class_names:
        raise ValueError("class names differ between train and eval sets")
    index = _TrainIndex(train, cfg)
    labels = eval_set.labels()
    preds = np.empty(len(eval_set), dtype=np.int64)
    for i, rec in enumerate(eval_set.records):
        preds[i] = _classify_block(index, _record_clips(eval_set, rec), cfg.mode)
    top1 = 100.0 * float(np.mean(preds == labels))
    return {"mode": cfg.mode, "k": cfg.k, "metric": cfg.metric, "top1": top1,
            "predictions": preds}


def knn_evaluate_all_modes(train: EmbeddingSet, eval_set: EmbeddingSet,
                           cfg: KnnConfig) -> dict:
    """Top-1 for every protocol mode, sharing one training index."""
    if train.class_names != eval_set.class_names:
        raise ValueError("class names differ between train and eval sets")
    index = _TrainIndex(train, cfg)
    labels = eval_set.labels()
    results = {}
    for mode in MODES:
        preds = np.empty(len(eval_set), dtype=np.int64)
        for i, rec in enumerate(eval_set.records):
            preds[i] = _classify_block(index, _record_clips(eval_set, rec), mode)
        results[mode] = {
            "top1": 100.0 * float(np.mean(preds == labels)),
            "predictions": preds,
        }
    return results
