"""Synthetic embedding sets with analytically known ground truth.

These generators are the oracles behind the acceptance suite: class-Gaussian
sets with a closed-form Bayes accuracy, paired forward/reversed sets with a
controllable directional-motion signal, and patch sets whose class signal
lives in a single token so that mean pooling destroys it.

Every generator is a pure function of its spec and seed; records draw from
independent counter-based streams so generation order never matters.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from vembench.numkit import Rng
from vembench.store import EmbeddingSet, EmbeddingSetBuilder


@dataclass
class SynthSpec:
    n_classes: int = 10
    dim: int = 64
    per_class: int = 200
    eval_per_class: int = 50
    separation: float = 5.0  # class-mean distance from center, in within-class sigmas
    clips_per_video: int = 1
    tokens: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least 2 classes")
        if self.separation < 0:
            raise ValueError("separation must be nonnegative")
        if self.dim < self.n_classes:
            raise ValueError("dim must be >= n_classes for the simplex construction")


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def simplex_means(n_classes: int, dim: int, separation: float) -> np.ndarray:
    """Class means on a centered regular simplex with circumradius `separation`.

    Every mean sits `separation` from the origin; pairwise mean distance is
    separation * sqrt(2C / (C-1)), so the per-pair Bayes error under unit
    isotropic noise is Phi(-pairwise/2).
    """
    C = n_classes
    means = np.zeros((C, dim))
    for c in range(C):
        v = -np.ones(C) / C
        v[c] += 1.0
        means[c, :C] = separation * v / np.linalg.norm(v) if separation > 0 else 0.0
    return means


def bayes_accuracy_bound(spec: SynthSpec) -> float:
    """Union lower bound on the Bayes accuracy of the Gaussian construction."""
    if spec.separation == 0:
        return 1.0 / spec.n_classes
    pairwise = spec.separation * math.sqrt(2 * spec.n_classes / (spec.n_classes - 1))
    pair_err = 1.0 - _norm_cdf(pairwise / 2.0)
    return max(0.0, 1.0 - (spec.n_classes - 1) * pair_err)


def _gaussian_records(builder: EmbeddingSetBuilder, means: np.ndarray,
                      per_class: int, spec: SynthSpec, stream_base: int,
                      prefix: str) -> int:
    idx = 0
    for c in range(spec.n_classes):
        for _ in range(per_class):
            rng = Rng(spec.seed, stream=stream_base + idx)
            block = means[c] + rng.normal(
                spec.clips_per_video * spec.tokens * spec.dim
            ).reshape(spec.clips_per_video, spec.tokens, spec.dim)
            builder.add(f"{prefix}{idx:05d}", block.astype(np.float32), label=c)
            idx += 1
    return idx


def gen_class_gaussians(spec: SynthSpec) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Unit-variance Gaussian classes around simplex means; returns
    (train, held-out eval) sets drawn from non-overlapping streams."""
    means = simplex_means(spec.n_classes, spec.dim, spec.separation)
    classes = [f"class_{c:02d}" for c in range(spec.n_classes)]
    level = "clip" if spec.tokens == 1 else "patch"

    train_b = EmbeddingSetBuilder("synth-gaussians", spec.dim, level, classes)
    n_train = _gaussian_records(train_b, means, spec.per_class, spec, 1, "train_")
    eval_b = EmbeddingSetBuilder("synth-gaussians-eval", spec.dim, level, classes)
    _gaussian_records(eval_b, means, spec.eval_per_class, spec, 1 + n_train, "eval_")
    return train_b.build(), eval_b.build()


def gen_motion_pairs(
    n: int, dim: int, direction_strength: float, seed: int
) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Paired sets sharing an appearance component a ~ N(0, I); the forward
    set adds +strength*u along a fixed unit direction u and the reversed set
    adds -strength*u. Strength 0 makes the two sets identical."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    u = Rng(seed, stream=0).normal(dim)
    u /= np.linalg.norm(u)

    fwd = EmbeddingSetBuilder("synth-motion-forward", dim, "clip", ["forward", "reversed"])
    rev = EmbeddingSetBuilder("synth-motion-reversed", dim, "clip", ["forward", "reversed"])
    for i in range(n):
        a = Rng(seed, stream=i + 1).normal(dim)
        vid = f"pair_{i:05d}"
        fwd.add(vid, (a + direction_strength * u).astype(np.float32)[None, None, :], label=0)
        rev.add(vid, (a - direction_strength * u).astype(np.float32)[None, None, :], label=1)
    return fwd.build(), rev.build()


def gen_token_signal_set(
    n_per_class: int,
    n_classes: int,
    tokens: int,
    dim: int,
    seed: int,
    signal_norm: float = 2.5,
    marker_norm: float = 4.0,
) -> EmbeddingSet:
    """Patch-level set whose class signal lives in exactly one token.

    One token per video (position seeded per video) carries signal_norm
    along its class axis plus a class-independent marker on axis n_classes
    and small jitter; the remaining tokens are unit noise. The token mean
    then has class signal-to-noise ~ signal_norm / sqrt(tokens), so pooled
    classifiers stay near chance, while a token-selective reader (attention
    keyed on the marker axis) recovers the class almost perfectly.
    """
    if tokens < 4:
        raise ValueError("need at least 4 tokens")
    if dim < n_classes + 1:
        raise ValueError("dim must be >= n_classes + 1")
    classes = [f"class_{c:02d}" for c in range(n_classes)]
    builder = EmbeddingSetBuilder("synth-token-signal", dim, "patch", classes)
    idx = 0
    for c in range(n_classes):
        for _ in range(n_per_class):
            rng = Rng(seed, stream=idx + 1)
            block = rng.normal(tokens * dim).reshape(1, tokens, dim)
            pos = int(rng.integers(0, tokens, 1)[0])
            signal = np.zeros(dim)
            signal[c] = signal_norm
            signal[n_classes] = marker_norm  # marker shared by every class
            block[0, pos] = signal + 0.1 * rng.normal(dim)
            builder.add(f"vid_{idx:05d}", block.astype(np.float32), label=c)
            idx += 1
    return builder.build()


def write_truth_file(path, spec: SynthSpec, means: np.ndarray) -> None:
    """Sidecar with the analytic accuracy bound and a hash of the means."""
    doc = {
        "bayes_accuracy": bayes_accuracy_bound(spec),
        "means_hash": hashlib.sha256(means.astype("<f8").tobytes()).hexdigest(),
        "spec": asdict(spec),
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
