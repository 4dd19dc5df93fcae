"""Deterministic dense numeric kernels shared by probing, analysis and metrics.

All reductions accumulate in float64 with a fixed left-to-right order, so
results do not depend on worker count or platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericError(RuntimeError):
    """Raised when a numeric routine cannot produce a trustworthy result."""


# ---------------------------------------------------------------------------
# Reproducible randomness
# ---------------------------------------------------------------------------

class Rng:
    """Counter-based random stream keyed by (seed, stream).

    Identical (seed, stream, draw index) produces the identical value on
    every platform. Streams with different ids are statistically independent,
    so parallel workers can each own one without coordination.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        key = (self.seed & 0xFFFFFFFFFFFFFFFF, self.stream & 0xFFFFFFFFFFFFFFFF)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, n: int = 1) -> np.ndarray:
        """n draws from U[0, 1)."""
        return self._gen.random(n)

    def normal(self, n: int = 1) -> np.ndarray:
        """n standard-normal draws via Box-Muller on the uniform stream."""
        pairs = (n + 1) // 2
        u1 = 1.0 - self.uniform(pairs)  # (0, 1]: keeps log finite
        u2 = self.uniform(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
        return z[:n]

    def integers(self, low: int, high: int, n: int = 1) -> np.ndarray:
        """n draws uniform over [low, high)."""
        if high <= low:
            raise ValueError("empty integer range")
        return low + np.floor(self.uniform(n) * (high - low)).astype(np.int64)

    def permutation(self, n: int) -> np.ndarray:
        """Deterministic permutation of range(n)."""
        return np.argsort(self.uniform(n), kind="stable")


def rng_uniform(rng: Rng, n: int = 1) -> np.ndarray:
    return rng.uniform(n)


def rng_normal(rng: Rng, n: int = 1) -> np.ndarray:
    return rng.normal(n)


# ---------------------------------------------------------------------------
# Softmax / cross-entropy
# ---------------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax along the last axis, computed in float64."""
    x = np.asarray(logits, dtype=np.float64)
    if np.isnan(x).any():
        raise ValueError("softmax received NaN logits")
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def ce_loss_grad(logits: np.ndarray, label: int) -> tuple[float, np.ndarray]:
    """Cross-entropy loss and its gradient w.r.t. the logits.

    loss = -log softmax(logits)[label], grad = softmax(logits) - onehot(label).
    """
    x = np.asarray(logits, dtype=np.float64)
    if not 0 <= label < x.shape[-1]:
        raise ValueError(f"label {label} out of range for {x.shape[-1]} classes")
    p = softmax(x)
    shifted = x - x.max()
    loss = float(np.log(np.exp(shifted).sum()) - shifted[label])
    grad = p.copy()
    grad[label] -= 1.0
    return loss, grad


# ---------------------------------------------------------------------------
# Learning-rate schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LrSchedule:
    base_lr: float
    final_lr: float = 0.0
    warmup_steps: int = 0
    total_steps: int = 1

    def __post_init__(self):
        if self.warmup_steps > self.total_steps:
            raise ValueError("warmup_steps exceeds total_steps")
        if self.final_lr > self.base_lr:
            raise ValueError("final_lr exceeds base_lr")


def lr_at(schedule: LrSchedule, step: int) -> float:
    """Learning rate at a step: linear warmup from 0, then cosine decay.

    The two phases meet continuously at step == warmup_steps, where the rate
    equals base_lr exactly.
    """
    if not 0 <= step < schedule.total_steps:
        raise ValueError(f"step {step} outside [0, {schedule.total_steps})")
    w = schedule.warmup_steps
    if step < w:
        return schedule.base_lr * step / w
    span = schedule.total_steps - w
    if span == 0:  # all-warmup schedule; unreachable given step < total_steps
        return schedule.base_lr
    frac = (step - w) / span
    return schedule.final_lr + 0.5 * (schedule.base_lr - schedule.final_lr) * (
        1.0 + math.cos(math.pi * frac)
    )


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------

def solve_spd(A: np.ndarray, b: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Solve (A + ridge*I) x = b for symmetric positive-definite A.

    Uses a Cholesky factorization; raises NumericError with a condition
    diagnostic when the ridged matrix is not positive definite.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not np.allclose(A, A.T, rtol=1e-8, atol=1e-10):
        raise ValueError("A must be symmetric")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    M = A + ridge * np.eye(A.shape[0])
    try:
        c, low = scipy.linalg.cho_factor(M, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(M))
        raise NumericError(
            f"matrix not positive definite after ridge={ridge:g} "
            f"(condition estimate {cond:.3e}); increase the ridge"
        ) from exc
    return scipy.linalg.cho_solve((c, low), b)


def top_eigvecs(A: np.ndarray, k: int, max_iter: int = 1000, tol: float = 1e-10) -> np.ndarray:
    """Leading k eigenvectors of a symmetric matrix, as columns of a (d, k) array.

    Power iteration with deflation; "leading" means largest |eigenvalue|.
    Each vector's largest-magnitude component is made positive so the output
    is reproducible bit-for-bit.
    """
    A = np.asarray(A, dtype=np.float64)
    d = A.shape[0]
    if A.ndim != 2 or A.shape[1] != d:
        raise ValueError("A must be square")
    if not 1 <= k <= d:
        raise ValueError(f"k={k} outside [1, {d}]")
    if not np.allclose(A, A.T, rtol=1e-8, atol=1e-10):
        raise ValueError("A must be symmetric")

    B = A.copy()
    rng = Rng(0x7E1C, stream=0)
    vecs = np.zeros((d, k))
    for i in range(k):
        v = rng.normal(d)
        if i:
            v -= vecs[:, :i] @ (vecs[:, :i].T @ v)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = B @ v
            if i:  # keep the iterate out of already-deflated directions
                w -= vecs[:, :i] @ (vecs[:, :i].T @ w)
            lam = float(v @ w)
            if np.linalg.norm(w - lam * v) <= tol:
                break
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
        j = int(np.argmax(np.abs(v)))
        if v[j] < 0:
            v = -v
        vecs[:, i] = v
        B -= lam * np.outer(v, v)
    return vecs
