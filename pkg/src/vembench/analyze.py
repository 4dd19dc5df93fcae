"""Embedding-space analyses: Fisher-discriminant separability of forward vs
temporally reversed clips, and 2-D visualization via t-SNE or a PCA fallback.

The reversal analysis quantifies whether an embedding encodes the direction
of motion: a video and its frame-reversed twin share appearance, so any
linear separability between the paired sets must come from temporal signal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from vembench.numkit import NumericError, Rng, solve_spd, top_eigvecs
from vembench.plan import aggregate_clip_embeddings
from vembench.store import EmbeddingSet, pool_tokens


# ---------------------------------------------------------------------------
# Fisher LDA
# ---------------------------------------------------------------------------

@dataclass
class LdaModel:
    w: np.ndarray  # unit discriminant direction
    threshold: float  # midpoint of projected class means
    ridge: float

    def project(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w

    def classify(self, X: np.ndarray) -> np.ndarray:
        """True where a row lands on class-1's side (ties go to class 1)."""
        return self.project(X) >= self.threshold


def fisher_lda(X1: np.ndarray, X2: np.ndarray, ridge: float = 0.0) -> LdaModel:
    """Two-class Fisher discriminant: w ~ Sw^-1 (mu1 - mu2), unit-normalized.

    Sw is the pooled within-class scatter. Class 1 always projects at or
    above the threshold. A singular Sw with ridge=0 raises NumericError
    advising a ridge.
    """
    X1 = np.asarray(X1, dtype=np.float64)
    X2 = np.asarray(X2, dtype=np.float64)
    if X1.shape[0] < 2 or X2.shape[0] < 2:
        raise ValueError("each class needs at least 2 samples")
    if X1.shape[1] != X2.shape[1]:
        raise ValueError("dimension mismatch between classes")
    mu1 = X1.mean(axis=0)
    mu2 = X2.mean(axis=0)
    c1 = X1 - mu1
    c2 = X2 - mu2
    sw = c1.T @ c1 + c2.T @ c2
    try:
        w = solve_spd(sw, mu1 - mu2, ridge)
    except NumericError as exc:
        raise NumericError(
            f"within-class scatter is singular ({exc}); pass a positive ridge"
        ) from exc
    norm = np.linalg.norm(w)
    if norm > 0:
        w = w / norm
    # w.(mu1 - mu2) = (mu1-mu2)' Sw^-1 (mu1-mu2) >= 0, so class 1 sits high
    threshold = 0.5 * float(w @ mu1 + w @ mu2)
    return LdaModel(w=w, threshold=threshold, ridge=ridge)


def default_ridge(X1: np.ndarray, X2: np.ndarray) -> float:
    """1e-6 * trace(Sw)/d: survives d larger than the sample count."""
    X1 = np.asarray(X1, dtype=np.float64)
    X2 = np.asarray(X2, dtype=np.float64)
    c1 = X1 - X1.mean(axis=0)
    c2 = X2 - X2.mean(axis=0)
    trace = float(np.sum(c1 * c1) + np.sum(c2 * c2))
    return 1e-6 * trace / X1.shape[1]


def _video_vectors(es: EmbeddingSet) -> dict[str, np.ndarray]:
    out = {}
    for rec in es.records:
        clips = pool_tokens(es.block(rec)).astype(np.float64)
        out[rec.id] = aggregate_clip_embeddings(clips)
    return out


def reversal_separability(
    forward: EmbeddingSet,
    reversed_set: EmbeddingSet,
    ridge: Optional[float] = None,
    folds: int = 5,
) -> dict:
    """Cross-validated LDA accuracy of forward-vs-reversed discrimination.

    Sets must contain the same video ids; each video contributes its forward
    and reversed vector, and both stay in the same fold so train/test pairs
    never leak. ridge=None selects the per-fold default; pass an explicit
    value (e.g. 0.0) to pin it. Also returns per-video projections from a
    model fitted on all pairs, for plotting.
    """
    fwd = _video_vectors(forward)
    rev = _video_vectors(reversed_set)
    if set(fwd) != set(rev):
        raise ValueError("forward and reversed sets contain different video ids")
    ids = sorted(fwd)
    if len(ids) < folds:
        raise ValueError(f"need at least {folds} pairs for {folds}-fold CV")
    X1 = np.stack([fwd[i] for i in ids])
    X2 = np.stack([rev[i] for i in ids])

    fold_of = np.arange(len(ids)) % folds
    correct = 0
    for f in range(folds):
        tr = fold_of != f
        te = ~tr
        r = default_ridge(X1[tr], X2[tr]) if ridge is None else ridge
        model = fisher_lda(X1[tr], X2[tr], r)
        correct += int(np.sum(model.classify(X1[te])))
        correct += int(np.sum(~model.classify(X2[te])))
    accuracy = 100.0 * correct / (2 * len(ids))

    r_full = default_ridge(X1, X2) if ridge is None else ridge
    full = fisher_lda(X1, X2, r_full)
    projections = {
        "forward": {vid: float(p) for vid, p in zip(ids, full.project(X1))},
        "reversed": {vid: float(p) for vid, p in zip(ids, full.project(X2))},
    }
    return {"accuracy": accuracy, "folds": folds, "ridge": r_full,
            "projections": projections}


# ---------------------------------------------------------------------------
# t-SNE
# ---------------------------------------------------------------------------

@dataclass
class TsneConfig:
    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_steps: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.iterations < self.exaggeration_steps:
            raise ValueError("iterations must cover the exaggeration phase")


def _conditional_probs(D2: np.ndarray, perplexity: float, tol: float = 1e-3):
    """Per-row Gaussian conditionals whose perplexity matches the target.

    Binary-searches each row's precision beta = 1/(2 sigma^2) until
    exp(entropy) is within tol of the target perplexity.
    """
    n = D2.shape[0]
    P = np.zeros((n, n))
    target_h = np.log(perplexity)
    for i in range(n):
        d = np.delete(D2[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(256):
            e = np.exp(-beta * (d - d.min()))  # shift for stability
            s = e.sum()
            p = e / s
            h = float(np.log(s) + beta * np.sum((d - d.min()) * p))
            if abs(np.exp(h) - perplexity) <= tol:
                break
            if h > target_h:  # too flat: raise beta
                lo = beta
                beta = beta * 2.0 if hi == np.inf else 0.5 * (lo + hi)
            else:
                hi = beta
                beta = 0.5 * (lo + hi)
        row = np.zeros(n)
        row[np.arange(n) != i] = p
        P[i] = row
    return P


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def _student_q(Y: np.ndarray):
    diff = Y[:, None, :] - Y[None, :, :]
    num = 1.0 / (1.0 + np.sum(diff * diff, axis=2))
    np.fill_diagonal(num, 0.0)
    Q = num / num.sum()
    return np.maximum(Q, 1e-12), num


def tsne(X: np.ndarray, cfg: TsneConfig, return_trace: bool = False):
    """Exact (quadratic-cost) t-SNE to 2 dimensions.

    Joint probabilities come from perplexity-calibrated Gaussian
    conditionals, symmetrized; the embedding minimizes KL(P || Q) by
    gradient descent with momentum 0.5 during the early-exaggeration phase
    and 0.8 afterwards. Initialization is seeded Normal(0, 1e-4). With
    return_trace=True, also returns the KL objective sampled over training.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 5:
        raise ValueError("need at least 5 points")
    if not 1.0 < cfg.perplexity < n - 1:
        raise ValueError(f"perplexity {cfg.perplexity} infeasible for n={n}")

    sq = np.sum(X * X, axis=1)
    D2 = np.maximum(sq[:, None] - 2.0 * (X @ X.T) + sq[None, :], 0.0)
    P_cond = _conditional_probs(D2, cfg.perplexity)
    P = (P_cond + P_cond.T) / (2.0 * n)
    P = np.maximum(P, 1e-12)

    rng = Rng(cfg.seed, stream=0)
    Y = 1e-2 * rng.normal(2 * n).reshape(n, 2)  # variance 1e-4
    inc = np.zeros_like(Y)

    Q0, _ = _student_q(Y)
    trace = [(0, _kl_divergence(P, Q0))]

    for step in range(cfg.iterations):
        exaggerating = step < cfg.exaggeration_steps
        P_eff = P * cfg.early_exaggeration if exaggerating else P
        Q, num = _student_q(Y)
        W = (P_eff - Q) * num
        grad = 4.0 * ((np.diag(W.sum(axis=1)) - W) @ Y)
        momentum = 0.5 if exaggerating else 0.8
        inc = momentum * inc - cfg.learning_rate * grad
        Y = Y + inc
        Y = Y - Y.mean(axis=0)
        if return_trace and (step + 1) % 25 == 0:
            Qt, _ = _student_q(Y)
            trace.append((step + 1, _kl_divergence(P, Qt)))

    if return_trace:
        Qf, _ = _student_q(Y)
        if trace[-1][0] != cfg.iterations:
            trace.append((cfg.iterations, _kl_divergence(P, Qf)))
        return Y, trace
    return Y


# ---------------------------------------------------------------------------
# PCA fallback and 2-D diagnostics
# ---------------------------------------------------------------------------

def pca_project(X: np.ndarray, k: int = 2) -> np.ndarray:
    """Mean-centered projection onto the top-k covariance eigenvectors."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n <= k:
        raise ValueError("need more points than output dimensions")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / (n - 1)
    return Xc @ top_eigvecs(cov, k)


def cluster_purity(coords: np.ndarray, labels, k: int) -> float:
    """Mean fraction of each point's k nearest neighbors that share its label."""
    coords = np.asarray(coords, dtype=np.float64)
    labels = np.asarray(labels)
    n = coords.shape[0]
    if n <= k:
        raise ValueError("need more points than neighbors")
    sq = np.sum(coords * coords, axis=1)
    D2 = sq[:, None] - 2.0 * (coords @ coords.T) + sq[None, :]
    np.fill_diagonal(D2, np.inf)
    total = 0.0
    for i in range(n):
        nn = np.argsort(D2[i], kind="stable")[:k]
        total += float(np.mean(labels[nn] == labels[i]))
    return total / n


def write_coords_csv(path, ids, coords, labels=None) -> None:
    """Emit 2-D coordinates as `id,x,y,label` rows."""
    coords = np.asarray(coords)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "label"])
        for i, vid in enumerate(ids):
            label = "" if labels is None else labels[i]
            writer.writerow([vid, repr(float(coords[i, 0])), repr(float(coords[i, 1])), label])
