import math

import numpy as np
import pytest

from vembench.numkit import (
    LrSchedule,
    NumericError,
    Rng,
    ce_loss_grad,
    lr_at,
    softmax,
    solve_spd,
    top_eigvecs,
)


# ---------------------------------------------------------------------------
# softmax
# ---------------------------------------------------------------------------

def test_softmax_symmetry():
    assert np.allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5])


def test_softmax_shift_invariance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.normal(size=7)
        c = rng.normal() * 100
        assert np.allclose(softmax(x), softmax(x + c), rtol=1e-12, atol=1e-12)


def test_softmax_reference_values():
    # independent high-precision evaluation without max subtraction
    x = np.array([1.0, 2.0, 3.0])
    ref = np.exp(x) / np.exp(x).sum()
    assert np.allclose(softmax(x), ref, rtol=1e-12)
    out = softmax(x)
    assert (out > 0).all()
    assert abs(out.sum() - 1.0) < 1e-6


def test_softmax_rejects_nan():
    with pytest.raises(ValueError):
        softmax(np.array([0.0, np.nan]))


# ---------------------------------------------------------------------------
# cross-entropy
# ---------------------------------------------------------------------------

def test_ce_uniform_logits_loss_is_log_c():
    for C in (2, 5, 11):
        loss, _ = ce_loss_grad(np.zeros(C), 0)
        assert abs(loss - math.log(C)) < 1e-12


def test_ce_grad_sums_to_zero():
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.normal(size=6)
        _, grad = ce_loss_grad(x, 2)
        assert abs(grad.sum()) < 1e-12


def test_ce_grad_matches_finite_differences():
    rng = np.random.default_rng(2)
    h = 1e-5
    for _ in range(10):
        x = rng.normal(size=5)
        label = int(rng.integers(0, 5))
        _, grad = ce_loss_grad(x, label)
        for j in range(5):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            num = (ce_loss_grad(xp, label)[0] - ce_loss_grad(xm, label)[0]) / (2 * h)
            denom = max(abs(num), abs(grad[j]), 1e-8)
            assert abs(num - grad[j]) / denom < 1e-6


def test_ce_rejects_bad_label():
    with pytest.raises(ValueError):
        ce_loss_grad(np.zeros(3), 3)


# ---------------------------------------------------------------------------
# lr schedule
# ---------------------------------------------------------------------------

def test_lr_hits_base_at_warmup_boundary():
    sched = LrSchedule(base_lr=0.1, final_lr=0.0, warmup_steps=10, total_steps=100)
    assert lr_at(sched, 10) == pytest.approx(0.1)


def test_lr_midpoint_of_decay_is_half_base():
    sched = LrSchedule(base_lr=0.2, final_lr=0.0, warmup_steps=10, total_steps=110)
    # decay span is 100 steps; its midpoint sits at step 60
    assert lr_at(sched, 60) == pytest.approx(0.1)


def test_lr_last_step_approaches_final():
    sched = LrSchedule(base_lr=1.0, final_lr=0.0, warmup_steps=0, total_steps=1000)
    last = lr_at(sched, 999)
    closed_form = 0.5 * (1 + math.cos(math.pi * 999 / 1000))
    assert last == pytest.approx(closed_form)
    assert last < 1e-5


def test_lr_continuous_and_monotone_after_warmup():
    sched = LrSchedule(base_lr=0.5, final_lr=0.01, warmup_steps=25, total_steps=200)
    values = [lr_at(sched, s) for s in range(200)]
    assert values[24] <= values[25]  # warmup is increasing into the boundary
    decay = values[25:]
    assert all(a >= b for a, b in zip(decay, decay[1:]))
    assert abs(values[25] - 0.5) < 1e-12


def test_lr_rejects_out_of_range_step():
    sched = LrSchedule(base_lr=0.1, total_steps=10)
    with pytest.raises(ValueError):
        lr_at(sched, 10)


# ---------------------------------------------------------------------------
# solve_spd
# ---------------------------------------------------------------------------

def test_solve_identity():
    b = np.array([3.0, -1.0, 2.0])
    assert np.allclose(solve_spd(np.eye(3), b, 0.0), b)


def test_solve_diagonal():
    assert np.allclose(solve_spd(np.diag([2.0, 4.0]), np.array([2.0, 4.0]), 0.0), [1.0, 1.0])


def _gaussian_elimination(A, b):
    """Brute-force solver kept independent of the production path."""
    A = A.astype(np.float64).copy()
    b = b.astype(np.float64).copy()
    n = len(b)
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(A[col:, col])))
        A[[col, pivot]] = A[[pivot, col]]
        b[[col, pivot]] = b[[pivot, col]]
        for row in range(col + 1, n):
            f = A[row, col] / A[col, col]
            A[row, col:] -= f * A[col, col:]
            b[row] -= f * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - A[row, row + 1:] @ x[row + 1:]) / A[row, row]
    return x


def test_solve_matches_elimination_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        M = rng.normal(size=(8, 8))
        A = M @ M.T + 0.5 * np.eye(8)
        b = rng.normal(size=8)
        x = solve_spd(A, b, 0.0)
        assert np.allclose(x, _gaussian_elimination(A, b), rtol=1e-8)
        assert np.linalg.norm(A @ x - b) <= 1e-8 * np.linalg.norm(b)


def test_solve_reports_non_pd():
    A = np.diag([1.0, -1.0])
    with pytest.raises(NumericError, match="ridge"):
        solve_spd(A, np.ones(2), 0.0)


# ---------------------------------------------------------------------------
# top_eigvecs
# ---------------------------------------------------------------------------

def test_top_eigvec_of_diagonal():
    V = top_eigvecs(np.diag([3.0, 2.0, 1.0]), 1)
    assert np.allclose(np.abs(V[:, 0]), [1.0, 0.0, 0.0], atol=1e-8)


def test_top_eigvecs_orthonormal():
    rng = np.random.default_rng(4)
    M = rng.normal(size=(6, 6))
    A = (M + M.T) / 2
    V = top_eigvecs(A, 3)
    assert np.allclose(V.T @ V, np.eye(3), atol=1e-8)


def test_top_eigvecs_rayleigh_matches_eigh():
    rng = np.random.default_rng(5)
    for _ in range(5):
        M = rng.normal(size=(6, 6))
        A = (M + M.T) / 2
        V = top_eigvecs(A, 2)
        rayleigh = sorted(float(V[:, i] @ A @ V[:, i]) for i in range(2))
        evals = np.linalg.eigvalsh(A)
        top2 = sorted(evals[np.argsort(-np.abs(evals))[:2]])
        assert np.allclose(rayleigh, top2, atol=1e-6)


def test_top_eigvecs_rejects_k_too_large():
    with pytest.raises(ValueError):
        top_eigvecs(np.eye(3), 4)


# ---------------------------------------------------------------------------
# rng
# ---------------------------------------------------------------------------

def test_rng_same_seed_same_draws():
    a = Rng(42, 0).uniform(1000)
    b = Rng(42, 0).uniform(1000)
    assert np.array_equal(a, b)
    an = Rng(42, 0).normal(1000)
    bn = Rng(42, 0).normal(1000)
    assert np.array_equal(an, bn)


def test_rng_streams_differ():
    a = Rng(42, 0).uniform(100)
    b = Rng(42, 1).uniform(100)
    assert not np.array_equal(a, b)


def test_rng_normal_moments():
    z = Rng(7, 0).normal(100_000)
    assert abs(z.mean()) < 0.02
    assert abs(z.std() - 1.0) < 0.02


def test_rng_permutation_is_permutation():
    perm = Rng(1, 2).permutation(50)
    assert sorted(perm.tolist()) == list(range(50))
