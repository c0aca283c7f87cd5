"""Batched least squares for stacks of small systems.

Solves ``min ||A_i c_i - b_i||`` for thousands of independent (M, J)
systems at once via vectorized Householder QR, avoiding the per-matrix
LAPACK dispatch cost that dominates for J <= 4.  Systems whose triangular
diagonal looks anywhere near singular are re-solved with an exact SVD, so
rank deficiency is always judged by the relative singular-value cutoff.
"""

from __future__ import annotations

import numpy as np

#: relative singular-value cutoff for declaring rank deficiency
RANK_RCOND = 1e-12
#: conservative diagonal-ratio trigger for the exact SVD re-check
_SUSPECT_RATIO = 1e-8


def _qr_pass(A: np.ndarray, b: np.ndarray):
    """In-place Householder sweep; returns (coeffs, suspect_mask)."""
    B, M, J = A.shape
    diag = np.empty((B, J))
    for j in range(J):
        col = A[:, j:, j]
        norm = np.sqrt(np.einsum("bm,bm->b", col, col))
        sign = np.where(col[:, 0] >= 0.0, 1.0, -1.0)
        alpha = -sign * norm
        v = col.copy()
        v[:, 0] -= alpha
        vsq = np.einsum("bm,bm->b", v, v)
        scale = np.where(vsq == 0.0, 0.0, 2.0 / np.where(vsq == 0.0, 1.0, vsq))
        if j + 1 < J:
            tau = np.einsum("bm,bmj->bj", v, A[:, j:, j + 1:]) * scale[:, None]
            A[:, j:, j + 1:] -= v[:, :, None] * tau[:, None, :]
        taub = np.einsum("bm,bm->b", v, b[:, j:]) * scale
        b[:, j:] -= v * taub[:, None]
        diag[:, j] = np.where(vsq == 0.0, col[:, 0], alpha)

    mag = np.abs(diag)
    suspect = mag.min(axis=1) <= _SUSPECT_RATIO * mag.max(axis=1)

    coeffs = np.zeros((B, J))
    safe_diag = np.where(diag == 0.0, 1.0, diag)
    for j in reversed(range(J)):
        resid = b[:, j]
        if j + 1 < J:
            resid = resid - np.einsum("bj,bj->b", A[:, j, j + 1:], coeffs[:, j + 1:])
        coeffs[:, j] = resid / safe_diag[:, j]
    return coeffs, suspect


def lstsq_batch(A: np.ndarray, b: np.ndarray):
    """Least squares coefficients for a stack of (M, J) systems.

    Returns ``(coeffs, bad)``: coefficient rows of shape (B, J) and a bool
    mask marking rank-deficient systems (singular values below
    ``RANK_RCOND`` times the largest); coefficients there are invalid.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 3 or b.shape != A.shape[:2]:
        raise ValueError("expected A of shape (B, M, J) and aligned b")
    if A.shape[1] < A.shape[2]:
        raise ValueError("systems must have at least as many rows as columns")
    coeffs, suspect = _qr_pass(A.copy(), b.copy())
    bad = np.zeros(A.shape[0], dtype=bool)
    if suspect.any():
        idx = np.nonzero(suspect)[0]
        U, s, Vt = np.linalg.svd(A[idx], full_matrices=False)
        deficient = (s[:, 0] == 0.0) | (s[:, -1] <= RANK_RCOND * s[:, 0])
        bad[idx] = deficient
        ok = ~deficient
        if ok.any():
            sel = idx[ok]
            utb = np.einsum("pmj,pm->pj", U[ok], b[sel])
            coeffs[sel] = np.einsum("pij,pi->pj", Vt[ok], utb / s[ok])
    return coeffs, bad
