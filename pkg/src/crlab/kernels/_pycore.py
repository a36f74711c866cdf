"""Numpy implementation of the per-degree kernels (fallback for ``_core``)."""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp


def log_moments(lu, lv, C):
    """Flat graded table of ``log sum_i exp(a1*lu_i + (k-a1)*lv_i + C[k, i])``."""
    lu = np.asarray(lu, dtype=float)
    lv = np.asarray(lv, dtype=float)
    C = np.asarray(C, dtype=float)
    K = C.shape[0] - 1
    out = np.empty((K + 1) * (K + 2) // 2)
    for k in range(K + 1):
        a1 = np.arange(k + 1, dtype=float)[:, None]
        t = a1 * lu + (k - a1) * lv + C[k]
        base = k * (k + 1) // 2
        out[base: base + k + 1] = logsumexp(t, axis=1)
    return out


def _graded_exponents(K):
    k = np.repeat(np.arange(K + 1), np.arange(1, K + 2))
    starts = np.arange(K + 1) * (np.arange(K + 1) + 1) // 2
    a1 = np.arange(k.size) - starts[k]
    return a1, k - a1, starts


def diagonal_log_sums(lr1, lr2, lognorms, K):
    """Per-degree ``log sum_{a1} r1^a1 r2^a2 / N_a`` for each point."""
    lr1 = np.atleast_1d(np.asarray(lr1, dtype=float))
    lr2 = np.atleast_1d(np.asarray(lr2, dtype=float))
    a1, a2, starts = _graded_exponents(K)
    ln = np.asarray(lognorms, dtype=float)[: a1.size]
    out = np.empty((lr1.size, K + 1))
    with np.errstate(invalid="ignore"):
        for p in range(lr1.size):
            t = np.where(a1 > 0, a1 * lr1[p], 0.0) + np.where(a2 > 0, a2 * lr2[p], 0.0) - ln
            m = np.maximum.reduceat(t, starts)
            safe = np.where(np.isfinite(m), m, 0.0)
            with np.errstate(divide="ignore"):
                out[p] = safe + np.log(np.add.reduceat(np.exp(t - np.repeat(safe, np.arange(1, K + 2))), starts))
            out[p][~np.isfinite(m)] = -np.inf
    return out

