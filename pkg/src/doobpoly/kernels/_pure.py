"""Numpy reference implementations of the hot kernels.

Same signatures and arithmetic as the compiled module; used when the
extension is unavailable or ``DOOBPOLY_PURE=1``.
"""
from __future__ import annotations

import numpy as np

NEG_PIVOT_TOL = 1e-8


def eval_table(exps, coefs, owner, npoly, X):
    """Evaluate ``npoly`` real polynomials stored as flat term tables at rows of X."""
    X = np.ascontiguousarray(X, dtype=float)
    B = X.shape[0]
    out = np.zeros((B, npoly))
    if len(coefs) == 0:
        return out
    mono = np.ones((B, len(coefs)))
    for j in range(X.shape[1]):
        col = exps[:, j]
        for t in np.nonzero(col)[0]:
            mono[:, t] *= X[:, j] ** int(col[t])
    mono *= coefs[None, :]
    for k in range(npoly):
        sel = owner == k
        if sel.any():
            out[:, k] = mono[:, sel].sum(axis=1)
    return out


def chol_clip(G):
    """Batched lower Cholesky factor; negative pivots are clipped to zero.

    Returns (L, bad) where ``bad`` counts pivots below ``-NEG_PIVOT_TOL``.
    """
    B, n, _ = G.shape
    L = np.zeros_like(G)
    bad = 0
    for j in range(n):
        s = G[:, j, j] - (L[:, j, :j] ** 2).sum(axis=1)
        bad += int((s < -NEG_PIVOT_TOL).sum())
        d = np.sqrt(np.maximum(s, 0.0))
        L[:, j, j] = d
        safe = np.where(d > 0, d, 1.0)
        for i in range(j + 1, n):
            v = G[:, i, j] - (L[:, i, :j] * L[:, j, :j]).sum(axis=1)
            L[:, i, j] = np.where(d > 0, v / safe, 0.0)
    return L, bad


def em_propose(X, h, Z, drift, gamma, preds, jitter):
    """One Euler-Maruyama proposal per row with sigma sigma^T = 2 g.

    ``drift``, ``gamma`` and ``preds`` are (exps, coefs, owner, npoly) tables;
    ``gamma`` holds the n*n entries row-major.  Returns (Y, ok, bad).
    """
    X = np.ascontiguousarray(X, dtype=float)
    B, n = X.shape
    b = eval_table(*drift, X)
    G = 2.0 * eval_table(*gamma, X).reshape(B, n, n)
    G[:, np.arange(n), np.arange(n)] += jitter
    L, bad = chol_clip(G)
    noise = np.einsum("bij,bj->bi", L, Z)
    Y = X + b * h[:, None] + np.sqrt(h)[:, None] * noise
    if preds[3]:
        ok = (eval_table(*preds, Y) > 0).all(axis=1)
    else:
        ok = np.ones(B, dtype=bool)
    return Y, ok, bad


def path_law(PA, start, n, N):
    """Unnormalised weights of length-n prefixes, by enumerating all length-N paths.

    Entry ``[x_1, ..., x_n]`` sums prod P_A over every path of length N in A
    starting at ``start`` with that prefix.
    """
    PA = np.asarray(PA, dtype=float)
    k = PA.shape[0]
    w = PA[start].copy()
    for _ in range(N - 1):
        w = w[..., None] * PA[(None,) * (w.ndim - 1)]
    if N == 0:
        return np.ones(())
    tail = tuple(range(n, N))
    return w.sum(axis=tail) if tail else w
