"""Conditioning a finite Markov chain to stay in a subset.

The chain restricted to ``A`` has a substochastic kernel ``P_A``.  Its Perron
eigenpair ``(mu0, V0)`` gives the Doob kernel
``Q(x, y) = V0(y) P(x, y) / (mu0 V0(x))``, which is the limit of the law of
the first ``n`` steps conditioned on staying in ``A`` up to time ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels

POLISH_STEPS = 200

__all__ = [
    "StochasticMatrix",
    "GroundState",
    "perron_ground_state",
    "doob_matrix",
    "restrict",
    "conditioned_path_law",
    "markov_path_law",
    "total_variation",
    "random_chain",
]


@dataclass(frozen=True)
class StochasticMatrix:
    entries: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.entries, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("transition matrix must be square")
        if (P < 0).any():
            raise ValueError("transition matrix has negative entries")
        if np.abs(P.sum(axis=1) - 1).max() > 1e-12:
            raise ValueError("rows must sum to 1")
        object.__setattr__(self, "entries", P)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.entries.sum(axis=1)


@dataclass(frozen=True)
class GroundState:
    mu0: float
    v0: np.ndarray
    iterations: int


def perron_ground_state(PA, tol: float = 1e-12, max_iter: int = 1_000_000) -> GroundState:
    """Perron value and vector of an entrywise positive matrix by power iteration.

    ``v0`` is normalised to max entry 1.  Iteration runs until
    ``max|P_A v - mu v| < tol`` and then continues while the residual keeps
    decreasing, so the pair is accurate to round-off.
    """
    PA = np.asarray(PA, dtype=float)
    if PA.ndim != 2 or PA.shape[0] != PA.shape[1]:
        raise ValueError("P_A must be square")
    if not (PA > 0).all():
        raise ValueError("P_A must be entrywise positive")
    v = np.ones(PA.shape[0])
    for it in range(1, max_iter + 1):
        w = PA @ v
        w /= w.max()
        v = w
        if _residual(PA, v) < tol:
            break
    else:
        raise RuntimeError(f"power iteration did not converge in {max_iter} steps")
    # polish to round-off: keep iterating while the residual still shrinks
    res = _residual(PA, v)
    for _ in range(POLISH_STEPS):
        w = PA @ v
        w /= w.max()
        r = _residual(PA, w)
        if not r < res:
            break
        v, res, it = w, r, it + 1
    mu = float((PA @ v) @ v / (v @ v))
    return GroundState(mu, v, it)


def _residual(PA, v) -> float:
    w = PA @ v
    mu = (w @ v) / (v @ v)
    return float(np.abs(w - mu * v).max())


def doob_matrix(PA) -> StochasticMatrix:
    """Q(x, y) = V0(y) P_A(x, y) / (mu0 V0(x))."""
    PA = np.asarray(PA, dtype=float)
    gs = perron_ground_state(PA)
    Q = PA * gs.v0[None, :] / (gs.mu0 * gs.v0[:, None])
    # remove rounding drift so rows sum to 1 within 1e-12
    Q /= Q.sum(axis=1, keepdims=True)
    return StochasticMatrix(Q)


def restrict(P, A: Sequence[int]) -> np.ndarray:
    """Substochastic block P_A of a transition matrix."""
    P = np.asarray(P, dtype=float)
    idx = np.asarray(A, dtype=int)
    return P[np.ix_(idx, idx)]


def conditioned_path_law(P, A: Sequence[int], x0: int, n: int, N: int) -> dict[tuple, float]:
    """Law of (X_0..X_n) given X_k in A for k <= N, by exhaustive enumeration.

    States in the returned paths are indices of the full chain.  Every
    length-N path inside ``A`` is enumerated (the tail weight of each prefix
    is accumulated path by path), so ``|A|^N`` must not exceed 1e7.
    """
    A = list(A)
    if x0 not in A:
        raise ValueError("x0 must belong to A")
    if not 0 <= n <= N:
        raise ValueError("need 0 <= n <= N")
    if len(A) ** N > 10 ** 7:
        raise ValueError(f"|A|^N = {len(A)}^{N} exceeds the enumeration budget")
    PA = restrict(P, A)
    start = A.index(x0)
    probs = kernels.path_law(PA, start, n, N)
    total = probs.sum()
    law = {}
    for flat, w in enumerate(probs.ravel()):
        if w == 0.0:
            continue
        local = np.unravel_index(flat, probs.shape) if n else ()
        law[(x0,) + tuple(A[i] for i in local)] = w / total
    if n == 0:
        law = {(x0,): 1.0}
    return law


def markov_path_law(Q, A: Sequence[int], x0: int, n: int) -> dict[tuple, float]:
    """Law of the first n+1 states of the chain Q on A started at x0."""
    Q = np.asarray(Q, dtype=float)
    A = list(A)
    law = {(x0,): 1.0}
    for _ in range(n):
        nxt = {}
        for path, w in law.items():
            i = A.index(path[-1])
            for j, y in enumerate(A):
                nxt[path + (y,)] = w * Q[i, j]
        law = nxt
    return law


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def random_chain(n_states: int, seed: int) -> np.ndarray:
    """Entrywise positive random stochastic matrix."""
    rng = np.random.default_rng(seed)
    P = rng.uniform(0.05, 1.0, size=(n_states, n_states))
    return P / P.sum(axis=1, keepdims=True)
