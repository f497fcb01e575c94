"""Hot numeric kernels with a compiled backend and a numpy fallback.

The compiled extension ``_ckernels`` is used when importable; set
``DOOBPOLY_PURE=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from . import _pure

if os.environ.get("DOOBPOLY_PURE") == "1":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pure
        BACKEND = "pure"

__all__ = ["BACKEND", "PolyTable", "eval_table", "em_propose", "path_law", "backend"]

JITTER = 1e-12


class PolyTable:
    """Flat term table for a list of real polynomials in the same variables."""

    __slots__ = ("exps", "coefs", "owner", "npoly", "nvars")

    def __init__(self, polys: Sequence, nvars: int | None = None):
        polys = list(polys)
        if nvars is None:
            nvars = polys[0].nvars if polys else 0
        rows, coefs, owner = [], [], []
        for k, p in enumerate(polys):
            if p.nvars != nvars:
                raise ValueError("table polynomials must share the variable count")
            if not p.is_real():
                raise ValueError("numeric tables need real coefficients; convert to real coordinates")
            for e, c in p.terms.items():
                rows.append(e)
                coefs.append(float(c.re))
                owner.append(k)
        self.exps = np.array(rows, dtype=np.int64).reshape(len(rows), nvars)
        self.coefs = np.array(coefs, dtype=float)
        self.owner = np.array(owner, dtype=np.int64)
        self.npoly = len(polys)
        self.nvars = nvars

    def as_tuple(self):
        return (self.exps, self.coefs, self.owner, self.npoly)

    def __call__(self, X) -> np.ndarray:
        return eval_table(self, X)


def backend(name: str | None = None):
    """Kernel module by name ('compiled' or 'pure'); default is the active one."""
    if name is None:
        return _impl
    if name == "pure":
        return _pure
    from . import _ckernels  # type: ignore[attr-defined]

    return _ckernels


def eval_table(table: PolyTable, X, impl=None) -> np.ndarray:
    impl = impl or _impl
    X = np.ascontiguousarray(X, dtype=float).reshape(-1, table.nvars)
    return impl.eval_table(*table.as_tuple(), X)


def em_propose(X, h, Z, drift: PolyTable, gamma: PolyTable, preds: PolyTable, impl=None):
    impl = impl or _impl
    return impl.em_propose(
        np.ascontiguousarray(X, dtype=float), np.ascontiguousarray(h, dtype=float),
        np.ascontiguousarray(Z, dtype=float), drift.as_tuple(), gamma.as_tuple(),
        preds.as_tuple(), JITTER,
    )


def path_law(PA, start: int, n: int, N: int, impl=None) -> np.ndarray:
    impl = impl or _impl
    return impl.path_law(np.ascontiguousarray(PA, dtype=float), int(start), int(n), int(N))
