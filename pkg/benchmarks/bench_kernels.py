"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json PATH]
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from doobpoly import kernels, models
from doobpoly.diffop import to_real


def _tables(m):
    n = m.nvars
    return (kernels.PolyTable(m.drift, n), kernels.PolyTable([g for r in m.gamma for g in r], n),
            kernels.PolyTable([P for P, _ in m.boundary] + list(m.domain.positive), n))


def cases():
    rng = np.random.default_rng(0)
    out = {}
    for label, m in [("ball(3)", models.ball(3, 2)), ("deltoid", to_real(models.deltoid(4))),
                     ("weyl_dyson(3)", models.weyl_dyson(3, 0)), ("matrix_jacobi(2,2)", models.matrix_jacobi(2, 2, 6))]:
        drift, gamma, preds = _tables(m)
        X = rng.uniform(-0.1, 0.1, size=(10_000, m.nvars))
        h = np.full(len(X), 1e-3)
        Z = rng.standard_normal(X.shape)
        out[f"eval_table {label}"] = lambda impl, g=gamma, X=X: kernels.eval_table(g, X, impl=impl)
        out[f"em_propose {label}"] = (
            lambda impl, X=X, h=h, Z=Z, d=drift, g=gamma, p=preds: kernels.em_propose(X, h, Z, d, g, p, impl=impl))
    PA = rng.uniform(0.05, 0.3, size=(3, 3))
    out["path_law 3 states N=12"] = lambda impl: kernels.path_law(PA, 0, 2, 12, impl=impl)
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    try:
        compiled = kernels.backend("compiled")
    except ImportError:
        print("compiled extension not built; only the pure backend is available")
        return 1
    pure = kernels.backend("pure")
    rows = []
    print(f"{'kernel':40s} {'pure ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        tp = min(timeit.repeat(lambda: fn(pure), number=1, repeat=args.repeat)) * 1e3
        tc = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        rows.append({"kernel": name, "pure_ms": tp, "compiled_ms": tc, "speedup": tp / tc})
        print(f"{name:40s} {tp:10.2f} {tc:12.2f} {tp / tc:8.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
