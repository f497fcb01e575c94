import os
import subprocess
import sys

import numpy as np
import pytest

from doobpoly import kernels, models
from doobpoly.diffop import to_real
from doobpoly.polyring import GaussRat, Poly

try:
    compiled = kernels.backend("compiled")
except ImportError:  # pragma: no cover - depends on the build
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")
pure = kernels.backend("pure")


def _tables(m):
    n = m.nvars
    return (kernels.PolyTable(m.drift, n), kernels.PolyTable([g for r in m.gamma for g in r], n),
            kernels.PolyTable([P for P, _ in m.boundary] + list(m.domain.positive), n))


@pytest.mark.parametrize("m", [models.ball(3, 2), to_real(models.deltoid(4)), models.weyl_dyson(3, 0)],
                         ids=["ball", "deltoid", "weyl"])
def test_eval_table_matches_exact(m):
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.3, 0.3, size=(50, m.nvars))
    tab = kernels.PolyTable(m.drift, m.nvars)
    got = kernels.eval_table(tab, X)
    want = np.stack([b.eval_numeric(X).real for b in m.drift], axis=1)
    np.testing.assert_allclose(got, want, atol=1e-13)


def test_poly_table_rejects_complex():
    with pytest.raises(ValueError):
        kernels.PolyTable([Poly.var(1, 0).scale(GaussRat(0, 1))], 1)


@needs_compiled
@pytest.mark.parametrize("m", [models.ball(3, 2), to_real(models.deltoid(4)), models.jacobi()],
                         ids=["ball", "deltoid", "jacobi"])
def test_backends_agree_on_em_step(m):
    rng = np.random.default_rng(1)
    n = m.nvars
    X = rng.uniform(-0.2, 0.2, size=(400, n))
    h = rng.uniform(1e-3, 5e-2, size=400)
    Z = rng.standard_normal((400, n))
    drift, gamma, preds = _tables(m)
    Yc, okc, badc = kernels.em_propose(X, h, Z, drift, gamma, preds, impl=compiled)
    Yp, okp, badp = kernels.em_propose(X, h, Z, drift, gamma, preds, impl=pure)
    np.testing.assert_allclose(Yc, Yp, rtol=1e-12, atol=1e-12)
    assert np.array_equal(np.asarray(okc, dtype=bool), np.asarray(okp, dtype=bool))
    assert badc == badp
    np.testing.assert_allclose(kernels.eval_table(gamma, X, impl=compiled),
                               kernels.eval_table(gamma, X, impl=pure), rtol=1e-12, atol=1e-14)


@needs_compiled
@pytest.mark.parametrize("k,n,N", [(3, 0, 4), (3, 2, 6), (2, 3, 9), (4, 1, 5)])
def test_backends_agree_on_path_law(k, n, N):
    rng = np.random.default_rng(k + N)
    PA = rng.uniform(0.05, 0.3, size=(k, k))
    a = kernels.path_law(PA, 1, n, N, impl=compiled)
    b = kernels.path_law(PA, 1, n, N, impl=pure)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_path_law_brute_force():
    PA = np.array([[0.2, 0.3], [0.1, 0.4]])
    w = kernels.path_law(PA, 0, 1, 3)
    # weight of first step to j times total mass of two more steps from j
    tail = PA @ PA @ np.ones(2)
    np.testing.assert_allclose(np.ravel(w), PA[0] * tail, rtol=1e-14)


def test_pure_backend_selected_by_environment():
    env = dict(os.environ, DOOBPOLY_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from doobpoly import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "pure"
