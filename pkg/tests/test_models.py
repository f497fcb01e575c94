from fractions import Fraction as F

import numpy as np
import pytest

from doobpoly import models
from doobpoly.diffop import (
    check_boundary_eq,
    check_invariants,
    density_check,
    gamma_apply,
    h_transform,
    image_check,
    l_apply,
    verify_ground_state,
)
from doobpoly.polyring import Poly, discriminant_sylvester

from oracles import chain_rule_weyl_gamma, monic_coefficients

GRID = (
    [("bessel_hat", {"n": n}) for n in (1, F(3, 2), 3)]
    + [("jacobi", {"alpha": a, "beta": b}) for a, b in [(F(1, 2), F(1, 2)), (F(3, 2), F(3, 2)), (1, 2)]]
    + [("laguerre", {"alpha": a}) for a in (F(1, 2), 2)]
    + [("deltoid", {"lam": lam}) for lam in (1, 4)]
    + [("ball", {"d": d, "m": m}) for d, m in [(1, 1), (2, 4), (3, 3)]]
    + [("matrix_jacobi", {"p": p, "q": q, "d": d}) for p, q, d in [(1, 1, 4), (1, 2, 5), (2, 2, 6)]]
    + [("weyl_dyson", {"d": d, "a": a}) for d in (2, 3) for a in (F(-1, 2), 0, F(1, 2), F(3, 2))]
)


def _id(case):
    name, params = case
    return name + "-" + ",".join(f"{k}={v}" for k, v in params.items())


@pytest.mark.parametrize("case", GRID, ids=[_id(c) for c in GRID])
def test_catalog_entry_invariants(case):
    name, params = case
    entry = models.CATALOG[name]
    p = entry.coerce(params)
    m = entry.build(**p)
    check_boundary_eq(m)
    assert all(r.is_zero() for r in density_check(m))
    assert all(r.is_zero() for r in verify_ground_state(m))
    ht = h_transform(m)
    assert ht.model == entry.build(**entry.coerce(entry.dual(p)))
    assert ht.kappa == entry.kappa(p)
    assert check_invariants(m) == []


def test_jacobi_dual_example():
    ht = h_transform(models.jacobi(F(1, 2), F(1, 2)))
    assert ht.model == models.jacobi(F(3, 2), F(3, 2))
    assert ht.kappa == -1


def test_ball_1d_is_jacobi():
    b = models.ball(1, 1)
    j = models.jacobi(F(1, 2), F(1, 2))
    assert b.gamma == j.gamma
    assert b.drift == j.drift
    assert h_transform(b).model.drift == h_transform(j).model.drift


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7])
def test_matrix_jacobi_11_is_ball(d):
    mj = models.matrix_jacobi(1, 1, d)
    b = models.ball(1, d - 1)
    assert (mj.gamma, mj.drift, mj.boundary) == (b.gamma, b.drift, b.boundary)


def test_build_and_unknown_names():
    assert models.build("jacobi", alpha="3/2", beta=2) == models.jacobi(F(3, 2), 2)
    with pytest.raises(KeyError):
        models.build("nope")
    with pytest.raises(KeyError):
        models.CATALOG["ball"].coerce({"alpha": 1})


# ---------------------------------------------------------------------------
# Weyl / Dyson

def test_weyl_gamma_d1():
    g = models.gamma_weyl_from_bivariate(1)
    assert g == [[Poly.const(1, 1)]]


def test_weyl_gamma_d2():
    a0, a1 = Poly.gens(2)
    g = models.gamma_weyl_from_bivariate(2)
    assert g[1][1] == Poly.const(2, 2)
    assert g[0][1] == a1 and g[1][0] == a1
    assert g[0][0] == a1 * a1 - a0.scale(2)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_weyl_gamma_matches_chain_rule(d):
    g = models.gamma_weyl_from_bivariate(d)
    table, a = chain_rule_weyl_gamma(d)
    for i in range(d):
        for j in range(d):
            assert g[i][j].compose(a) == table[i][j]
    if d == 3:
        assert g[2][2] == Poly.const(3, 3)


@pytest.mark.parametrize("d", [2, 3])
def test_discrim_gamma_identity(d):
    assert all(r.is_zero() for r in models.discrim_gamma_identity_check(d))


def test_discrim_gamma_d2_by_hand():
    m = models.weyl_dyson(2, 0)
    a0, a1 = Poly.gens(2)
    D = m.boundary[0][0]
    assert D == a1 * a1 - a0.scale(4)
    assert gamma_apply(m, a0, D) == D.scale(-2)
    assert gamma_apply(m, a1, D).is_zero()
    bad = D + Poly.const(2, 1)
    assert not (gamma_apply(m, a0, bad) + bad.scale(2)).is_zero()


def test_weyl_drift_examples():
    # a = 0 is the real symmetric Dyson drift: L P(X) = -P''(X) / 2
    for d in (2, 3):
        m = models.weyl_dyson(d, 0)
        gens = Poly.gens(d) + [Poly.const(d, 1)]
        for i in range(d):
            expected = gens[i + 2].scale(-F((i + 1) * (i + 2), 2)) if i + 2 <= d else Poly.zero(d)
            assert m.drift[i] == expected


def test_weyl_interior_is_chamber_point():
    m = models.weyl_dyson(3, 0)
    assert [complex(v).real for v in m.interior_float()] == [float(v) for v in monic_coefficients([F(-1), F(0), F(1)])]


# ---------------------------------------------------------------------------
# SU(3) and deltoid

def test_su3_trace_image():
    rep = models.su3_trace_image_check()
    assert rep.ok, rep.failures()


def test_su3_trace_image_fails_at_half_scale():
    rep = models.su3_trace_image_check(scale=1)
    assert not rep.ok
    assert "L[0]" in rep.failures()


def test_su3_constant_image_is_zero():
    src = models.su_table(3)
    assert l_apply(src, Poly.const(src.nvars, 1)).is_zero()


def _deltoid_on_torus(z1, z2):
    z3 = 1 / (z1 * z2)
    D = models.deltoid(4).boundary[0][0]
    Z = (z1 + z2 + z3) / 3
    Zb = (z1 * z2 + z1 * z3 + z2 * z3) / 3
    return D.eval([Z, Zb]), z3


def test_deltoid_boundary_in_eigenvalue_variables():
    rng = np.random.default_rng(3)
    for _ in range(30):
        z1 = F(int(rng.integers(1, 30)), int(rng.integers(1, 30)))
        z2 = F(-int(rng.integers(1, 30)), int(rng.integers(1, 30)))
        val, z3 = _deltoid_on_torus(z1, z2)
        expected = -((z1 - z2) * (z2 - z3) * (z3 - z1)) ** 2 / (4 * 27)
        assert val == expected


def test_deltoid_boundary_symbolic():
    # D(e1/3, e2/3) against the discriminant of X^3 - e1 X^2 + e2 X - 1
    e1, e2 = Poly.gens(2)
    D = models.deltoid(4).boundary[0][0]
    lhs = D.compose([e1.scale(F(1, 3)), e2.scale(F(1, 3))])
    disc = discriminant_sylvester([Poly.const(2, -1), e2, -e1], 3)
    assert lhs == disc.scale(F(-1, 108))


# ---------------------------------------------------------------------------
# matrix tables

@pytest.mark.parametrize("build", [
    lambda: models.so_table(3), lambda: models.su_table(3), lambda: models.hermitian_table(3),
    lambda: models.symmetric_table(3), lambda: models.ou(2), lambda: models.sphere(2),
    lambda: models.brownian(2),
])
def test_tables_are_well_formed(build):
    m = build()
    assert check_invariants(m) == []


def test_so_table_drift_and_gamma():
    m = models.so_table(4)
    n = m.nvars
    assert m.drift[0] == Poly.var(n, 0).scale(-3)
    assert m.gamma[0][0] == Poly.const(n, 1) - Poly.var(n, 0) ** 2


def test_matrix_jacobi_from_so_table():
    # the p x q block of the SO(d) table is the matrix_jacobi table
    d, p, q = 4, 2, 2
    so = models.so_table(d)
    mj = models.matrix_jacobi(p, q, d)
    idx = [k * d + l for k in range(p) for l in range(q)]
    for a, i in enumerate(idx):
        assert so.drift[i].drop_vars(idx) == mj.drift[a]
        for b, j in enumerate(idx):
            assert so.gamma[i][j].drop_vars(idx) == mj.gamma[a][b]


def test_charpoly_coefficients_identity():
    n = 1
    one = Poly.const(n, 1)
    zero = Poly.zero(n)
    M = [[one if i == j else zero for j in range(3)] for i in range(3)]
    assert models.charpoly_coefficients(M) == [Poly.const(n, c) for c in (-1, 3, -3)]


def test_symmetric_charpoly_image_is_dyson():
    # Gamma of the real symmetric table pushed through the charpoly is weyl_dyson(d, 0)
    d = 2
    src = models.symmetric_table(d)
    n = src.nvars
    M = [[models.symmetric_entry(d, n, i, j) for j in range(d)] for i in range(d)]
    X = models.charpoly_coefficients(M)
    cand = models.weyl_dyson(d, 0)
    assert image_check(src, X, cand).ok
