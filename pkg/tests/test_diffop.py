import zlib
from dataclasses import replace
from fractions import Fraction as F

import numpy as np
import pytest

from doobpoly import models
from doobpoly.diffop import (
    BoundaryViolation,
    DegreeEscapeError,
    DiffusionModel,
    Domain,
    check_boundary_eq,
    check_invariants,
    degree_warnings,
    density_check,
    drift_from_measure,
    eigenvector_shift_check,
    gamma_apply,
    h_transform,
    image_check,
    l_apply,
    model_from_json,
    model_to_json,
    operator_matrix,
    product_rule_check,
    scaled,
    to_real,
    verify_ground_state,
)
from doobpoly.polyring import Poly, PolyError


def x1():
    return Poly.var(1, 0)


def c(n, v):
    return Poly.const(n, v)


def random_poly(rng, n, max_deg=3, n_terms=4):
    terms = {}
    for _ in range(n_terms):
        e = tuple(int(k) for k in rng.multinomial(int(rng.integers(0, max_deg + 1)), [1 / n] * n))
        terms[e] = F(int(rng.integers(-9, 10)), int(rng.integers(1, 5)))
    return Poly(n, terms)


CATALOG_DEFAULTS = [(name, entry()) for name, entry in models.CATALOG.items()]


# ---------------------------------------------------------------------------
# gamma / L

def test_gamma_examples():
    x = x1()
    assert gamma_apply(models.jacobi(), x, x) == c(1, 1) - x * x
    Z, Zb = Poly.gens(2)
    assert gamma_apply(models.deltoid(2), Z, Z) == Zb - Z * Z
    for _, m in CATALOG_DEFAULTS:
        f = Poly.var(m.nvars, 0) ** 2
        assert gamma_apply(m, c(m.nvars, 1), f).is_zero()


def test_l_examples():
    x = x1()
    assert l_apply(models.laguerre(F(3, 2)), x) == c(1, F(3, 2)) - x
    assert l_apply(models.laguerre(), c(1, 7)).is_zero()
    for n in (1, F(3, 2), 5):
        assert l_apply(models.bessel_hat(n), x * x) == x.scale(4 + 2 * F(n))


def test_variable_mismatch_rejected():
    with pytest.raises(PolyError):
        l_apply(models.jacobi(), Poly.var(2, 0))
    with pytest.raises(PolyError):
        gamma_apply(models.jacobi(), x1(), Poly.var(2, 1))


def test_gamma_is_symmetric_and_bilinear():
    rng = np.random.default_rng(0)
    m = models.ball(2, 3)
    for _ in range(10):
        f, g, h = (random_poly(rng, 2) for _ in range(3))
        assert gamma_apply(m, f, g) == gamma_apply(m, g, f)
        assert gamma_apply(m, f + h.scale(3), g) == gamma_apply(m, f, g) + gamma_apply(m, h, g).scale(3)


@pytest.mark.parametrize("name,m", CATALOG_DEFAULTS, ids=[n for n, _ in CATALOG_DEFAULTS])
def test_product_rule_on_random_pairs(name, m):
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    n = m.nvars
    assert product_rule_check(m, Poly.var(n, 0), Poly.var(n, 0)).is_zero()
    for _ in range(100):
        f, g = random_poly(rng, n), random_poly(rng, n)
        assert gamma_apply(m, f, g) == gamma_apply(m, g, f)
        assert product_rule_check(m, f, g).is_zero()


def test_product_rule_conjugate_coordinates():
    Z, Zb = Poly.gens(2)
    assert product_rule_check(models.deltoid(1), Z, Zb).is_zero()


# ---------------------------------------------------------------------------
# boundary equation

def test_boundary_ball():
    for d in (1, 2, 3):
        bd = check_boundary_eq(models.ball(d, 3))
        assert list(bd.L[0]) == [Poly.var(d, i).scale(-2) for i in range(d)]
        assert bd.c[0] == -2 * d


def test_boundary_jacobi():
    x = x1()
    bd = check_boundary_eq(models.jacobi(F(1, 3), 2))
    assert bd.L[0][0] == -(c(1, 1) + x)
    assert bd.L[1][0] == c(1, 1) - x
    assert bd.c == (-1, -1)


def test_boundary_deltoid():
    Z, Zb = Poly.gens(2)
    bd = check_boundary_eq(models.deltoid(3))
    assert list(bd.L[0]) == [Z.scale(-3), Zb.scale(-3)]
    assert bd.c[0] == -6


def test_boundary_violation_is_located():
    x, y = Poly.gens(2)
    one = c(2, 1)
    gamma = [[one, Poly.zero(2)], [Poly.zero(2), one]]
    m = DiffusionModel(("x", "y"), gamma, [Poly.zero(2)] * 2, [(one - x * x, 1), (one + y, 1)])
    with pytest.raises(BoundaryViolation) as err:
        check_boundary_eq(m)
    assert {(i, r) for i, r, _ in err.value.failures} == {(0, 0), (1, 1)}


def test_boundary_requires_polynomial():
    with pytest.raises(ValueError):
        check_boundary_eq(models.ou(1))


# ---------------------------------------------------------------------------
# measure and drift

def test_drift_from_measure_jacobi():
    x = x1()
    for a, b in [(F(1, 2), F(1, 2)), (F(3), F(1, 5))]:
        m = models.jacobi(a, b)
        assert drift_from_measure(m.gamma, m.boundary) == [-(x.scale(a + b) + c(1, a - b))]


def test_drift_from_measure_zero_exponents_is_divergence():
    m = models.ball(3, 1)
    drift = drift_from_measure(m.gamma, [(m.boundary[0][0], 0)])
    div = [sum((m.gamma[i][j].partial(j) for j in range(3)), Poly.zero(3)) for i in range(3)]
    assert drift == div


def test_drift_from_measure_ball():
    for d, mm in [(2, 5), (3, F(7, 2))]:
        m = models.ball(d, mm)
        P = m.boundary[0][0]
        drift = drift_from_measure(m.gamma, [(P, (F(mm) - 1 - d) / 2)])
        assert drift == [Poly.var(d, i).scale(-F(mm)) for i in range(d)]


@pytest.mark.parametrize("name,m", CATALOG_DEFAULTS, ids=[n for n, _ in CATALOG_DEFAULTS])
def test_density_check_catalog(name, m):
    assert all(r.is_zero() for r in density_check(m))
    assert all(r.is_zero() for r in verify_ground_state(m))


def test_density_check_detects_perturbation():
    m = models.jacobi()
    bad = DiffusionModel(m.names, m.gamma, [m.drift[0] + c(1, 1)], m.boundary)
    assert density_check(bad) == [c(1, 1)]


def test_density_check_bessel():
    for n in (1, F(5, 2), 4):
        m = models.bessel_hat(n)
        assert m.exponents == ((F(n) - 2) / 2,)
        assert all(r.is_zero() for r in density_check(m))


def test_density_check_with_gaussian_weight():
    assert all(r.is_zero() for r in density_check(models.ou(3)))
    assert all(r.is_zero() for r in density_check(models.laguerre(F(7, 3))))


# ---------------------------------------------------------------------------
# h-transform

def test_h_transform_bessel():
    for n in (1, F(3, 2), 3):
        ht = h_transform(models.bessel_hat(n))
        assert ht.model == models.bessel_hat(4 - F(n))
        assert ht.kappa == 0


def test_h_transform_ball():
    for d, mm in [(1, 1), (2, 4), (3, F(5, 2))]:
        ht = h_transform(models.ball(d, mm))
        assert ht.model == models.ball(d, 2 * d + 2 - F(mm))
        assert ht.kappa == d * (F(mm) - d - 1)


def test_h_transform_deltoid():
    for lam in (1, 4, F(5, 2)):
        ht = h_transform(models.deltoid(lam))
        assert ht.model == models.deltoid(5 - F(lam))
        assert ht.kappa == 2 * F(lam) - 5
        assert ht.h_description[0][1] == (5 - 2 * F(lam)) / 6


@pytest.mark.parametrize("name,m", CATALOG_DEFAULTS, ids=[n for n, _ in CATALOG_DEFAULTS])
def test_h_transform_involution(name, m):
    once = h_transform(m)
    assert once.model.gamma == m.gamma
    assert once.model.exponents == tuple(-a for a in m.exponents)
    assert h_transform(once.model).model == m
    assert h_transform(once.model).model.label == m.label


def test_kappa_is_linear_in_exponents():
    m = models.jacobi()
    k = lambda a: h_transform(m.with_exponents(a)).kappa  # noqa: E731
    a1, a2 = (F(1, 3), F(-2)), (F(5, 7), F(1, 2))
    assert k([x + y for x, y in zip(a1, a2)]) == k(a1) + k(a2)


def test_ground_state_constants():
    bd = check_boundary_eq(models.jacobi())
    assert bd.c[0] == -1
    assert check_boundary_eq(models.weyl_dyson(3, F(1, 2))).c[0] == 0
    assert check_boundary_eq(models.ball(3, 2)).c[0] == -6
    for d in (2, 3):
        assert all(r.is_zero() for r in verify_ground_state(models.weyl_dyson(d, 0)))


# ---------------------------------------------------------------------------
# eigenvector shift

def test_eigenvector_shift_laguerre():
    x = x1()
    m = models.laguerre(2)
    assert eigenvector_shift_check(m, x - c(1, 2), 1).is_zero()


def test_eigenvector_shift_jacobi_constant_and_linear():
    m = models.jacobi(2, 2)
    assert eigenvector_shift_check(m, c(1, 1), 0).is_zero()
    assert eigenvector_shift_check(m, x1(), 4).is_zero()


def test_eigenvector_shift_errors():
    with pytest.raises(ValueError):
        eigenvector_shift_check(models.jacobi(F(3, 2), F(3, 2)), c(1, 1), 0)
    with pytest.raises(ValueError):
        eigenvector_shift_check(models.jacobi(2, 2), x1(), 1)


# ---------------------------------------------------------------------------
# image operators

def test_image_ou_to_laguerre():
    for n in (1, 2, 3):
        xs = Poly.gens(n)
        X = sum((x * x for x in xs), Poly.zero(n)).scale(F(1, 2))
        rep = image_check(models.ou(n), [X], scaled(models.laguerre(F(n, 2)), 2))
        assert rep.ok, rep.failures()


def test_image_sphere_to_jacobi():
    for n in (1, 2, 4):
        rep = image_check(models.sphere(n), [Poly.var(n + 1, 0)], models.jacobi(F(n, 2), F(n, 2)))
        assert rep.ok


def test_image_euclidean_norm_to_bessel():
    for n in (1, 2, 3):
        xs = Poly.gens(n)
        X = sum((x * x for x in xs), Poly.zero(n))
        assert image_check(models.brownian(n), [X], models.bessel_hat(n)).ok


def test_image_check_reports_failure():
    xs = Poly.gens(2)
    X = xs[0] * xs[0] + xs[1] * xs[1]
    rep = image_check(models.brownian(2), [X], models.bessel_hat(3))
    assert not rep.ok
    assert rep.failures() == ["L[0]"]
    with pytest.raises(PolyError):
        image_check(models.brownian(2), [X, X], models.bessel_hat(3))


# ---------------------------------------------------------------------------
# operator matrices

@pytest.mark.parametrize("a,b", [(F(1, 2), F(1, 2)), (F(3, 2), F(3, 2)), (1, 2)])
def test_operator_matrix_jacobi(a, b):
    om = operator_matrix(models.jacobi(a, b), 3)
    diag = {sum(e): v for e, v in zip(om.basis, om.diagonal())}
    assert diag == {m: -m * (m + F(a) + F(b) - 1) for m in range(4)}


def test_operator_matrix_laguerre():
    om = operator_matrix(models.laguerre(F(1, 3)), 2)
    assert {d: list(v) for d, v in om.block_eigenvalues().items()} == {0: [0], 1: [-1], 2: [-2]}


def test_operator_matrix_shape_and_constant_row():
    om = operator_matrix(models.ball(2, 3), 3)
    const = om.basis.index((0, 0))
    assert all(v == 0 for v in om.matrix[const])
    degs = [sum(e) for e in om.basis]
    for i, row in enumerate(om.matrix):
        for j, v in enumerate(row):
            if v != 0:
                assert degs[j] <= degs[i]


def test_operator_matrix_deltoid_blocks():
    # the degree-1 block of deltoid(lam) is -lam times the identity
    om = operator_matrix(models.deltoid(3), 2)
    assert om.block_eigenvalues()[1] == [-3, -3]


def test_operator_matrix_degree_escape():
    x = x1()
    m = DiffusionModel(("x",), [[x ** 3 + c(1, 1)]], [Poly.zero(1)])
    with pytest.warns(UserWarning):
        assert degree_warnings(m)
    with pytest.raises(DegreeEscapeError):
        operator_matrix(m, 2)


# ---------------------------------------------------------------------------
# model utilities

@pytest.mark.parametrize("name,m", CATALOG_DEFAULTS, ids=[n for n, _ in CATALOG_DEFAULTS])
def test_json_round_trip(name, m):
    back = model_from_json(model_to_json(m))
    assert back == m
    assert back.label == m.label
    assert back.domain == m.domain


def test_scaled_preserves_density():
    m = scaled(models.jacobi(2, 3), F(5, 2))
    assert all(r.is_zero() for r in density_check(m))
    assert m.gamma[0][0] == models.jacobi().gamma[0][0].scale(F(5, 2))


def test_to_real_deltoid():
    r = to_real(models.deltoid(4))
    assert r.is_real()
    assert all(g.is_real() for row in r.gamma for g in row)
    assert all(q.is_zero() for q in density_check(r))
    assert h_transform(r).kappa == 3
    assert r.names == ("Re_Z", "Im_Z")


@pytest.mark.parametrize("name,m", CATALOG_DEFAULTS, ids=[n for n, _ in CATALOG_DEFAULTS])
def test_interior_point_invariants(name, m):
    assert check_invariants(m) == []


def test_invariants_flag_bad_interior():
    m = models.jacobi()
    bad = replace(m, domain=Domain(m.domain.positive, (2,)))
    assert check_invariants(bad)


def test_asymmetric_gamma_rejected():
    x, y = Poly.gens(2)
    with pytest.raises(ValueError):
        DiffusionModel(("x", "y"), [[x, y], [x, y]], [x, y])
