from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doobpoly.polyring import (
    ConjugateSymmetryError,
    GaussRat,
    Poly,
    PolyError,
    complex_to_real,
    det,
    discriminant_sylvester,
    divexact,
    elementary_symmetric,
    format_poly,
    grlex_monomials,
    parse_poly,
    real_to_complex,
)

from oracles import leibniz_det, monic_coefficients, root_product_discriminant

NV = 3

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gauss = st.builds(GaussRat, rationals, st.one_of(st.just(Fraction(0)), rationals))
exponents = st.tuples(*[st.integers(0, 3)] * NV)


@st.composite
def polys(draw, complex_coeffs=False):
    terms = draw(st.dictionaries(exponents, gauss if complex_coeffs else rationals, max_size=5))
    return Poly(NV, terms)


points = st.lists(rationals, min_size=NV, max_size=NV)


# ---------------------------------------------------------------------------
# ring axioms

@given(polys(True), polys(True), polys(True))
def test_ring_axioms(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == Poly.zero(NV)
    assert p * Poly.const(NV, 1) == p


@settings(max_examples=200)
@given(polys(), polys(), polys())
def test_distributivity_200(p, q, r):
    assert (p + q) * r == p * r + q * r


@given(polys(True), polys(True), st.integers(0, NV - 1))
def test_leibniz_rule(p, q, i):
    assert (p * q).partial(i) == p.partial(i) * q + p * q.partial(i)


@given(polys(True))
def test_mixed_partials_commute(p):
    assert p.partial(0).partial(1) == p.partial(1).partial(0)


@given(polys(True), polys(True), points)
def test_evaluation_is_a_homomorphism(p, q, x):
    assert (p * q).eval(x) == p.eval(x) * q.eval(x)
    assert (p + q).eval(x) == p.eval(x) + q.eval(x)


@given(polys(True), polys(True))
def test_divexact_recovers_factor(p, q):
    if q.is_zero():
        return
    assert divexact(p * q, q) == p


def test_divexact_rejects_non_divisor():
    x = Poly.var(1, 0)
    assert divexact(x * x + Poly.const(1, 1), x + Poly.const(1, 1)) is None
    with pytest.raises(ZeroDivisionError):
        divexact(x, Poly.zero(1))


def test_basic_arithmetic_examples():
    x, y = Poly.gens(2)
    one = Poly.const(2, 1)
    assert (x + one) * (x - one) == x * x - one
    assert (x * x - one) / (x - one) == x + one
    assert (x * y).degree() == 2
    assert Poly.zero(2).degree() == -1
    assert (x ** 3).partial(0) == (x * x).scale(3)
    with pytest.raises(PolyError):
        x + Poly.var(3, 0)


@given(polys(True))
def test_conjugation_involution(p):
    assert p.conj().conj() == p


@given(polys(True), polys(True), points)
def test_compose_matches_substituted_evaluation(p, q, x):
    subs = [q, Poly.var(NV, 2), Poly.var(NV, 0)]
    lhs = p.compose(subs).eval(x)
    rhs = p.eval([q.eval(x), GaussRat(x[2]), GaussRat(x[0])])
    assert lhs == rhs


@given(polys(True), st.lists(st.floats(-2, 2), min_size=NV, max_size=NV))
def test_numeric_evaluation_agrees_with_exact(p, x):
    exact = complex(p.eval([Fraction(v) for v in x]))
    num = p.eval_numeric(np.array([x]))[0]
    assert abs(num - exact) <= 1e-9 * (1 + abs(exact))


# ---------------------------------------------------------------------------
# text syntax

@given(polys(True))
def test_format_parse_round_trip(p):
    assert parse_poly(format_poly(p), NV) == p


def test_parse_aliases_and_precedence():
    p = parse_poly("2*Z^2*Zb - (1/2 + 3/4*i)*Zb + 7", ["Z", "Zb"])
    Z, Zb = Poly.gens(2)
    assert p == (Z * Z * Zb).scale(2) - Zb.scale(GaussRat(Fraction(1, 2), Fraction(3, 4))) + Poly.const(2, 7)
    assert parse_poly("-x0**2 + x1/2", 2) == -(Poly.var(2, 0) ** 2) + Poly.var(2, 1).scale(Fraction(1, 2))
    assert parse_poly("(x0 + 1)^2", 1) == Poly.var(1, 0) ** 2 + Poly.var(1, 0).scale(2) + Poly.const(1, 1)


@pytest.mark.parametrize("bad", ["x0 +", "x0 / x1", "((x0)", "y", "x0 ^ x1"])
def test_parse_errors(bad):
    with pytest.raises((ValueError, PolyError)):
        parse_poly(bad, 2)


# ---------------------------------------------------------------------------
# determinants and discriminants

def test_det_matches_leibniz_symbolic():
    g = Poly.gens(9)
    m3 = [[g[3 * i + j] for j in range(3)] for i in range(3)]
    assert det(m3) == leibniz_det(m3)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_det_matches_leibniz_random(n):
    rng = np.random.default_rng(n)
    x = Poly.var(1, 0)
    m = [[x.scale(int(rng.integers(-3, 4))) + Poly.const(1, Fraction(int(rng.integers(-5, 6)), 3))
          for _ in range(n)] for _ in range(n)]
    assert det(m) == leibniz_det(m)


@pytest.mark.parametrize("d", [2, 3])
def test_discriminant_matches_root_product_symbolically(d):
    xs = Poly.gens(d)
    coeffs = monic_coefficients(xs)
    assert discriminant_sylvester(coeffs, d) == root_product_discriminant(xs)


@pytest.mark.parametrize("d", [4, 5])
def test_discriminant_matches_root_product_at_random_roots(d):
    rng = np.random.default_rng(100 + d)
    for _ in range(50):
        roots = [Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 7))) for _ in range(d)]
        coeffs = [Poly.const(1, c) for c in monic_coefficients(roots)]
        expected = Fraction(1)
        for i in range(d):
            for j in range(i + 1, d):
                expected *= (roots[j] - roots[i]) ** 2
        assert discriminant_sylvester(coeffs, d) == Poly.const(1, expected)


def test_discriminant_small_cases():
    a0, a1 = Poly.gens(2)
    assert discriminant_sylvester([a0, a1], 2) == a1 * a1 - a0.scale(4)
    assert discriminant_sylvester([Poly.var(1, 0)], 1) == Poly.const(1, 1)
    with pytest.raises(ValueError):
        discriminant_sylvester([], 0)


def test_elementary_symmetric():
    x, y, z = Poly.gens(3)
    assert elementary_symmetric([x, y, z], 2) == x * y + x * z + y * z


def test_grlex_monomials_order():
    assert grlex_monomials(2, 2) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert len(grlex_monomials(4, 2)) == 15


# ---------------------------------------------------------------------------
# conjugate-pair coordinates

def test_complex_to_real_round_trip_on_deltoid_table():
    Z, Zb = Poly.gens(2)
    one = Poly.const(2, 1)
    g = [[Zb - Z * Z, (one - Z * Zb).scale(Fraction(1, 2))],
         [(one - Z * Zb).scale(Fraction(1, 2)), Z - Zb * Zb]]
    b = [Z.scale(-4), Zb.scale(-4)]
    gr, br, _ = complex_to_real(g, b, (1, 0))
    assert all(e.is_real() for row in gr for e in row)
    gc, bc, _ = real_to_complex(gr, br, [(0, 1)])
    assert [list(r) for r in gc] == [list(r) for r in g]
    assert list(bc) == b


def test_complex_to_real_rejects_asymmetric_table():
    Z, Zb = Poly.gens(2)
    g = [[Z, Poly.zero(2)], [Poly.zero(2), Z]]
    with pytest.raises(ConjugateSymmetryError):
        complex_to_real(g, [Z, Zb], (1, 0))
