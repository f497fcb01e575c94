"""Catalog of polynomial diffusion models.

Every builder returns a :class:`~doobpoly.diffop.DiffusionModel` with exact
rational data.  Models with a boundary polynomial are registered in
:data:`CATALOG` together with the parameter map of their h-transform dual and
the expected signed constant ``kappa``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .diffop import DiffusionModel, Domain, drift_from_measure, gamma_apply, image_check
from .polyring import GaussRat, Poly, det, discriminant_sylvester, divexact, product

__all__ = [
    "bessel_hat",
    "jacobi",
    "laguerre",
    "deltoid",
    "ball",
    "matrix_jacobi",
    "weyl_dyson",
    "ou",
    "sphere",
    "brownian",
    "so_table",
    "su_table",
    "hermitian_table",
    "symmetric_table",
    "gamma_weyl_from_bivariate",
    "charpoly_coefficients",
    "discrim_gamma_identity_check",
    "su3_trace_image_check",
    "CatalogEntry",
    "CATALOG",
    "build",
]

F = Fraction


def _q(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


def _const(n, c):
    return Poly.const(n, c)


# ---------------------------------------------------------------------------
# one- and low-dimensional models

def bessel_hat(n=3) -> DiffusionModel:
    """Squared Bessel process: Gamma(y, y) = 2y, L(y) = n on y > 0."""
    n = _q(n)
    y = Poly.var(1, 0)
    return DiffusionModel(
        ("y",), [[y.scale(2)]], [_const(1, n)], [(y, (n - 2) / 2)],
        domain=Domain((y,), (GaussRat(1),)), label=f"bessel_hat(n={n})",
    )


def jacobi(alpha=F(1, 2), beta=F(1, 2)) -> DiffusionModel:
    """Jacobi operator on (-1, 1) with density (1-x)^(alpha-1) (1+x)^(beta-1)."""
    a, b = _q(alpha), _q(beta)
    x = Poly.var(1, 0)
    one = _const(1, 1)
    drift = -(x.scale(a + b) + _const(1, a - b))
    return DiffusionModel(
        ("x",), [[one - x * x]], [drift],
        [(one - x, a - 1), (one + x, b - 1)],
        domain=Domain((one - x, one + x), (GaussRat(0),)), label=f"jacobi(alpha={a}, beta={b})",
    )


def laguerre(alpha=F(1, 2)) -> DiffusionModel:
    """Laguerre operator x d^2 + (alpha - x) d; density x^(alpha-1) e^(-x)."""
    a = _q(alpha)
    x = Poly.var(1, 0)
    return DiffusionModel(
        ("x",), [[x]], [_const(1, a) - x], [(x, a - 1)], weight=-x,
        domain=Domain((x,), (GaussRat(1),)), label=f"laguerre(alpha={a})",
    )


def deltoid(lam=4) -> DiffusionModel:
    """Deltoid model in conjugate coordinates (Z, Zbar)."""
    lam = _q(lam)
    Z, Zb = Poly.gens(2)
    one = _const(2, 1)
    gzz = Zb - Z * Z
    gbb = Z - Zb * Zb
    gzb = (one - Z * Zb).scale(F(1, 2))
    D = gzb * gzb - gzz * gbb
    return DiffusionModel(
        ("Z", "Zb"), [[gzz, gzb], [gzb, gbb]], [Z.scale(-lam), Zb.scale(-lam)],
        [(D, (2 * lam - 5) / 6)], kinds=(1, 0),
        domain=Domain((D,), (GaussRat(0), GaussRat(0))), label=f"deltoid(lam={lam})",
    )


def ball(d=2, m=2) -> DiffusionModel:
    """Unit ball in R^d: Gamma = delta - x x^T, L(x) = -m x."""
    m = _q(m)
    xs = Poly.gens(d)
    one = _const(d, 1)
    gamma = [[(one if i == j else Poly.zero(d)) - xs[i] * xs[j] for j in range(d)] for i in range(d)]
    P = one - sum((x * x for x in xs), Poly.zero(d))
    return DiffusionModel(
        tuple(f"x{i}" for i in range(d)), gamma, [x.scale(-m) for x in xs],
        [(P, (m - 1 - d) / 2)],
        domain=Domain((P,), (GaussRat(0),) * d), label=f"ball(d={d}, m={m})",
    )


def matrix_jacobi(p=1, q=1, d=4) -> DiffusionModel:
    """p x q blocks of an SO(d) matrix; boundary det(I - N N^T)."""
    d = _q(d)
    n = p * q
    gens = Poly.gens(n)
    N = [[gens[k * q + l] for l in range(q)] for k in range(p)]
    one = _const(n, 1)
    zero = Poly.zero(n)
    gamma = [[zero] * n for _ in range(n)]
    for k in range(p):
        for l in range(q):
            for a in range(p):
                for b in range(q):
                    delta = one if (k == a and l == b) else zero
                    gamma[k * q + l][a * q + b] = delta - N[k][b] * N[a][l]
    NNt = [[sum((N[i][l] * N[j][l] for l in range(q)), zero) for j in range(p)] for i in range(p)]
    P = det([[(one if i == j else zero) - NNt[i][j] for j in range(p)] for i in range(p)])
    names = tuple(f"n{k}{l}" for k in range(p) for l in range(q))
    return DiffusionModel(
        names, gamma, [g.scale(-(d - 1)) for g in gens], [(P, (d - 1 - p - q) / 2)],
        domain=Domain((P,), (GaussRat(0),) * n), label=f"matrix_jacobi(p={p}, q={q}, d={d})",
    )


def gamma_weyl_from_bivariate(d: int) -> list[list[Poly]]:
    """Gamma(a_i, a_j) from (P'(X)P(Y) - P'(Y)P(X)) / (Y - X).

    ``P(X) = X^d + sum_i a_i X^i``; Gamma(a_i, a_j) is the coefficient of
    X^i Y^j in the quotient.
    """
    n = d + 2
    g = Poly.gens(n)
    a, X, Y = g[:d], g[d], g[d + 1]

    def P(t):
        return t ** d + sum((a[i] * t ** i for i in range(d)), Poly.zero(n))

    def dP(t):
        return t ** (d - 1) * d + sum((a[i] * t ** (i - 1) * i for i in range(1, d)), Poly.zero(n))

    num = dP(X) * P(Y) - dP(Y) * P(X)
    quo = divexact(num, Y - X)
    if quo is None:
        raise ArithmeticError("bivariate quotient is not exact")
    coef = quo.coefficients_in([d, d + 1])
    keep = list(range(d))
    gamma = [[Poly.zero(d)] * d for _ in range(d)]
    for (i, j), c in coef.items():
        gamma[i][j] = c.drop_vars(keep)
    return gamma


def _monic_from_roots(roots) -> list[Fraction]:
    """Coefficients a_0..a_{d-1} of prod (X - r)."""
    c = [F(1)]
    for r in roots:
        nxt = [F(0)] * (len(c) + 1)
        for k, v in enumerate(c):
            nxt[k + 1] += v
            nxt[k] -= r * v
        c = nxt
    return c[:-1]


def weyl_dyson(d=3, a=F(1, 2)) -> DiffusionModel:
    """Coefficients of a monic degree-d polynomial; density discrim^a.

    a = -1/2 is Brownian motion in the Weyl chamber, a = 0 the real symmetric
    and a = 1/2 the Hermitian Dyson spectrum.
    """
    a = _q(a)
    gamma = gamma_weyl_from_bivariate(d)
    coeffs = Poly.gens(d)
    D = discriminant_sylvester(coeffs, d)
    drift = drift_from_measure(gamma, [(D, a)])
    roots = [F(2 * k - (d - 1), 2) for k in range(d)]
    interior = tuple(GaussRat(c) for c in _monic_from_roots(roots))
    return DiffusionModel(
        tuple(f"a{i}" for i in range(d)), gamma, drift, [(D, a)],
        domain=Domain((D,), interior), label=f"weyl_dyson(d={d}, a={a})",
    )


def discrim_gamma_identity_check(d: int) -> list[Poly]:
    """Residuals Gamma(a_i, discrim) + (i+1)(i+2) a_{i+2} discrim, a_d = 1."""
    m = weyl_dyson(d, 0)
    D = m.boundary[0][0]
    gens = Poly.gens(d) + [Poly.const(d, 1)]
    out = []
    for i in range(d):
        lhs = gamma_apply(m, gens[i], D)
        nxt = gens[i + 2] if i + 2 <= d else Poly.zero(d)
        out.append(lhs + (nxt * D).scale((i + 1) * (i + 2)))
    return out


# ---------------------------------------------------------------------------
# models without a boundary polynomial

def ou(n=3) -> DiffusionModel:
    """Ornstein-Uhlenbeck: Gamma = I, L(x) = -x, Gaussian density."""
    xs = Poly.gens(n)
    one = _const(n, 1)
    gamma = [[one if i == j else Poly.zero(n) for j in range(n)] for i in range(n)]
    V = sum((x * x for x in xs), Poly.zero(n)).scale(F(-1, 2))
    return DiffusionModel(
        tuple(f"x{i}" for i in range(n)), gamma, [-x for x in xs], weight=V,
        domain=Domain((), (GaussRat(0),) * n), label=f"ou(n={n})",
    )


def sphere(n=2) -> DiffusionModel:
    """Spherical Laplacian on S^n in the n+1 redundant ambient coordinates."""
    k = n + 1
    xs = Poly.gens(k)
    one = _const(k, 1)
    gamma = [[(one if i == j else Poly.zero(k)) - xs[i] * xs[j] for j in range(k)] for i in range(k)]
    interior = (GaussRat(1),) + (GaussRat(0),) * n
    return DiffusionModel(
        tuple(f"x{i}" for i in range(k)), gamma, [x.scale(-n) for x in xs],
        domain=Domain((), interior), label=f"sphere(n={n})",
    )


def brownian(n=3) -> DiffusionModel:
    """Standard Brownian motion, L = Laplacian / 2."""
    half = _const(n, F(1, 2))
    gamma = [[half if i == j else Poly.zero(n) for j in range(n)] for i in range(n)]
    return DiffusionModel(
        tuple(f"x{i}" for i in range(n)), gamma, [Poly.zero(n)] * n,
        domain=Domain((), (GaussRat(0),) * n), label=f"brownian(n={n})",
    )


def so_table(d=3) -> DiffusionModel:
    """Casimir operator of SO(d) on the matrix entries m_kl."""
    n = d * d
    m = Poly.gens(n)
    one = _const(n, 1)
    zero = Poly.zero(n)
    idx = lambda k, l: k * d + l  # noqa: E731
    gamma = [[zero] * n for _ in range(n)]
    for k in range(d):
        for l in range(d):
            for q in range(d):
                for p in range(d):
                    delta = one if (k == q and l == p) else zero
                    gamma[idx(k, l)][idx(q, p)] = delta - m[idx(k, p)] * m[idx(q, l)]
    interior = tuple(GaussRat(1 if k == l else 0) for k in range(d) for l in range(d))
    return DiffusionModel(
        tuple(f"m{k}{l}" for k in range(d) for l in range(d)), gamma,
        [v.scale(-(d - 1)) for v in m], domain=Domain((), interior), label=f"so_table(d={d})",
    )


def su_table(d=3, scale=2) -> DiffusionModel:
    """Casimir operator of SU(d) on entries (z_kl, zbar_kl).

    ``scale=2`` is the canonical normalisation whose trace image is
    (8/3) deltoid(4) for d = 3; ``scale=1`` is the half-size table.
    """
    s = _q(scale)
    n = 2 * d * d
    g = Poly.gens(n)
    z = lambda k, l: g[k * d + l]  # noqa: E731
    zb = lambda k, l: g[d * d + k * d + l]  # noqa: E731
    iz = lambda k, l: k * d + l  # noqa: E731
    ib = lambda k, l: d * d + k * d + l  # noqa: E731
    one = _const(n, 1)
    zero = Poly.zero(n)
    gamma = [[zero] * n for _ in range(n)]
    for k in range(d):
        for l in range(d):
            for r in range(d):
                for q in range(d):
                    zz = (z(k, q) * z(r, l)).scale(-2) + (z(k, l) * z(r, q)).scale(F(2, d))
                    bb = (zb(k, q) * zb(r, l)).scale(-2) + (zb(k, l) * zb(r, q)).scale(F(2, d))
                    delta = one if (k == r and l == q) else zero
                    zc = (delta - (z(k, l) * zb(r, q)).scale(F(1, d))).scale(2)
                    gamma[iz(k, l)][iz(r, q)] = zz.scale(s)
                    gamma[ib(k, l)][ib(r, q)] = bb.scale(s)
                    gamma[iz(k, l)][ib(r, q)] = zc.scale(s)
                    gamma[ib(r, q)][iz(k, l)] = zc.scale(s)
    c = -2 * s * F((d - 1) * (d + 1), d)
    drift = [v.scale(c) for v in g]
    kinds = [None] * n
    for k in range(d):
        for l in range(d):
            kinds[iz(k, l)] = ib(k, l)
            kinds[ib(k, l)] = iz(k, l)
    names = tuple(f"z{k}{l}" for k in range(d) for l in range(d)) + tuple(
        f"zb{k}{l}" for k in range(d) for l in range(d)
    )
    interior = tuple(GaussRat(1 if k == l else 0) for k in range(d) for l in range(d)) * 2
    return DiffusionModel(names, gamma, drift, kinds=tuple(kinds),
                          domain=Domain((), interior), label=f"su_table(d={d}, scale={s})")


def hermitian_table(d=3) -> DiffusionModel:
    """Brownian Hermitian matrix: Gamma(m_ij, m_kl) = delta_il delta_jk, L = 0.

    Entries m_ij and m_ji are conjugate partners; diagonal entries are real.
    """
    n = d * d
    one = _const(n, 1)
    zero = Poly.zero(n)
    gamma = [[zero] * n for _ in range(n)]
    for i in range(d):
        for j in range(d):
            gamma[i * d + j][j * d + i] = one
    kinds = tuple(None if i == j else j * d + i for i in range(d) for j in range(d))
    interior = tuple(GaussRat(i) if i == j else GaussRat(0) for i in range(d) for j in range(d))
    return DiffusionModel(
        tuple(f"m{i}{j}" for i in range(d) for j in range(d)), gamma, [zero] * n, kinds=kinds,
        domain=Domain((), interior), label=f"hermitian_table(d={d})",
    )


def symmetric_table(d=3) -> DiffusionModel:
    """Brownian real symmetric matrix on the entries m_ij, i <= j."""
    pairs = [(i, j) for i in range(d) for j in range(i, d)]
    n = len(pairs)
    gamma = [[Poly.zero(n)] * n for _ in range(n)]
    for a, (i, j) in enumerate(pairs):
        gamma[a][a] = _const(n, 1 if i == j else F(1, 2))
    interior = tuple(GaussRat(i) if i == j else GaussRat(0) for i, j in pairs)
    return DiffusionModel(
        tuple(f"m{i}{j}" for i, j in pairs), gamma, [Poly.zero(n)] * n,
        domain=Domain((), interior), label=f"symmetric_table(d={d})",
    )


def symmetric_entry(d: int, n: int, i: int, j: int) -> Poly:
    """Entry (i, j) of the symmetric matrix in :func:`symmetric_table` variables."""
    i, j = min(i, j), max(i, j)
    pairs = [(a, b) for a in range(d) for b in range(a, d)]
    return Poly.var(n, pairs.index((i, j)))


def charpoly_coefficients(M: list[list[Poly]]) -> list[Poly]:
    """Coefficients a_0..a_{d-1} of det(X I - M), as polynomials in M's ring."""
    d = len(M)
    n = M[0][0].nvars
    ext = [[M[i][j].extend(n + 1) for j in range(d)] for i in range(d)]
    X = Poly.var(n + 1, n)
    A = [[(X if i == j else Poly.zero(n + 1)) - ext[i][j] for j in range(d)] for i in range(d)]
    P = det(A)
    coef = P.coefficients_in([n])
    keep = list(range(n))
    return [coef.get((k,), Poly.zero(n + 1)).drop_vars(keep) for k in range(d)]


# ---------------------------------------------------------------------------
# SU(3) trace image

def _torus_reduce(d: int = 3):
    """Restriction to diagonal SU(3) elements, modulo z1 z2 z3 = 1."""
    n = 2 * d * d
    g = Poly.gens(n)
    zero = Poly.zero(n)
    diag = [k * d + k for k in range(d)]
    subs = [zero] * n
    for k in range(d):
        subs[diag[k]] = g[diag[k]]
        others = [g[diag[j]] for j in range(d) if j != k]
        subs[d * d + diag[k]] = product(others, n)

    def reduce(p: Poly) -> Poly:
        q = p.compose(subs)
        terms: dict = {}
        for e, c in q.terms.items():
            low = min(e[i] for i in diag)
            e2 = list(e)
            for i in diag:
                e2[i] -= low
            e2 = tuple(e2)
            terms[e2] = terms.get(e2, GaussRat(0)) + c
        return Poly(n, terms)

    return reduce


def su3_trace_image_check(scale=2):
    """Image of the SU(3) Casimir under Z = tr(g)/3 against (8/3) deltoid(4)."""
    from .diffop import scaled

    src = su_table(3, scale)
    n = src.nvars
    Z = sum((Poly.var(n, k * 3 + k) for k in range(3)), Poly.zero(n)).scale(F(1, 3))
    Zb = sum((Poly.var(n, 9 + k * 3 + k) for k in range(3)), Poly.zero(n)).scale(F(1, 3))
    cand = scaled(deltoid(4), F(8, 3))
    return image_check(src, [Z, Zb], cand, reduce=_torus_reduce(3))


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    build: Callable[..., DiffusionModel]
    defaults: dict
    dual: Callable[[dict], dict]
    kappa: Callable[[dict], Fraction]
    summary: str

    int_params: frozenset = frozenset()

    def coerce(self, params: dict) -> dict:
        """Defaults overridden by ``params``, coerced to int or exact rational."""
        p = dict(self.defaults)
        for k, v in params.items():
            if v is None:
                continue
            if k not in p:
                raise KeyError(f"{self.name} has no parameter {k!r}")
            p[k] = v
        return {k: int(v) if k in self.int_params else _q(v) for k, v in p.items()}

    def __call__(self, **params) -> DiffusionModel:
        return self.build(**self.coerce(params))


CATALOG: dict[str, CatalogEntry] = {
    "bessel_hat": CatalogEntry(
        "bessel_hat", bessel_hat, {"n": F(1)},
        lambda p: {"n": 4 - _q(p["n"])}, lambda p: F(0),
        "squared Bessel process on (0, inf)",
    ),
    "jacobi": CatalogEntry(
        "jacobi", jacobi, {"alpha": F(1, 2), "beta": F(1, 2)},
        lambda p: {"alpha": 2 - _q(p["alpha"]), "beta": 2 - _q(p["beta"])},
        lambda p: _q(p["alpha"]) + _q(p["beta"]) - 2,
        "Jacobi operator on (-1, 1)",
    ),
    "laguerre": CatalogEntry(
        "laguerre", laguerre, {"alpha": F(1, 2)},
        lambda p: {"alpha": 2 - _q(p["alpha"])}, lambda p: _q(p["alpha"]) - 1,
        "Laguerre operator on (0, inf)",
    ),
    "deltoid": CatalogEntry(
        "deltoid", deltoid, {"lam": F(4)},
        lambda p: {"lam": 5 - _q(p["lam"])}, lambda p: 2 * _q(p["lam"]) - 5,
        "deltoid domain in conjugate coordinates",
    ),
    "ball": CatalogEntry(
        "ball", ball, {"d": 2, "m": F(2)},
        lambda p: {"d": p["d"], "m": 2 * int(p["d"]) + 2 - _q(p["m"])},
        lambda p: int(p["d"]) * (_q(p["m"]) - int(p["d"]) - 1),
        "unit ball in R^d", frozenset({"d"}),
    ),
    "matrix_jacobi": CatalogEntry(
        "matrix_jacobi", matrix_jacobi, {"p": 1, "q": 1, "d": F(2)},
        lambda p: {"p": p["p"], "q": p["q"], "d": 2 * (int(p["p"]) + int(p["q"])) + 2 - _q(p["d"])},
        lambda p: int(p["p"]) * int(p["q"]) * (_q(p["d"]) - 1 - int(p["p"]) - int(p["q"])),
        "p x q blocks of SO(d) matrices", frozenset({"p", "q"}),
    ),
    "weyl_dyson": CatalogEntry(
        "weyl_dyson", weyl_dyson, {"d": 3, "a": F(-1, 2)},
        lambda p: {"d": p["d"], "a": -_q(p["a"])}, lambda p: F(0),
        "spectra in characteristic-polynomial coordinates", frozenset({"d"}),
    ),
}


def build(name: str, **params) -> DiffusionModel:
    """Build a catalog model with parameters coerced to exact values."""
    if name not in CATALOG:
        raise KeyError(f"unknown model {name!r}; known: {sorted(CATALOG)}")
    return CATALOG[name](**params)
