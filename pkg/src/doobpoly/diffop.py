"""Carré du champ calculus for polynomial diffusion models.

A :class:`DiffusionModel` stores ``g^{ij} = Gamma(x_i, x_j)`` and ``b^i = L(x_i)``
as exact polynomials together with boundary polynomials ``P_r`` and exponents
``alpha_r``.  The reversible density is ``exp(V) * prod P_r^alpha_r`` where the
polynomial log-weight ``V`` is zero except for Gaussian-type models (Laguerre,
Ornstein-Uhlenbeck).

Nothing here materialises ``log P`` or ``h``: every identity is checked after
clearing denominators, so all residuals are polynomials and "passes" means
"is the zero polynomial".
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .polyring import (
    GaussRat,
    Poly,
    PolyError,
    complex_to_real,
    divexact,
    format_poly,
    grlex_monomials,
    parse_poly,
)

__all__ = [
    "Domain",
    "DiffusionModel",
    "BoundaryData",
    "BoundaryViolation",
    "HTransformResult",
    "ImageReport",
    "OperatorMatrix",
    "DegreeEscapeError",
    "gamma_apply",
    "l_apply",
    "product_rule_check",
    "check_boundary_eq",
    "drift_from_measure",
    "density_check",
    "h_transform",
    "verify_ground_state",
    "eigenvector_shift_check",
    "image_check",
    "operator_matrix",
    "check_invariants",
    "degree_warnings",
    "scaled",
    "to_real",
    "model_to_json",
    "model_from_json",
]


class BoundaryViolation(ValueError):
    """The boundary equation fails; ``failures`` lists ``(i, r, reason)``."""

    def __init__(self, failures):
        self.failures = list(failures)
        msg = "; ".join(f"(i={i}, r={r}): {why}" for i, r, why in self.failures)
        super().__init__(f"boundary equation violated: {msg}")


class DegreeEscapeError(ValueError):
    """The generator raises total degree, so it has no matrix on P_k."""


@dataclass(frozen=True)
class Domain:
    positive: tuple = ()
    interior: tuple = ()


def _rat(x) -> Fraction:
    if isinstance(x, GaussRat):
        if x.im:
            raise ValueError("exponents must be real")
        return x.re
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class DiffusionModel:
    """Polynomial diffusion ``L = sum g^{ij} d_ij + sum b^i d_i``.

    ``kinds[i]`` is ``None`` for a real coordinate or the index of the
    conjugate partner for complex coordinates ``(Z, Zbar)``.  ``boundary`` is a
    tuple of ``(P_r, alpha_r)``.  The label is excluded from equality.
    """

    names: tuple
    gamma: tuple
    drift: tuple
    boundary: tuple = ()
    weight: Poly | None = None
    kinds: tuple | None = None
    domain: Domain = field(default_factory=Domain)
    label: str = field(default="", compare=False)

    def __post_init__(self):
        n = len(self.names)
        obj = object.__setattr__
        obj(self, "names", tuple(self.names))
        obj(self, "gamma", tuple(tuple(row) for row in self.gamma))
        obj(self, "drift", tuple(self.drift))
        obj(self, "boundary", tuple((p, _rat(a)) for p, a in self.boundary))
        obj(self, "kinds", tuple(self.kinds) if self.kinds is not None else (None,) * n)
        if self.weight is None:
            obj(self, "weight", Poly.zero(n))
        if len(self.gamma) != n or any(len(r) != n for r in self.gamma) or len(self.drift) != n:
            raise PolyError("gamma must be n x n and drift length n")
        polys = [g for r in self.gamma for g in r] + list(self.drift) + [p for p, _ in self.boundary]
        polys.append(self.weight)
        if any(p.nvars != n for p in polys):
            raise PolyError("all model polynomials must live in the model's variables")
        for i in range(n):
            for j in range(i + 1, n):
                if self.gamma[i][j] != self.gamma[j][i]:
                    raise ValueError(f"gamma is not symmetric at ({i},{j})")

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def exponents(self) -> tuple:
        return tuple(a for _, a in self.boundary)

    def is_real(self) -> bool:
        return all(k is None for k in self.kinds)

    def with_exponents(self, alphas: Sequence, label: str | None = None) -> "DiffusionModel":
        """Same Gamma/boundary/weight, drift rebuilt from new exponents."""
        boundary = tuple((p, _rat(a)) for (p, _), a in zip(self.boundary, alphas))
        drift = drift_from_measure(self.gamma, boundary, self.weight)
        return replace(self, boundary=boundary, drift=tuple(drift), label=label or self.label)

    def interior_float(self) -> np.ndarray:
        return np.array([complex(GaussRat.coerce(v)) for v in self.domain.interior])


def _check_vars(m: DiffusionModel, *polys: Poly):
    for p in polys:
        if p.nvars != m.nvars:
            raise PolyError(f"polynomial has {p.nvars} variables, model has {m.nvars}")


def gamma_apply(m: DiffusionModel, f: Poly, g: Poly) -> Poly:
    """Gamma(f, g) = sum_ij g^{ij} d_i f d_j g."""
    _check_vars(m, f, g)
    df = [f.partial(i) for i in range(m.nvars)]
    dg = df if f is g else [g.partial(j) for j in range(m.nvars)]
    out = Poly.zero(m.nvars)
    for i, a in enumerate(df):
        if a.is_zero():
            continue
        row = Poly.zero(m.nvars)
        for j, b in enumerate(dg):
            if not b.is_zero() and not m.gamma[i][j].is_zero():
                row = row + m.gamma[i][j] * b
        out = out + a * row
    return out


def l_apply(m: DiffusionModel, f: Poly) -> Poly:
    """L(f) = sum g^{ij} d_ij f + sum b^i d_i f."""
    _check_vars(m, f)
    n = m.nvars
    out = Poly.zero(n)
    first = [f.partial(i) for i in range(n)]
    for i in range(n):
        if first[i].is_zero():
            continue
        out = out + m.drift[i] * first[i]
        for j in range(n):
            if m.gamma[i][j].is_zero():
                continue
            d2 = first[i].partial(j)
            if not d2.is_zero():
                out = out + m.gamma[i][j] * d2
    return out


def product_rule_check(m: DiffusionModel, f: Poly, g: Poly) -> Poly:
    """L(fg) - f L(g) - g L(f) - 2 Gamma(f, g); zero for every diffusion."""
    return l_apply(m, f * g) - f * l_apply(m, g) - g * l_apply(m, f) - gamma_apply(m, f, g).scale(2)


@dataclass(frozen=True)
class BoundaryData:
    """Solutions of Gamma(x_i, log P_r) = L_{i,r}.

    ``L[r][i]`` is the degree <= 1 polynomial, ``c[r] = sum_i d_i L_{i,r}`` and
    ``shift[r] = sum_i d_i V * L_{i,r}`` (zero without a log-weight).
    """

    L: tuple
    c: tuple
    shift: tuple

    def ground_constant(self, r: int) -> GaussRat:
        """Value of (L_0 + Gamma(V, .))(log P_r)."""
        return self.c[r] + self.shift[r]


def check_boundary_eq(m: DiffusionModel) -> BoundaryData:
    """Solve the boundary equation by exact division, verifying degree <= 1.

    Raises :class:`BoundaryViolation` naming each failing ``(i, r)``.
    """
    if not m.boundary:
        raise ValueError("model has no boundary polynomial")
    n = m.nvars
    dV = [m.weight.partial(i) for i in range(n)]
    failures = []
    Ls, cs, shifts = [], [], []
    for r, (P, _) in enumerate(m.boundary):
        row = []
        for i in range(n):
            num = gamma_apply(m, Poly.var(n, i), P)
            q = divexact(num, P)
            if q is None:
                failures.append((i, r, "Gamma(x_i, P_r) is not divisible by P_r"))
                row.append(None)
            elif q.degree() > 1:
                failures.append((i, r, f"quotient has degree {q.degree()} > 1"))
                row.append(q)
            else:
                row.append(q)
        if any(q is None or q.degree() > 1 for q in row):
            Ls.append(tuple(row))
            cs.append(None)
            shifts.append(None)
            continue
        c = Poly.zero(n)
        s = Poly.zero(n)
        for i in range(n):
            c = c + row[i].partial(i)
            s = s + dV[i] * row[i]
        if not c.is_constant():
            failures.append((-1, r, "sum_i d_i L_{i,r} is not constant"))
        if not s.is_constant():
            failures.append((-1, r, "Gamma(V, log P_r) is not constant"))
        Ls.append(tuple(row))
        cs.append(c.constant_value())
        shifts.append(s.constant_value())
    if failures:
        raise BoundaryViolation(failures)
    return BoundaryData(tuple(Ls), tuple(cs), tuple(shifts))


def _divergence_terms(gamma, n) -> list[Poly]:
    return [sum((gamma[i][j].partial(j) for j in range(n)), Poly.zero(n)) for i in range(n)]


def drift_from_measure(gamma, boundary, weight: Poly | None = None) -> list[Poly]:
    """Drift of the operator symmetric w.r.t. exp(V) prod P_r^alpha_r.

    b_i = sum_j d_j g^{ij} + sum_j g^{ij} d_j V + sum_r alpha_r L_{i,r}.
    """
    n = len(gamma)
    names = tuple(f"x{i}" for i in range(n))
    if weight is None:
        weight = Poly.zero(n)
    probe = DiffusionModel(names, gamma, [Poly.zero(n)] * n, boundary, weight)
    drift = _divergence_terms(probe.gamma, n)
    dV = [weight.partial(j) for j in range(n)]
    for i in range(n):
        for j in range(n):
            if not dV[j].is_zero():
                drift[i] = drift[i] + probe.gamma[i][j] * dV[j]
    if boundary:
        bd = check_boundary_eq(probe)
        for r, (_, a) in enumerate(probe.boundary):
            if a:
                for i in range(n):
                    drift[i] = drift[i] + bd.L[r][i].scale(a)
    return drift


def density_check(m: DiffusionModel) -> list[Poly]:
    """Per-coordinate residual b_i - (drift implied by the declared density).

    All zero exactly when the model is symmetric w.r.t. exp(V) prod P_r^alpha_r.
    """
    n = m.nvars
    div = _divergence_terms(m.gamma, n)
    dV = [m.weight.partial(j) for j in range(n)]
    res = []
    bd = check_boundary_eq(m) if m.boundary else None
    for i in range(n):
        r_i = m.drift[i] - div[i]
        for j in range(n):
            if not dV[j].is_zero():
                r_i = r_i - m.gamma[i][j] * dV[j]
        if bd is not None:
            for r, (_, a) in enumerate(m.boundary):
                if a:
                    r_i = r_i - bd.L[r][i].scale(a)
        res.append(r_i)
    return res


@dataclass(frozen=True)
class HTransformResult:
    """Output of :func:`h_transform`.

    ``kappa`` is signed: ``L(h) = kappa * h`` with ``h = prod P_r^(-alpha_r)``.
    ``h_description`` lists ``(P_r, -alpha_r)``.
    """

    model: DiffusionModel
    kappa: GaussRat
    h_description: tuple
    boundary_data: BoundaryData


def h_transform(m: DiffusionModel) -> HTransformResult:
    """Doob transform by h = prod P_r^(-alpha_r).

    Gamma is unchanged, the drift becomes b_i - 2 sum_r alpha_r L_{i,r} and the
    exponents flip sign.  L(h) = kappa h with kappa = -sum_r alpha_r (c_r + shift_r).
    """
    bd = check_boundary_eq(m)
    n = m.nvars
    drift = list(m.drift)
    kappa = GaussRat(0)
    for r, (_, a) in enumerate(m.boundary):
        kappa = kappa - bd.ground_constant(r) * a
        if a:
            for i in range(n):
                drift[i] = drift[i] - bd.L[r][i].scale(2 * a)
    boundary = tuple((p, -a) for p, a in m.boundary)
    label = m.label[2:-1] if m.label.startswith("h(") and m.label.endswith(")") else f"h({m.label})"
    new = replace(m, drift=tuple(drift), boundary=boundary, label=label)
    return HTransformResult(new, kappa, tuple((p, -a) for p, a in m.boundary), bd)


def _ground_residual(m: DiffusionModel, P: Poly, const: GaussRat) -> Poly:
    n = m.nvars
    div = _divergence_terms(m.gamma, n)
    dV = [m.weight.partial(j) for j in range(n)]
    dP = [P.partial(i) for i in range(n)]
    out = Poly.zero(n)
    for i in range(n):
        beta = div[i]
        for j in range(n):
            if not dV[j].is_zero():
                beta = beta + m.gamma[i][j] * dV[j]
        out = out + P * beta * dP[i]
        for j in range(n):
            g = m.gamma[i][j]
            if g.is_zero():
                continue
            out = out + g * (P * dP[i].partial(j) - dP[i] * dP[j])
    return out - (P * P).scale(const)


def verify_ground_state(m: DiffusionModel) -> list[Poly]:
    """Residuals P_r^2 (L_0 + Gamma(V,.))(log P_r) - const_r P_r^2, one per P_r.

    All zero certifies L(h) = kappa h for every choice of exponents.
    """
    bd = check_boundary_eq(m)
    return [_ground_residual(m, P, bd.ground_constant(r)) for r, (P, _) in enumerate(m.boundary)]


def _integer_exponents(m: DiffusionModel) -> list[int]:
    out = []
    for _, a in m.boundary:
        if a.denominator != 1 or a < 0:
            raise ValueError("eigenvector shift needs nonnegative integer exponents")
        out.append(int(a))
    return out


def eigenvector_shift_check(m: DiffusionModel, f: Poly, lam1) -> Poly:
    """Residual of L*(f prod P_r^alpha_r) = -(lam1 + kappa) f prod P_r^alpha_r.

    ``L*`` is the h-transformed operator and ``f`` must satisfy L(f) = -lam1 f
    for ``m`` itself (checked first).  The product f/h is a polynomial only
    when every exponent of ``m`` is a nonnegative integer.
    """
    _check_vars(m, f)
    lam1 = GaussRat.coerce(lam1)
    ks = _integer_exponents(m)
    own = l_apply(m, f) + f.scale(lam1)
    if not own.is_zero():
        raise ValueError("f is not an eigenvector of the model with eigenvalue -lam1")
    ht = h_transform(m)
    g = f
    for (P, _), k in zip(m.boundary, ks):
        g = g * P ** k
    return l_apply(ht.model, g) + g.scale(lam1 + ht.kappa)


@dataclass
class ImageReport:
    gamma_residuals: dict
    drift_residuals: dict

    @property
    def ok(self) -> bool:
        return all(p.is_zero() for p in self.gamma_residuals.values()) and all(
            p.is_zero() for p in self.drift_residuals.values()
        )

    def failures(self) -> list[str]:
        out = [f"Gamma{k}" for k, p in self.gamma_residuals.items() if not p.is_zero()]
        out += [f"L[{k}]" for k, p in self.drift_residuals.items() if not p.is_zero()]
        return out


def image_check(
    src: DiffusionModel,
    X: Sequence[Poly],
    candidate: DiffusionModel,
    reduce: Callable[[Poly], Poly] | None = None,
) -> ImageReport:
    """Check Gamma_src(X_i, X_j) = G_ij(X) and L_src(X_i) = B_i(X) exactly.

    ``reduce`` maps source-ring residuals to a normal form (e.g. modulo group
    relations) before the zero test.
    """
    if candidate.nvars != len(X):
        raise PolyError("candidate must have one variable per map component")
    _check_vars(src, *X)
    red = reduce or (lambda p: p)
    gres, bres = {}, {}
    for i in range(len(X)):
        for j in range(i, len(X)):
            lhs = gamma_apply(src, X[i], X[j])
            rhs = candidate.gamma[i][j].compose(list(X))
            gres[(i, j)] = red(lhs - rhs)
        bres[i] = red(l_apply(src, X[i]) - candidate.drift[i].compose(list(X)))
    return ImageReport(gres, bres)


@dataclass
class OperatorMatrix:
    """Matrix of L on polynomials of total degree <= k.

    ``basis`` is in decreasing graded lex order and ``matrix[j][i]`` is the
    coefficient of ``basis[i]`` in ``L(basis[j])``; the matrix is block upper
    triangular by degree and the row of the constant monomial is zero.
    """

    basis: list
    matrix: list

    def degree_blocks(self) -> dict[int, list]:
        out: dict = {}
        degs = [sum(e) for e in self.basis]
        for d in sorted(set(degs)):
            idx = [i for i, k in enumerate(degs) if k == d]
            out[d] = [[self.matrix[a][b] for b in idx] for a in idx]
        return out

    def diagonal(self) -> list:
        return [self.matrix[i][i] for i in range(len(self.basis))]

    def block_eigenvalues(self) -> dict[int, list]:
        """Eigenvalues per degree block: exact when the block is triangular."""
        out = {}
        for d, blk in self.degree_blocks().items():
            n = len(blk)
            upper = all(not blk[a][b] for a in range(n) for b in range(a))
            lower = all(not blk[a][b] for a in range(n) for b in range(a + 1, n))
            if upper or lower:
                out[d] = [blk[a][a] for a in range(n)]
            else:
                arr = np.array([[complex(v) for v in row] for row in blk])
                out[d] = sorted(np.linalg.eigvals(arr).tolist(), key=lambda z: (z.real, z.imag))
        return out


def operator_matrix(m: DiffusionModel, k: int) -> OperatorMatrix:
    n = m.nvars
    basis = list(reversed(grlex_monomials(n, k)))
    index = {e: i for i, e in enumerate(basis)}
    mat = []
    for e in basis:
        img = l_apply(m, Poly.monomial(e))
        row = [GaussRat(0)] * len(basis)
        for te, c in img.terms.items():
            if te not in index:
                raise DegreeEscapeError(f"L maps x^{e} outside degree <= {k}")
            row[index[te]] = c
        mat.append(row)
    return OperatorMatrix(basis, mat)


def degree_warnings(m: DiffusionModel) -> list[str]:
    """Non-fatal notes when Gamma has degree > 2 or drift degree > 1."""
    notes = []
    for i in range(m.nvars):
        for j in range(i, m.nvars):
            if m.gamma[i][j].degree() > 2:
                notes.append(f"Gamma({i},{j}) has degree {m.gamma[i][j].degree()}")
        if m.drift[i].degree() > 1:
            notes.append(f"L(x_{i}) has degree {m.drift[i].degree()}")
    for note in notes:
        warnings.warn(f"{m.label}: {note}", stacklevel=2)
    return notes


def scaled(m: DiffusionModel, c, label: str | None = None) -> DiffusionModel:
    """The operator c*L: Gamma and drift multiplied by c, same density."""
    c = GaussRat.coerce(c)
    return replace(
        m,
        gamma=tuple(tuple(g.scale(c) for g in row) for row in m.gamma),
        drift=tuple(b.scale(c) for b in m.drift),
        label=label or f"{c}*{m.label}",
    )


def to_real(m: DiffusionModel) -> DiffusionModel:
    """Real (U, V) form of a model stored in conjugate-pair coordinates."""
    if m.is_real():
        return m
    polys = [p for p, _ in m.boundary] + [m.weight] + list(m.domain.positive)
    g, b, ps = complex_to_real(m.gamma, m.drift, m.kinds, polys)
    nb = len(m.boundary)
    boundary = tuple((ps[r], a) for r, (_, a) in enumerate(m.boundary))
    weight = ps[nb]
    positive = tuple(ps[nb + 1:])
    names = list(m.names)
    interior = [GaussRat.coerce(v) for v in m.domain.interior]
    seen = set()
    for i, k in enumerate(m.kinds):
        if k is None or i in seen:
            continue
        seen.update((i, k))
        z = interior[i] if interior else None
        names[i], names[k] = f"Re_{m.names[i]}", f"Im_{m.names[i]}"
        if z is not None:
            interior[i], interior[k] = GaussRat(z.re), GaussRat(z.im)
    return DiffusionModel(
        tuple(names), g, b, boundary, weight, None,
        Domain(positive, tuple(interior)), label=f"real({m.label})",
    )


def check_invariants(m: DiffusionModel, tol: float = 1e-9) -> list[str]:
    """Interior-point sanity: PSD Gamma and positive boundary polynomials."""
    problems = []
    if not m.domain.interior:
        return problems
    r = to_real(m)
    pt = [GaussRat.coerce(v) for v in r.domain.interior]
    G = np.array([[float(g.eval(pt).re) for g in row] for row in r.gamma])
    if np.linalg.eigvalsh(G).min() < -tol:
        problems.append("Gamma is not positive semidefinite at the interior point")
    for k, (P, _) in enumerate(r.boundary):
        if not P.eval(pt).re > 0:
            problems.append(f"boundary polynomial {k} is not positive at the interior point")
    for k, P in enumerate(r.domain.positive):
        if not P.eval(pt).re > 0:
            problems.append(f"domain predicate {k} is not positive at the interior point")
    return problems


# ---------------------------------------------------------------------------
# JSON model documents

def model_to_json(m: DiffusionModel) -> dict:
    fmt = lambda p: format_poly(p, m.names)  # noqa: E731
    return {
        "label": m.label,
        "vars": list(m.names),
        "kinds": list(m.kinds),
        "gamma": [[fmt(g) for g in row] for row in m.gamma],
        "drift": [fmt(b) for b in m.drift],
        "boundary": [{"poly": fmt(p), "exponent": str(a)} for p, a in m.boundary],
        "weight": fmt(m.weight),
        "domain": {
            "positive": [fmt(p) for p in m.domain.positive],
            "interior": [str(GaussRat.coerce(v)) for v in m.domain.interior],
        },
    }


def model_from_json(doc: dict | str) -> DiffusionModel:
    if isinstance(doc, str):
        doc = json.loads(doc)
    names = list(doc["vars"])
    parse = lambda s: parse_poly(str(s), names)  # noqa: E731
    dom = doc.get("domain") or {}
    return DiffusionModel(
        names=tuple(names),
        gamma=[[parse(s) for s in row] for row in doc["gamma"]],
        drift=[parse(s) for s in doc["drift"]],
        boundary=[(parse(b["poly"]), Fraction(str(b["exponent"]))) for b in doc.get("boundary", [])],
        weight=parse(doc["weight"]) if doc.get("weight") else None,
        kinds=doc.get("kinds"),
        domain=Domain(
            tuple(parse(s) for s in dom.get("positive", [])),
            tuple(GaussRat.parse(str(s)) for s in dom.get("interior", [])),
        ),
        label=doc.get("label", ""),
    )
