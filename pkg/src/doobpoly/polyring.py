"""Exact sparse multivariate polynomials over the Gaussian rationals.

Coefficients are :class:`GaussRat` values (pairs of :class:`fractions.Fraction`),
terms are stored in a dict keyed by exponent tuples.  Nothing here ever rounds;
floating point only appears in :meth:`Poly.to_complex_table` which is used by the
simulators.

The textual syntax accepted by :func:`parse_poly` and produced by
:func:`format_poly` is::

    2*x0^2*x1 - 1/2*x2 + (3/4+1/5*i)*x0 + 7

Variables default to ``x0 .. x{n-1}``; any identifier list may be passed as
aliases.  ``i`` is reserved for the imaginary unit.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GaussRat",
    "Poly",
    "PolyError",
    "ConjugateSymmetryError",
    "divexact",
    "det",
    "discriminant_sylvester",
    "elementary_symmetric",
    "complex_to_real",
    "real_to_complex",
    "parse_poly",
    "format_poly",
    "grlex_monomials",
]


class PolyError(ValueError):
    """Shape or variable-count mismatch between polynomial operands."""


class ConjugateSymmetryError(ValueError):
    """Data in conjugate-pair coordinates is not the complexification of real data."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        # Only exactly representable floats are accepted silently.
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussRat:
    """Exact complex number ``re + im*i`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, complex):
            return cls(Fraction(x.real), Fraction(x.imag))
        return cls(x)

    @classmethod
    def parse(cls, text: str) -> "GaussRat":
        p = parse_poly(text, [])
        if p.is_zero():
            return cls()
        if not p.is_constant():
            raise ValueError(f"not a constant: {text!r}")
        return p.constant_value()

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return o
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return o
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return o
        return GaussRat(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return o
        if not self.im and not o.im:
            return GaussRat(self.re * o.re)
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return o
        if not o:
            raise ZeroDivisionError("GaussRat division by zero")
        if not o.im:
            return GaussRat(self.re / o.re, self.im / o.re)
        n = o.re * o.re + o.im * o.im
        return GaussRat((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussRat(1) / (self ** (-k))
        out = GaussRat(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        o = _as_gr(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __float__(self):
        if self.im:
            raise TypeError("complex GaussRat has no float value")
        return float(self.re)

    def __repr__(self):
        return f"GaussRat({self})"

    def __str__(self):
        return _format_coeff(self)


def _as_gr(x):
    if isinstance(x, GaussRat):
        return x
    if isinstance(x, (int, Fraction, Rational)):
        return GaussRat(x)
    if isinstance(x, complex):
        return GaussRat.coerce(x)
    return NotImplemented


_ZERO = GaussRat(0)
_ONE = GaussRat(1)


def _grlex_key(e: tuple) -> tuple:
    return (sum(e), e)


class Poly:
    """Immutable sparse polynomial in ``nvars`` variables.

    ``terms`` maps exponent tuples to nonzero :class:`GaussRat` coefficients.
    Two polynomials are equal iff they have the same ``nvars`` and term map.
    """

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: dict | None = None, *, _trusted: bool = False):
        self.nvars = int(nvars)
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            for e, c in (terms or {}).items():
                e = tuple(int(k) for k in e)
                if len(e) != self.nvars:
                    raise PolyError(f"exponent {e} has wrong length for {self.nvars} variables")
                if any(k < 0 for k in e):
                    raise PolyError(f"negative exponent {e}")
                c = GaussRat.coerce(c)
                if c:
                    clean[e] = clean.get(e, _ZERO) + c
            self.terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    # constructors -----------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars, {}, _trusted=True)

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        c = GaussRat.coerce(c)
        if not c:
            return cls.zero(nvars)
        return cls(nvars, {(0,) * nvars: c}, _trusted=True)

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): _ONE}, _trusted=True)

    @classmethod
    def monomial(cls, exps: Sequence[int], c=1) -> "Poly":
        return cls(len(exps), {tuple(exps): c})

    @classmethod
    def gens(cls, nvars: int) -> list["Poly"]:
        return [cls.var(nvars, i) for i in range(nvars)]

    # basic predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> GaussRat:
        """Coefficient of the constant monomial."""
        return self.terms.get((0,) * self.nvars, _ZERO)

    def is_real(self) -> bool:
        return all(c.im == 0 for c in self.terms.values())

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, i: int) -> int:
        if not self.terms:
            return -1
        return max(e[i] for e in self.terms)

    def leading_term(self) -> tuple[tuple, GaussRat]:
        """Leading (exponent, coefficient) in graded lexicographic order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def sorted_terms(self) -> list[tuple[tuple, GaussRat]]:
        """Terms in decreasing graded lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def homogeneous_part(self, k: int) -> "Poly":
        return Poly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == k}, _trusted=True)

    # arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise PolyError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
            return other
        c = _as_gr(other)
        if c is NotImplemented:
            return NotImplemented
        return Poly.const(self.nvars, c)

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o.terms:
            return self
        t = dict(self.terms)
        for e, c in o.terms.items():
            s = t.get(e)
            if s is None:
                t[e] = c
            else:
                s = s + c
                if s:
                    t[e] = s
                else:
                    del t[e]
        return Poly(self.nvars, t, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def scale(self, c) -> "Poly":
        c = GaussRat.coerce(c)
        if not c:
            return Poly.zero(self.nvars)
        return Poly(self.nvars, {e: v * c for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _as_gr(other)
            if c is NotImplemented:
                return c
            return self.scale(c)
        o = self._coerce(other)
        if not self.terms or not o.terms:
            return Poly.zero(self.nvars)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = t.get(e)
                t[e] = c1 * c2 if v is None else v + c1 * c2
        return Poly(self.nvars, {e: c for e, c in t.items() if c}, _trusted=True)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, Poly):
            q = divexact(self, other)
            if q is None:
                raise ArithmeticError("polynomial is not exactly divisible")
            return q
        c = _as_gr(other)
        if c is NotImplemented:
            return c
        return self.scale(_ONE / c)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial power must be a nonnegative integer")
        out = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        c = _as_gr(other)
        if c is NotImplemented:
            return NotImplemented
        return self.terms == Poly.const(self.nvars, c).terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # calculus ---------------------------------------------------------------
    def partial(self, i: int) -> "Poly":
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range for {self.nvars} variables")
        t = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                t[ne] = c * k
        return Poly(self.nvars, t, _trusted=True)

    def conj(self) -> "Poly":
        """Conjugate every coefficient (variables untouched)."""
        return Poly(self.nvars, {e: c.conjugate() for e, c in self.terms.items()}, _trusted=True)

    # evaluation / substitution ----------------------------------------------
    def eval(self, point: Sequence) -> GaussRat:
        if len(point) != self.nvars:
            raise PolyError(f"point has length {len(point)}, expected {self.nvars}")
        pt = [GaussRat.coerce(v) for v in point]
        cache: dict = {}
        total = _ZERO
        for e, c in self.terms.items():
            m = c
            for j, k in enumerate(e):
                if k:
                    key = (j, k)
                    pw = cache.get(key)
                    if pw is None:
                        pw = pt[j] ** k
                        cache[key] = pw
                    m = m * pw
            total = total + m
        return total

    def __call__(self, *point):
        return self.eval(point)

    def compose(self, subs: Sequence["Poly"]) -> "Poly":
        """Substitute ``subs[j]`` for variable ``j``; result lives in ``subs``' ring."""
        if len(subs) != self.nvars:
            raise PolyError(f"need {self.nvars} substitutions, got {len(subs)}")
        if not subs:
            raise PolyError("cannot compose a 0-variable polynomial without a target ring")
        n = subs[0].nvars
        if any(s.nvars != n for s in subs):
            raise PolyError("substitutions must share a variable count")
        powers: dict = {}

        def pw(j, k):
            key = (j, k)
            v = powers.get(key)
            if v is None:
                v = subs[j] ** k
                powers[key] = v
            return v

        out = Poly.zero(n)
        for e, c in self.terms.items():
            m = Poly.const(n, c)
            for j, k in enumerate(e):
                if k:
                    m = m * pw(j, k)
            out = out + m
        return out

    def extend(self, nvars: int, positions: Sequence[int] | None = None) -> "Poly":
        """Embed into a ring with ``nvars`` variables; old var j goes to ``positions[j]``."""
        if positions is None:
            positions = list(range(self.nvars))
        if len(positions) != self.nvars:
            raise PolyError("positions must have one entry per variable")
        t = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for j, k in enumerate(e):
                ne[positions[j]] += k
            t[tuple(ne)] = t.get(tuple(ne), _ZERO) + c
        return Poly(nvars, t)

    def coefficients_in(self, idx: Sequence[int]) -> dict[tuple, "Poly"]:
        """Split on the variables ``idx``: maps their exponents to coefficient polys.

        The coefficient polynomials keep the full variable count (the ``idx``
        exponents are zeroed), which keeps them composable with the original ring.
        """
        idx = list(idx)
        out: dict = {}
        for e, c in self.terms.items():
            key = tuple(e[j] for j in idx)
            ne = list(e)
            for j in idx:
                ne[j] = 0
            d = out.setdefault(key, {})
            d[tuple(ne)] = d.get(tuple(ne), _ZERO) + c
        return {k: Poly(self.nvars, v) for k, v in out.items()}

    def drop_vars(self, keep: Sequence[int]) -> "Poly":
        """Project onto the variables ``keep``; the others must not occur."""
        keep = list(keep)
        kset = set(keep)
        t = {}
        for e, c in self.terms.items():
            if any(k for j, k in enumerate(e) if j not in kset):
                raise PolyError("polynomial depends on a dropped variable")
            t[tuple(e[j] for j in keep)] = c
        return Poly(len(keep), t, _trusted=True)

    def to_complex_table(self) -> tuple[np.ndarray, np.ndarray]:
        """(exponents int array, complex coefficient array) for numeric evaluation."""
        if not self.terms:
            return np.zeros((0, self.nvars), dtype=np.int64), np.zeros(0, dtype=complex)
        exps = np.array(list(self.terms.keys()), dtype=np.int64).reshape(len(self.terms), self.nvars)
        coefs = np.array([complex(c) for c in self.terms.values()])
        return exps, coefs

    def eval_numeric(self, points: np.ndarray) -> np.ndarray:
        """Vectorised float/complex evaluation on an (n, nvars) array."""
        pts = np.asarray(points)
        exps, coefs = self.to_complex_table()
        if not len(coefs):
            return np.zeros(pts.shape[0], dtype=complex if np.iscomplexobj(pts) else float)
        mono = np.ones((pts.shape[0], len(coefs)), dtype=np.result_type(pts, complex))
        for j in range(self.nvars):
            col = exps[:, j]
            if col.any():
                mono = mono * pts[:, j:j + 1] ** col[None, :]
        out = mono @ coefs
        if not np.iscomplexobj(pts) and self.is_real():
            return out.real
        return out

    # display ----------------------------------------------------------------
    def __repr__(self):
        return f"Poly({self.nvars}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def divexact(num: Poly, den: Poly) -> Poly | None:
    """Exact quotient ``num / den`` or ``None`` when ``den`` does not divide ``num``.

    Repeated leading-term cancellation in graded lex order; if the division is
    exact every leading term of the running remainder is divisible by the
    leading term of ``den``.
    """
    if num.nvars != den.nvars:
        raise PolyError(f"variable count mismatch: {num.nvars} vs {den.nvars}")
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    n = num.nvars
    le, lc = den.leading_term()
    den_terms = list(den.terms.items())
    rem = dict(num.terms)
    quot: dict = {}
    while rem:
        e = max(rem, key=_grlex_key)
        c = rem[e]
        qe = tuple(a - b for a, b in zip(e, le))
        if any(k < 0 for k in qe):
            return None
        qc = c / lc
        quot[qe] = qc
        for de, dc in den_terms:
            te = tuple(a + b for a, b in zip(qe, de))
            v = rem.get(te, _ZERO) - qc * dc
            if v:
                rem[te] = v
            else:
                rem.pop(te, None)
    return Poly(n, quot, _trusted=True)


# ---------------------------------------------------------------------------
# determinants

def _check_square(m):
    n = len(m)
    if any(len(row) != n for row in m):
        raise PolyError("determinant needs a square matrix")
    return n


def _cofactor_det(m, nvars):
    n = len(m)
    if n == 0:
        return Poly.const(nvars, 1)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = Poly.zero(nvars)
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _cofactor_det(minor, nvars)
        total = total + term if j % 2 == 0 else total - term
    return total


def _bareiss_det(m, nvars):
    a = [list(row) for row in m]
    n = len(a)
    sign = 1
    prev = Poly.const(nvars, 1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Poly.zero(nvars)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                q = divexact(num, prev)
                if q is None:  # pragma: no cover - Sylvester identity guarantees exactness
                    raise ArithmeticError("fraction-free elimination produced an inexact step")
                a[i][j] = q
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def det(m: Sequence[Sequence[Poly]]) -> Poly:
    """Exact determinant: cofactor expansion up to 4x4, fraction-free elimination above."""
    n = _check_square(m)
    if n == 0:
        raise PolyError("empty matrix has no variable count")
    nvars = m[0][0].nvars
    if any(e.nvars != nvars for row in m for e in row):
        raise PolyError("matrix entries must share a variable count")
    if n <= 4:
        return _cofactor_det(m, nvars)
    return _bareiss_det(m, nvars)


def discriminant_sylvester(coeffs: Sequence[Poly], d: int) -> Poly:
    """Discriminant of the monic ``X^d + a_{d-1} X^{d-1} + ... + a_0``.

    ``coeffs`` lists ``a_0 .. a_{d-1}``.  Computed as ``(-1)^{d(d-1)/2}`` times
    the ``(2d-1)``-square Sylvester determinant of ``P`` and ``P'``.
    """
    if d < 1:
        raise ValueError("discriminant needs degree d >= 1")
    if len(coeffs) != d:
        raise PolyError(f"expected {d} coefficients, got {len(coeffs)}")
    nvars = coeffs[0].nvars
    one = Poly.const(nvars, 1)
    zero = Poly.zero(nvars)
    if d == 1:
        return one
    # descending coefficient lists
    p = [one] + [coeffs[k] for k in range(d - 1, -1, -1)]            # length d+1
    dp = [one.scale(d)] + [coeffs[k].scale(k) for k in range(d - 1, 0, -1)]  # length d
    size = 2 * d - 1
    rows = []
    for r in range(d - 1):
        rows.append([zero] * r + p + [zero] * (size - r - len(p)))
    for r in range(d):
        rows.append([zero] * r + dp + [zero] * (size - r - len(dp)))
    res = det(rows)
    return res if (d * (d - 1) // 2) % 2 == 0 else -res


def elementary_symmetric(xs: Sequence[Poly], k: int) -> Poly:
    """k-th elementary symmetric polynomial of ``xs``."""
    nvars = xs[0].nvars
    e = [Poly.const(nvars, 1)] + [Poly.zero(nvars)] * k
    for x in xs:
        for j in range(k, 0, -1):
            e[j] = e[j] + e[j - 1] * x
    return e[k]


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for k in range(total + 1):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def grlex_monomials(nvars: int, max_degree: int) -> list[tuple]:
    """All exponent tuples of total degree <= max_degree, increasing graded lex."""
    if nvars == 0:
        return [()]
    out = []
    for deg in range(max_degree + 1):
        out.extend(sorted(_compositions(deg, nvars)))
    return out


# ---------------------------------------------------------------------------
# conjugate-pair coordinates

def _pairs_from_kinds(kinds: Sequence) -> list[tuple[int, int]]:
    pairs = []
    for i, k in enumerate(kinds):
        if k is None:
            continue
        if not 0 <= k < len(kinds) or kinds[k] != i or k == i:
            raise ConjugateSymmetryError(f"variable {i} has inconsistent conjugate partner {k}")
        if i < k:
            pairs.append((i, k))
    return pairs


def conj_map(p: Poly, kinds: Sequence) -> Poly:
    """Complex conjugate of ``p`` as a function: conjugate coefficients and swap partners."""
    perm = [i if k is None else k for i, k in enumerate(kinds)]
    t = {}
    for e, c in p.terms.items():
        ne = [0] * p.nvars
        for j, k in enumerate(e):
            ne[perm[j]] = k
        t[tuple(ne)] = c.conjugate()
    return Poly(p.nvars, t, _trusted=True)


def check_conjugate_symmetry(gamma, drift, kinds, polys=()) -> None:
    """Raise :class:`ConjugateSymmetryError` unless the data is real in disguise."""
    n = len(kinds)
    perm = [i if k is None else k for i, k in enumerate(kinds)]
    for a in range(n):
        for b in range(n):
            if gamma[perm[a]][perm[b]] != conj_map(gamma[a][b], kinds):
                raise ConjugateSymmetryError(f"Gamma entry ({a},{b}) breaks conjugate symmetry")
        if drift[perm[a]] != conj_map(drift[a], kinds):
            raise ConjugateSymmetryError(f"drift entry {a} breaks conjugate symmetry")
    for r, p in enumerate(polys):
        if p != conj_map(p, kinds):
            raise ConjugateSymmetryError(f"polynomial {r} is not real-valued")


def _linear_change(gamma, drift, T):
    """Gamma' = T Gamma T^t and b' = T b for a constant GaussRat matrix T."""
    n = len(T)
    nvars = drift[0].nvars if drift else gamma[0][0].nvars
    tg = [[Poly.zero(nvars) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for k in range(n):
            if T[i][k]:
                for j in range(n):
                    tg[i][j] = tg[i][j] + gamma[k][j].scale(T[i][k])
    g2 = [[Poly.zero(nvars) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if T[j][k]:
                    g2[i][j] = g2[i][j] + tg[i][k].scale(T[j][k])
    b2 = []
    for i in range(n):
        acc = Poly.zero(nvars)
        for k in range(n):
            if T[i][k]:
                acc = acc + drift[k].scale(T[i][k])
        b2.append(acc)
    return g2, b2


def complex_to_real(gamma, drift, kinds, polys=()):
    """Rewrite conjugate-pair coordinates ``(Z, Zbar)`` as real ``(U, V)``, ``Z = U + iV``.

    ``kinds[i]`` is ``None`` for a real variable or the index of its conjugate
    partner.  For each pair ``(i, j)`` with ``i < j``, ``U`` takes slot ``i`` and
    ``V`` slot ``j``.  Returns ``(gamma, drift, polys)`` with real coefficients.
    """
    n = len(kinds)
    pairs = _pairs_from_kinds(kinds)
    check_conjugate_symmetry(gamma, drift, kinds, polys)
    half = GaussRat(Fraction(1, 2))
    T = [[_ZERO] * n for _ in range(n)]
    for i in range(n):
        if kinds[i] is None:
            T[i][i] = _ONE
    for i, j in pairs:
        # U = (Z + Zb)/2 ; V = (Z - Zb)/(2i) = -i/2 Z + i/2 Zb
        T[i][i] = half
        T[i][j] = half
        T[j][i] = GaussRat(0, Fraction(-1, 2))
        T[j][j] = GaussRat(0, Fraction(1, 2))
    g2, b2 = _linear_change(gamma, drift, T)
    # old variables in terms of the new ones: Z = U + iV, Zb = U - iV
    nv = Poly.gens(n)
    subs = list(nv)
    for i, j in pairs:
        subs[i] = nv[i] + nv[j].scale(GaussRat(0, 1))
        subs[j] = nv[i] - nv[j].scale(GaussRat(0, 1))
    g3 = [[g2[a][b].compose(subs) for b in range(n)] for a in range(n)]
    b3 = [b.compose(subs) for b in b2]
    p3 = [p.compose(subs) for p in polys]
    for a in range(n):
        for b in range(n):
            if not g3[a][b].is_real():
                raise ConjugateSymmetryError(f"real Gamma entry ({a},{b}) is not real")
        if not b3[a].is_real():
            raise ConjugateSymmetryError(f"real drift entry {a} is not real")
    for r, p in enumerate(p3):
        if not p.is_real():
            raise ConjugateSymmetryError(f"polynomial {r} is not real after substitution")
    return g3, b3, p3


def real_to_complex(gamma, drift, pairs, polys=()):
    """Inverse of :func:`complex_to_real`: ``(U, V)`` slots become ``(Z, Zbar)``."""
    n = len(drift)
    T = [[_ZERO] * n for _ in range(n)]
    paired = {i for p in pairs for i in p}
    for i in range(n):
        if i not in paired:
            T[i][i] = _ONE
    for i, j in pairs:
        T[i][i] = _ONE
        T[i][j] = GaussRat(0, 1)
        T[j][i] = _ONE
        T[j][j] = GaussRat(0, -1)
    g2, b2 = _linear_change(gamma, drift, T)
    nv = Poly.gens(n)
    subs = list(nv)
    half = GaussRat(Fraction(1, 2))
    for i, j in pairs:
        subs[i] = (nv[i] + nv[j]).scale(half)                       # U = (Z + Zb)/2
        subs[j] = (nv[i] - nv[j]).scale(GaussRat(0, Fraction(-1, 2)))  # V = (Z - Zb)/(2i)
    g3 = [[g2[a][b].compose(subs) for b in range(n)] for a in range(n)]
    b3 = [b.compose(subs) for b in b2]
    p3 = [p.compose(subs) for p in polys]
    return g3, b3, p3


# ---------------------------------------------------------------------------
# text syntax

def _format_frac(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _format_coeff(c: GaussRat) -> str:
    if not c.im:
        return _format_frac(c.re)
    if not c.re:
        return f"{_format_frac(c.im)}*i"
    im = c.im
    sign = "+" if im > 0 else "-"
    return f"{_format_frac(c.re)}{sign}{_format_frac(abs(im))}*i"


def _default_names(n):
    return [f"x{j}" for j in range(n)]


def format_poly(p: Poly, names: Sequence[str] | None = None) -> str:
    """Canonical text (decreasing graded lex); ``parse_poly`` inverts it exactly."""
    names = list(names) if names is not None else _default_names(p.nvars)
    if not p.terms:
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        mono = "*".join(
            names[j] if k == 1 else f"{names[j]}^{k}" for j, k in enumerate(e) if k
        )
        if c.im:
            body = f"({_format_coeff(c)})"
            sign = "+"
            body = body if not mono else f"{body}*{mono}"
        else:
            sign = "-" if c.re < 0 else "+"
            a = abs(c.re)
            if not mono:
                body = _format_frac(a)
            elif a == 1:
                body = mono
            else:
                body = f"{_format_frac(a)}*{mono}"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for s, b in parts[1:]:
        out += f" {s} {b}"
    return out


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial near {text[pos:pos + 10]!r}")
        num, ident, op = m.groups()
        if num is not None:
            out.append(("num", int(num)))
        elif ident is not None:
            out.append(("id", ident))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def parse_poly(text: str, names: Sequence[str] | int | None = None) -> Poly:
    """Parse the textual syntax; ``names`` is a list of aliases or a variable count."""
    if isinstance(names, int):
        names = _default_names(names)
    names = list(names) if names is not None else None
    toks = _tokenize(text)
    pos = 0

    if names is None:
        idx = [int(t[1][1:]) for t in toks if t[0] == "id" and re.fullmatch(r"x\d+", t[1])]
        names = _default_names(max(idx) + 1 if idx else 0)
    lookup = {nm: j for j, nm in enumerate(names)}
    if "i" in lookup:
        raise ValueError("'i' is reserved for the imaginary unit")
    nvars = len(names)

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(kind=None, val=None):
        nonlocal pos
        t = peek()
        if t[0] is None or (kind and t[0] != kind) or (val and t[1] != val):
            raise ValueError(f"unexpected token {t[1]!r} in {text!r}")
        pos += 1
        return t

    def expr():
        v = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            r = term()
            v = v + r if op == "+" else v - r
        return v

    def term():
        v = unary()
        while peek() in (("op", "*"), ("op", "/")):
            op = take()[1]
            r = unary()
            if op == "*":
                v = v * r
            else:
                if not r.is_constant() or r.is_zero():
                    raise ValueError("division only by nonzero constants")
                v = v.scale(_ONE / r.constant_value())
        return v

    def unary():
        if peek() == ("op", "-"):
            take()
            return -unary()
        if peek() == ("op", "+"):
            take()
            return unary()
        return power()

    def power():
        v = atom()
        if peek() == ("op", "^"):
            take()
            k = take("num")[1]
            v = v ** k
        return v

    def atom():
        t = peek()
        if t[0] == "num":
            take()
            return Poly.const(nvars, t[1])
        if t[0] == "id":
            take()
            if t[1] == "i":
                return Poly.const(nvars, GaussRat(0, 1))
            if t[1] not in lookup:
                raise ValueError(f"unknown variable {t[1]!r}")
            return Poly.var(nvars, lookup[t[1]])
        if t == ("op", "("):
            take()
            v = expr()
            take("op", ")")
            return v
        raise ValueError(f"unexpected token {t[1]!r} in {text!r}")

    if not toks:
        raise ValueError("empty polynomial text")
    result = expr()
    if pos != len(toks):
        raise ValueError(f"trailing input in {text!r}")
    return result


def product(polys: Iterable[Poly], nvars: int) -> Poly:
    out = Poly.const(nvars, 1)
    for p in polys:
        out = out * p
    return out
