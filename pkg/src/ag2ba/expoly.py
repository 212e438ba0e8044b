"""Exponential polynomials P(z, E) exp<z, x>.

The coefficient field is Q(E1, E2), but all arithmetic is done on a single
numerator polynomial in the z-variables and the two exponential variables,
together with a denominator that only involves E and a Laurent shift.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .exact import (
    E_VARS,
    AffineForm,
    LaurentFrac,
    MultiPoly,
    Scalar,
    as_fraction,
    format_rational,
    parse_rational,
    poly_context,
    restrict_to_hyperplane,
    to_fmpq,
)


def _e_monomial(exps: Sequence[int], zvars: int) -> MultiPoly:
    return MultiPoly.from_terms({(0,) * zvars + tuple(exps): 1}, zvars + E_VARS)


def _e_content(p: MultiPoly, zvars: int) -> list[int]:
    if p.is_zero():
        return [0] * E_VARS
    monoms = p.raw.monoms()
    return [int(min(m[zvars + i] for m in monoms)) for i in range(E_VARS)]


def embed_laurent(f: LaurentFrac, zvars: int) -> tuple[MultiPoly, MultiPoly, tuple[int, ...]]:
    """(num, den, shift) of a LaurentFrac placed in the ring with ``zvars`` leading z-variables."""
    pos = [zvars + i for i in range(E_VARS)]
    n = zvars + E_VARS
    return f.num.embed(n, pos), f.den.embed(n, pos), tuple(f.shift)


class ExpPolynomial:
    """``E^shift * num / den * exp<z,x>``; den only involves the E-variables."""

    __slots__ = ("num", "den", "shift", "zvars")

    def __init__(
        self,
        num: MultiPoly,
        den: MultiPoly | None = None,
        shift: Sequence[int] = (0, 0),
        zvars: int = 2,
        normalize: bool = True,
    ):
        n = zvars + E_VARS
        if num.nvars != n:
            raise ValueError("numerator must live in the z+E ring")
        den = MultiPoly.constant(1, n) if den is None else den
        if den.is_zero():
            raise ZeroDivisionError("zero E-denominator")
        if den.degree_in(range(zvars)) not in (0, float("-inf")):
            raise ValueError("denominator may only involve the exponential variables")
        shift = [int(x) for x in shift]
        if num.is_zero():
            self.num, self.den, self.shift, self.zvars = num, MultiPoly.constant(1, n), (0, 0), zvars
            return
        if normalize:
            for poly, sign in ((num, 1), (den, -1)):
                c = _e_content(poly, zvars)
                if any(c):
                    for i in range(E_VARS):
                        shift[i] += sign * c[i]
            cn, cd = _e_content(num, zvars), _e_content(den, zvars)
            if any(cn):
                num = num.exact_div(_e_monomial(cn, zvars))
            if any(cd):
                den = den.exact_div(_e_monomial(cd, zvars))
            lc = den.leading_coefficient()
            if lc != 1:
                num, den = num * (1 / lc), den * (1 / lc)
        self.num, self.den, self.shift, self.zvars = num, den, tuple(shift), zvars

    # constructors
    @classmethod
    def from_poly(cls, p: MultiPoly, coeff: LaurentFrac | Scalar = 1) -> "ExpPolynomial":
        z = p.nvars
        lifted = p.embed(z + E_VARS)
        if isinstance(coeff, LaurentFrac):
            num, den, shift = embed_laurent(coeff, z)
            return cls(lifted * num, den, shift, z)
        return cls(lifted * as_fraction(coeff), zvars=z)

    @classmethod
    def from_coefficients(cls, coeffs: Mapping[tuple, LaurentFrac], zvars: int = 2) -> "ExpPolynomial":
        out = cls.zero(zvars)
        for exps, c in coeffs.items():
            out = out + cls.from_poly(MultiPoly.from_terms({tuple(exps): 1}, zvars), c)
        return out

    @classmethod
    def zero(cls, zvars: int = 2) -> "ExpPolynomial":
        return cls(MultiPoly.zero(zvars + E_VARS), zvars=zvars)

    @property
    def nvars(self) -> int:
        return self.zvars + E_VARS

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _parts(self) -> tuple[MultiPoly, MultiPoly]:
        pos = [max(s, 0) for s in self.shift]
        neg = [max(-s, 0) for s in self.shift]
        return self.num * _e_monomial(pos, self.zvars), self.den * _e_monomial(neg, self.zvars)

    # arithmetic
    def __add__(self, other: "ExpPolynomial") -> "ExpPolynomial":
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            low = [min(a, b) for a, b in zip(self.shift, other.shift)]
            a = self.num * _e_monomial([s - l for s, l in zip(self.shift, low)], self.zvars)
            b = other.num * _e_monomial([s - l for s, l in zip(other.shift, low)], self.zvars)
            return ExpPolynomial(a + b, self.den, low, self.zvars)
        a, b = self._parts()
        c, d = other._parts()
        g = MultiPoly(b.raw.gcd(d.raw), self.nvars)
        bg, dg = b.exact_div(g), d.exact_div(g)
        return ExpPolynomial(a * dg + c * bg, bg * d, (0, 0), self.zvars)

    def __neg__(self) -> "ExpPolynomial":
        return ExpPolynomial(-self.num, self.den, self.shift, self.zvars, normalize=False)

    def __sub__(self, other: "ExpPolynomial") -> "ExpPolynomial":
        return self + (-other)

    def scale(self, c: LaurentFrac | Scalar) -> "ExpPolynomial":
        if isinstance(c, LaurentFrac):
            num, den, shift = embed_laurent(c, self.zvars)
            return ExpPolynomial(
                self.num * num,
                self.den * den,
                [a + b for a, b in zip(self.shift, shift)],
                self.zvars,
            )
        return ExpPolynomial(self.num * as_fraction(c), self.den, self.shift, self.zvars, normalize=False)

    def mul_poly(self, p: MultiPoly) -> "ExpPolynomial":
        """Multiply by a polynomial in z alone."""
        return ExpPolynomial(self.num * p.embed(self.nvars), self.den, self.shift, self.zvars)

    def divide_by_laurent(self, c: LaurentFrac) -> "ExpPolynomial":
        return self.scale(LaurentFrac.constant(1, E_VARS) / c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpPolynomial):
            return NotImplemented
        a, b = self._parts()
        c, d = other._parts()
        return self.zvars == other.zvars and a * d == c * b

    __hash__ = None

    # structure
    @property
    def z_degree(self):
        return self.num.degree_in(range(self.zvars))

    def z_homogeneous(self, d: int) -> "ExpPolynomial":
        return ExpPolynomial(self.num.homogeneous_part(d, range(self.zvars)), self.den, self.shift, self.zvars)

    def translate(self, delta: Sequence[Scalar], e_exp: Sequence[int]) -> "ExpPolynomial":
        """The function psi(z + tau) for a shift with u-displacement delta and E-exponent e_exp."""
        return ExpPolynomial(
            shift_z(self.num, delta, self.zvars),
            self.den,
            [a + b for a, b in zip(self.shift, e_exp)],
            self.zvars,
            normalize=False,
        )

    def coefficients(self) -> dict[tuple, LaurentFrac]:
        """Map z-exponent to its coefficient in Q(E)."""
        grouped: dict[tuple, dict] = {}
        for exps, c in self.num.terms().items():
            grouped.setdefault(exps[: self.zvars], {})[exps[self.zvars :]] = c
        den = LaurentFrac(self.den.compose(_e_projection(self.zvars)))
        out = {}
        for zexp, terms in grouped.items():
            num = LaurentFrac(MultiPoly.from_terms(terms, E_VARS), shift=self.shift)
            out[zexp] = num / den
        return out

    def specialize(self, values: Sequence[Scalar]) -> MultiPoly:
        """Substitute rational values for E1, E2, giving a polynomial in z."""
        vals = [as_fraction(v) for v in values]
        z = self.zvars
        images = [MultiPoly.variable(i, z) for i in range(z)] + [MultiPoly.constant(v, z) for v in vals]
        dval = self.den.compose(images).constant_value()
        if dval == 0:
            raise ZeroDivisionError("specialization hits a zero of the E-denominator")
        factor = Fraction(1)
        for v, s in zip(vals, self.shift):
            factor *= v**s
        return self.num.compose(images) * (factor / dval)

    def restricted_numerator(self, ell: AffineForm) -> MultiPoly:
        return restrict_to_hyperplane(self.num, ell, self.zvars)

    def reduced(self) -> "ExpPolynomial":
        """Cancel the gcd of numerator and E-denominator."""
        if self.den.is_constant():
            return self
        g = MultiPoly(self.num.raw.gcd(self.den.raw), self.nvars)
        if g.is_constant():
            return self
        return ExpPolynomial(self.num.exact_div(g), self.den.exact_div(g), self.shift, self.zvars)

    def has_laurent_coefficients(self) -> bool:
        return self.reduced().den.is_constant()

    # serialization
    def to_json(self) -> dict:
        num = [
            [list(e[: self.zvars]) + [e[self.zvars + i] + self.shift[i] for i in range(E_VARS)], format_rational(c)]
            for e, c in self.num.sorted_terms()
        ]
        den = [[list(e[self.zvars :]), format_rational(c)] for e, c in self.den.sorted_terms()]
        return {"zvars": self.zvars, "num": num, "den": den}

    @classmethod
    def from_json(cls, data: Mapping) -> "ExpPolynomial":
        z = int(data["zvars"])
        n = z + E_VARS
        entries = [(tuple(int(x) for x in e), parse_rational(c)) for e, c in data["num"]]
        low = [min((e[z + i] for e, _ in entries), default=0) for i in range(E_VARS)]
        terms = {}
        for e, c in entries:
            terms[e[:z] + tuple(e[z + i] - low[i] for i in range(E_VARS))] = c
        num = MultiPoly.from_terms(terms, n)
        den = MultiPoly.from_terms({(0,) * z + tuple(int(x) for x in e): parse_rational(c) for e, c in data["den"]}, n)
        return cls(num, den, low, z)

    def __repr__(self) -> str:
        return f"ExpPolynomial(E^{list(self.shift)} * ({self.num}) / ({self.den}))"


def _e_projection(zvars: int) -> list[MultiPoly]:
    return [MultiPoly.zero(E_VARS)] * zvars + [MultiPoly.variable(i, E_VARS) for i in range(E_VARS)]


def shift_z(p: MultiPoly, delta: Sequence[Scalar], zvars: int) -> MultiPoly:
    """p(u + delta, E) for a polynomial in z- and E-variables."""
    if all(d == 0 for d in delta):
        return p
    ctx = poly_context(p.nvars)
    images = [ctx.gen(i) + to_fmpq(delta[i]) if i < zvars else ctx.gen(i) for i in range(p.nvars)]
    return MultiPoly(p.raw.compose(*images, ctx=ctx), p.nvars)


def e_monomial(exps: Sequence[int], zvars: int) -> MultiPoly:
    return _e_monomial(exps, zvars)
