"""Exact rational arithmetic, sparse polynomials and affine-factored rational functions.

Polynomials are thin immutable wrappers around FLINT's ``fmpq_mpoly``.  Every
rational function used downstream has a denominator that is a product of
affine-linear forms, so denominators are stored factored and are only ever
cancelled against those factors.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

import flint
from flint.utils.flint_exceptions import DomainError

NEG_INF = float("-inf")

Scalar = int | Fraction


class NotDivisible(ArithmeticError):
    """Raised when an affine form does not divide a polynomial.

    ``witness`` is the (nonzero) restriction of the dividend to the zero locus.
    """

    def __init__(self, ell: "AffineForm", witness: "MultiPoly"):
        super().__init__(f"{ell} does not divide the polynomial; restriction {witness} != 0")
        self.ell = ell
        self.witness = witness


class NotSimplePole(ArithmeticError):
    def __init__(self, ell: "AffineForm", multiplicity: int):
        super().__init__(f"pole along {ell} has multiplicity {multiplicity}")
        self.ell = ell
        self.multiplicity = multiplicity


class NotAPole(ArithmeticError):
    """The hyperplane is not a pole of the function; its residue there is zero."""

    def __init__(self, ell: "AffineForm"):
        super().__init__(f"{ell} is not a pole")
        self.ell = ell


# ---------------------------------------------------------------- rationals


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, flint.fmpz):
        return Fraction(int(x))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def to_fmpq(x) -> flint.fmpq:
    f = as_fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


def format_rational(x) -> str:
    f = as_fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_rational(s: str) -> Fraction:
    s = s.strip().replace("−", "-")
    if not s:
        raise ValueError("empty rational string")
    if "." in s or "e" in s.lower():
        raise ValueError(f"rational strings must be of the form p or p/q, got {s!r}")
    return Fraction(s)


# ------------------------------------------------------------- polynomials


@lru_cache(maxsize=None)
def poly_context(nvars: int) -> flint.fmpq_mpoly_ctx:
    return flint.fmpq_mpoly_ctx.get(tuple(f"x{i}" for i in range(nvars)), "deglex")


def grlex_key(exps: Sequence[int]) -> tuple:
    """Sort key putting terms in descending graded-lex order."""
    return (-sum(exps), tuple(-e for e in exps))


class MultiPoly:
    """Sparse polynomial with rational coefficients in a fixed number of variables."""

    __slots__ = ("raw", "nvars")

    def __init__(self, raw: flint.fmpq_mpoly, nvars: int):
        self.raw = raw
        self.nvars = nvars

    # constructors
    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(poly_context(nvars).from_dict({}), nvars)

    @classmethod
    def constant(cls, c: Scalar, nvars: int) -> "MultiPoly":
        return cls(poly_context(nvars).constant(to_fmpq(c)), nvars)

    @classmethod
    def variable(cls, i: int, nvars: int) -> "MultiPoly":
        return cls(poly_context(nvars).gen(i), nvars)

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, Scalar], nvars: int) -> "MultiPoly":
        data = {}
        for exps, c in terms.items():
            if len(exps) != nvars:
                raise ValueError("exponent vector length does not match variable count")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent in polynomial term")
            if c != 0:
                data[tuple(exps)] = to_fmpq(c)
        return cls(poly_context(nvars).from_dict(data), nvars)

    @classmethod
    def linear(cls, coeffs: Sequence[Scalar], constant: Scalar = 0) -> "MultiPoly":
        n = len(coeffs)
        terms = {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(coeffs)}
        terms[(0,) * n] = constant
        return cls.from_terms(terms, n)

    def _wrap(self, raw) -> "MultiPoly":
        return MultiPoly(raw, self.nvars)

    def _coerce(self, other) -> flint.fmpq_mpoly:
        if isinstance(other, MultiPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable counts differ")
            return other.raw
        return poly_context(self.nvars).constant(to_fmpq(other))

    # inspection
    def terms(self) -> dict[tuple, Fraction]:
        return {tuple(int(x) for x in e): as_fraction(c) for e, c in self.raw.to_dict().items()}

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        return sorted(self.terms().items(), key=lambda t: grlex_key(t[0]))

    def __len__(self) -> int:
        return len(self.raw)

    @property
    def degree(self):
        return NEG_INF if self.raw.is_zero() else int(self.raw.total_degree())

    def degree_in(self, variables: Iterable[int]):
        """Maximal total degree in the given subset of variables."""
        if self.raw.is_zero():
            return NEG_INF
        idx = list(variables)
        return int(max(sum(e[i] for i in idx) for e in self.raw.monoms()))

    def is_zero(self) -> bool:
        return self.raw.is_zero()

    def is_constant(self) -> bool:
        return self.raw.is_constant()

    def constant_value(self) -> Fraction:
        if not self.raw.is_constant():
            raise ValueError("polynomial is not constant")
        return as_fraction(self.raw.coefficient(0)) if not self.raw.is_zero() else Fraction(0)

    def leading_coefficient(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return self.sorted_terms()[0][1]

    def homogeneous_part(self, d: int, variables: Iterable[int] | None = None) -> "MultiPoly":
        idx = range(self.nvars) if variables is None else list(variables)
        keep = {e: c for e, c in self.raw.to_dict().items() if sum(e[i] for i in idx) == d}
        return self._wrap(poly_context(self.nvars).from_dict(keep))

    # arithmetic
    def __add__(self, other):
        return self._wrap(self.raw + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.raw - self._coerce(other))

    def __rsub__(self, other):
        return self._wrap(self._coerce(other) - self.raw)

    def __neg__(self):
        return self._wrap(-self.raw)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            return self._wrap(self.raw * self._coerce(other))
        return self._wrap(self.raw * to_fmpq(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        return self._wrap(self.raw**k)

    def exact_div(self, other: "MultiPoly") -> "MultiPoly":
        """Exact quotient; raises ``ArithmeticError`` when the division leaves a remainder."""
        try:
            return self._wrap(self.raw / self._coerce(other))
        except DomainError as exc:
            raise ArithmeticError("division is not exact") from exc

    def divides(self, other: "MultiPoly") -> bool:
        try:
            other.exact_div(self)
        except ArithmeticError:
            return False
        return True

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.raw == other.raw
        if isinstance(other, (int, Fraction)):
            return self.raw == self._coerce(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, tuple(self.sorted_terms())))

    # substitution
    def compose(self, images: Sequence["MultiPoly"]) -> "MultiPoly":
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0].nvars
        ctx = poly_context(target)
        return MultiPoly(self.raw.compose(*[g.raw for g in images], ctx=ctx), target)

    def shift(self, delta: Sequence[Scalar]) -> "MultiPoly":
        return poly_shift(self, delta)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        if len(point) != self.nvars:
            raise ValueError("point has the wrong dimension")
        if self.nvars == 0:
            return self.constant_value()
        return as_fraction(self.raw(*[to_fmpq(v) for v in point]))

    def derivative(self, i: int) -> "MultiPoly":
        return self._wrap(self.raw.derivative(i))

    def embed(self, nvars: int, positions: Sequence[int] | None = None) -> "MultiPoly":
        """Re-express in a larger ring, sending variable i to variable positions[i]."""
        pos = list(range(self.nvars)) if positions is None else list(positions)
        gens = [MultiPoly.variable(j, nvars) for j in pos]
        if self.nvars == 0:
            return MultiPoly.constant(self.constant_value(), nvars)
        return self.compose(gens)

    # serialization
    def to_json(self) -> dict:
        return {
            "vars": self.nvars,
            "terms": [[list(e), format_rational(c)] for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiPoly":
        n = int(data["vars"])
        terms = {}
        for exps, c in data["terms"]:
            terms[tuple(int(e) for e in exps)] = parse_rational(c)
        return cls.from_terms(terms, n)

    def __repr__(self) -> str:
        return f"MultiPoly({self.raw})"

    def __str__(self) -> str:
        return str(self.raw)


def poly_shift(p: MultiPoly, delta: Sequence[Scalar]) -> MultiPoly:
    """Return q with q(u) = p(u + delta)."""
    if len(delta) != p.nvars:
        raise ValueError("shift vector length must equal the variable count")
    if all(d == 0 for d in delta) or p.is_constant():
        return p
    ctx = poly_context(p.nvars)
    images = [ctx.gen(i) + to_fmpq(d) for i, d in enumerate(delta)]
    return MultiPoly(p.raw.compose(*images, ctx=ctx), p.nvars)


# ------------------------------------------------------------ affine forms


def _primitive(values: Sequence[Fraction]) -> list[int]:
    """Coprime integer multiple of a nonzero vector with first nonzero entry positive."""
    den = lcm(*(v.denominator for v in values))
    ints = [int(v * den) for v in values]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = [-x for x in ints]
    return ints


def _scale_of(values: Sequence[Fraction], ints: Sequence[int]) -> Fraction:
    for v, i in zip(values, ints):
        if i:
            return Fraction(v) / i
    raise ZeroDivisionError


class AffineForm:
    """An affine-linear form ``scale * (linear . u + constant)`` with a primitive integer part.

    The primitive part has coprime integer entries and a positive first
    nonzero linear coefficient, so two forms defining the same hyperplane have
    identical primitive parts.
    """

    __slots__ = ("linear", "constant", "scale")

    def __init__(self, linear: Sequence[Scalar], constant: Scalar = 0):
        lin = [as_fraction(c) for c in linear]
        if all(c == 0 for c in lin):
            raise ValueError("affine form with zero linear part")
        ints = _primitive(lin + [as_fraction(constant)])
        scale = _scale_of(lin + [as_fraction(constant)], ints)
        self.linear = tuple(ints[:-1])
        self.constant = ints[-1]
        self.scale = scale

    @classmethod
    def _raw(cls, linear: tuple, constant: int, scale: Fraction) -> "AffineForm":
        obj = object.__new__(cls)
        obj.linear = linear
        obj.constant = constant
        obj.scale = scale
        return obj

    @property
    def nvars(self) -> int:
        return len(self.linear)

    def primitive(self) -> "AffineForm":
        if self.scale == 1:
            return self
        return AffineForm._raw(self.linear, self.constant, Fraction(1))

    def original_linear(self) -> tuple[Fraction, ...]:
        return tuple(self.scale * c for c in self.linear)

    def original_constant(self) -> Fraction:
        return self.scale * self.constant

    def as_poly(self) -> MultiPoly:
        return MultiPoly.linear(self.original_linear(), self.original_constant())

    def primitive_poly(self) -> MultiPoly:
        return MultiPoly.linear(self.linear, self.constant)

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        return self.scale * (
            sum(c * as_fraction(v) for c, v in zip(self.linear, point)) + self.constant
        )

    def shifted(self, delta: Sequence[Scalar]) -> "AffineForm":
        """The form u -> self(u + delta)."""
        extra = sum(c * as_fraction(d) for c, d in zip(self.linear, delta))
        return AffineForm(self.original_linear(), self.original_constant() + self.scale * extra)

    def __neg__(self) -> "AffineForm":
        return AffineForm._raw(self.linear, self.constant, -self.scale)

    def __mul__(self, c: Scalar) -> "AffineForm":
        c = as_fraction(c)
        if c == 0:
            raise ValueError("scaling an affine form by zero")
        return AffineForm._raw(self.linear, self.constant, self.scale * c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineForm):
            return NotImplemented
        return (self.linear, self.constant, self.scale) == (other.linear, other.constant, other.scale)

    def __hash__(self) -> int:
        return hash((self.linear, self.constant, self.scale))

    def sort_key(self) -> tuple:
        return (tuple(-c for c in self.linear), self.constant, self.scale)

    def kernel_directions(self) -> list[tuple[int, ...]]:
        """Primitive integer spanning vectors of the linear part's kernel.

        With two variables this is the single vector ``k`` with first nonzero
        entry positive.
        """
        n = self.nvars
        piv = next(i for i, c in enumerate(self.linear) if c)
        dirs = []
        for j in range(n):
            if j == piv:
                continue
            v = [Fraction(0)] * n
            v[j] = Fraction(1)
            v[piv] = Fraction(-self.linear[j], self.linear[piv])
            ints = _primitive(v)
            dirs.append(tuple(ints))
        return dirs

    def base_point(self) -> tuple[Fraction, ...]:
        piv = next(i for i, c in enumerate(self.linear) if c)
        pt = [Fraction(0)] * self.nvars
        pt[piv] = Fraction(-self.constant, self.linear[piv])
        return tuple(pt)

    def to_json(self) -> dict:
        return {
            "linear": [str(c) for c in self.linear],
            "constant": str(self.constant),
            "scale": format_rational(self.scale),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "AffineForm":
        lin = tuple(int(c) for c in data["linear"])
        form = cls(lin, int(data["constant"]))
        if form.linear != lin or form.constant != int(data["constant"]):
            raise ValueError("affine form JSON is not in primitive normalized form")
        return form * parse_rational(data.get("scale", "1"))

    def __repr__(self) -> str:
        names = [f"u{i + 1}" for i in range(self.nvars)]
        parts = []
        for c, nm in zip(self.linear, names):
            if c:
                parts.append(f"{c}*{nm}")
        s = " + ".join(parts)
        if self.constant:
            s += f" + {self.constant}"
        if self.scale != 1:
            s = f"{format_rational(self.scale)}*({s})"
        return f"AffineForm({s})"


def parametrization(ell: AffineForm, extra: int = 0) -> list[MultiPoly]:
    """Images of the z-variables under the standard parametrization of {ell = 0}.

    The parameters occupy the first ``nvars - 1`` variables of the target ring;
    ``extra`` further variables are passed through unchanged after them.
    """
    n = ell.nvars
    dirs = ell.kernel_directions()
    base = ell.base_point()
    target = n - 1 + extra
    images = []
    for i in range(n):
        img = MultiPoly.constant(base[i], target)
        for j, d in enumerate(dirs):
            if d[i]:
                img = img + d[i] * MultiPoly.variable(j, target)
        images.append(img)
    for k in range(extra):
        images.append(MultiPoly.variable(n - 1 + k, target))
    return images


def restrict_to_hyperplane(p: MultiPoly, ell: AffineForm, zvars: int | None = None) -> MultiPoly:
    """Substitute the parametrization of {ell = 0} into the first ``zvars`` variables of p.

    For two z-variables and a form with zero constant this is u = s*k with k
    the primitive kernel vector.  Any trailing variables (exponential
    variables) are kept as they are.
    """
    zv = ell.nvars if zvars is None else zvars
    if zv != ell.nvars:
        raise ValueError("affine form and polynomial disagree on the number of z-variables")
    extra = p.nvars - zv
    if extra < 0:
        raise ValueError("polynomial has fewer variables than the affine form")
    return p.compose(parametrization(ell, extra))


def exact_div_affine(p: MultiPoly, ell: AffineForm) -> MultiPoly:
    """Return q with p = ell*q, or raise NotDivisible with the restricted witness."""
    lp = ell.as_poly()
    if p.nvars != ell.nvars:
        lp = lp.embed(p.nvars)
    try:
        return p.exact_div(lp)
    except ArithmeticError:
        raise NotDivisible(ell, restrict_to_hyperplane(p, ell, ell.nvars)) from None


# ----------------------------------------------- affine-factored rational functions


def _merge(den: Mapping[AffineForm, int], other: Mapping[AffineForm, int], sign: int = 1) -> dict:
    out = dict(den)
    for f, k in other.items():
        out[f] = out.get(f, 0) + sign * k
        if out[f] == 0:
            del out[f]
    return out


class FactoredRatFun:
    """``scalar * num / prod(ell^mult)`` with primitive affine denominator factors.

    After construction no denominator factor divides the numerator, and the
    numerator has leading coefficient 1 (its content lives in ``scalar``).
    """

    __slots__ = ("num", "den", "scalar")

    def __init__(
        self,
        num: MultiPoly,
        den: Mapping[AffineForm, int] | None = None,
        scalar: Scalar = 1,
        reduce: bool = True,
    ):
        scalar = as_fraction(scalar)
        factors: dict[AffineForm, int] = {}
        for f, k in (den or {}).items():
            if k < 0:
                raise ValueError("negative multiplicity")
            if k == 0:
                continue
            if f.nvars != num.nvars:
                raise ValueError("affine factor lives in a different ring")
            prim = f.primitive()
            scalar /= f.scale**k
            factors[prim] = factors.get(prim, 0) + k
        if num.is_zero() or scalar == 0:
            self.num = MultiPoly.zero(num.nvars)
            self.den = {}
            self.scalar = Fraction(0)
            return
        if reduce:
            for f in list(factors):
                fp = f.primitive_poly()
                while factors.get(f, 0) > 0:
                    try:
                        num = num.exact_div(fp)
                    except ArithmeticError:
                        break
                    factors[f] -= 1
                    if factors[f] == 0:
                        del factors[f]
        lc = num.leading_coefficient()
        self.num = num * (1 / lc) if lc != 1 else num
        self.scalar = scalar * lc
        self.den = dict(sorted(factors.items(), key=lambda kv: kv[0].sort_key()))

    # constructors
    @classmethod
    def from_poly(cls, p: MultiPoly) -> "FactoredRatFun":
        return cls(p)

    @classmethod
    def constant(cls, c: Scalar, nvars: int) -> "FactoredRatFun":
        return cls(MultiPoly.constant(1, nvars), scalar=c)

    @classmethod
    def one_minus(cls, c: Scalar, ell: AffineForm) -> "FactoredRatFun":
        """The factor 1 - c/ell."""
        return cls(ell.as_poly() - as_fraction(c), {ell: 1})

    @classmethod
    def inverse_affine(cls, ell: AffineForm, power: int = 1) -> "FactoredRatFun":
        return cls(MultiPoly.constant(1, ell.nvars), {ell: power})

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_zero(self) -> bool:
        return self.scalar == 0

    def is_polynomial(self) -> bool:
        return not self.den

    def as_poly(self) -> MultiPoly:
        if self.den:
            raise ValueError("rational function has a nontrivial denominator")
        return self.num * self.scalar

    @property
    def degree(self):
        if self.is_zero():
            return NEG_INF
        return self.num.degree - sum(self.den.values())

    def denominator_poly(self) -> MultiPoly:
        out = MultiPoly.constant(1, self.nvars)
        for f, k in self.den.items():
            out = out * f.primitive_poly() ** k
        return out

    def scaled_numerator(self) -> MultiPoly:
        return self.num * self.scalar

    # arithmetic
    def _lift(self, other) -> "FactoredRatFun":
        if isinstance(other, FactoredRatFun):
            return other
        if isinstance(other, MultiPoly):
            return FactoredRatFun(other)
        return FactoredRatFun.constant(other, self.nvars)

    def __mul__(self, other) -> "FactoredRatFun":
        o = self._lift(other)
        if self.is_zero() or o.is_zero():
            return FactoredRatFun(MultiPoly.zero(self.nvars))
        return FactoredRatFun(self.num * o.num, _merge(self.den, o.den), self.scalar * o.scalar)

    __rmul__ = __mul__

    def __add__(self, other) -> "FactoredRatFun":
        o = self._lift(other)
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        common = dict(self.den)
        for f, k in o.den.items():
            common[f] = max(common.get(f, 0), k)
        n1 = self.scaled_numerator() * _cofactor(common, self.den, self.nvars)
        n2 = o.scaled_numerator() * _cofactor(common, o.den, self.nvars)
        return FactoredRatFun(n1 + n2, common)

    __radd__ = __add__

    def __neg__(self) -> "FactoredRatFun":
        out = object.__new__(FactoredRatFun)
        out.num, out.den, out.scalar = self.num, self.den, -self.scalar
        return out

    def __sub__(self, other) -> "FactoredRatFun":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "FactoredRatFun":
        return self._lift(other) - self

    def __pow__(self, k: int) -> "FactoredRatFun":
        out = FactoredRatFun.constant(1, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, (FactoredRatFun, MultiPoly, int, Fraction)):
            return NotImplemented
        o = self._lift(other)
        if self.nvars != o.nvars:
            return False
        common = dict(self.den)
        for f, k in o.den.items():
            common[f] = max(common.get(f, 0), k)
        lhs = self.scaled_numerator() * _cofactor(common, self.den, self.nvars)
        rhs = o.scaled_numerator() * _cofactor(common, o.den, self.nvars)
        return lhs == rhs

    def __hash__(self) -> int:
        return hash((self.num, tuple(self.den.items()), self.scalar))

    # evaluation and substitution
    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        d = Fraction(1)
        for f, k in self.den.items():
            v = f.evaluate(point)
            if v == 0:
                raise ZeroDivisionError(f"pole of {f} at {point}")
            d *= v**k
        return self.scalar * self.num.evaluate(point) / d

    def shift(self, delta: Sequence[Scalar]) -> "FactoredRatFun":
        den = {f.shifted(delta): k for f, k in self.den.items()}
        return FactoredRatFun(poly_shift(self.num, delta), den, self.scalar, reduce=False)

    def linear_substitute(self, matrix: Sequence[Sequence[Scalar]]) -> "FactoredRatFun":
        """The function u -> f(matrix . u)."""
        n = self.nvars
        rows = [[as_fraction(c) for c in row] for row in matrix]
        images = [MultiPoly.linear(rows[i]) for i in range(n)]
        den = {}
        for f, k in self.den.items():
            lin = [sum(f.linear[i] * rows[i][j] for i in range(n)) for j in range(n)]
            den[AffineForm(lin, f.constant)] = k
        return FactoredRatFun(self.num.compose(images), den, self.scalar, reduce=False)

    def compose_affine(self, images: Sequence[MultiPoly]) -> "FactoredRatFun":
        """Substitute affine images (polynomials of degree <= 1) for the variables."""
        target = images[0].nvars
        den: dict[AffineForm, int] = {}
        scalar = self.scalar
        for f, k in self.den.items():
            g = f.primitive_poly().compose(images)
            if g.degree == NEG_INF:
                raise ZeroDivisionError(f"substitution lands inside the pole {f}")
            if g.degree == 0:
                scalar /= g.constant_value() ** k
                continue
            if g.degree > 1:
                raise ValueError("substitution is not affine")
            terms = g.terms()
            lin = [terms.get(tuple(int(i == j) for j in range(target)), 0) for i in range(target)]
            const = terms.get((0,) * target, 0)
            form = AffineForm(lin, const)
            den[form] = den.get(form, 0) + k
        return FactoredRatFun(self.num.compose(images), den, scalar)

    def value_at_infinity(self) -> Fraction:
        """Limit along rays for a degree-zero function; raises if direction-dependent."""
        if self.is_zero():
            return Fraction(0)
        if self.degree != 0:
            raise ValueError("value at infinity is only defined in degree zero")
        top = self.num.homogeneous_part(self.num.degree)
        den_top = MultiPoly.constant(1, self.nvars)
        for f, k in self.den.items():
            den_top = den_top * MultiPoly.linear(f.linear) ** k
        q = top.exact_div(den_top)
        if not q.is_constant():
            raise ValueError("leading behaviour depends on the direction")
        return self.scalar * q.constant_value()

    def to_json(self) -> dict:
        return {
            "num": self.num.to_json(),
            "den": [[f.to_json(), k] for f, k in self.den.items()],
            "scalar": format_rational(self.scalar),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FactoredRatFun":
        num = MultiPoly.from_json(data["num"])
        den = {}
        for f, k in data["den"]:
            form = AffineForm.from_json(f)
            den[form] = den.get(form, 0) + int(k)
        return cls(num, den, parse_rational(data["scalar"]))

    def __repr__(self) -> str:
        den = " * ".join(f"({f})^{k}" for f, k in self.den.items()) or "1"
        return f"FactoredRatFun({format_rational(self.scalar)} * ({self.num}) / {den})"


def _cofactor(common: Mapping[AffineForm, int], part: Mapping[AffineForm, int], nvars: int) -> MultiPoly:
    out = MultiPoly.constant(1, nvars)
    for f, k in common.items():
        e = k - part.get(f, 0)
        if e:
            out = out * f.primitive_poly() ** e
    return out


def ratfun_reduce(f: FactoredRatFun) -> FactoredRatFun:
    """Cancel every denominator factor that divides the numerator."""
    return FactoredRatFun(f.num, f.den, f.scalar, reduce=True)


def residue_at(
    f: FactoredRatFun,
    ell: AffineForm,
    images: Sequence[MultiPoly] | None = None,
) -> FactoredRatFun:
    """Residue of f along the simple pole {ell = 0}, normalized by ell's original scale.

    ``images`` optionally fixes the parametrization of the hyperplane (as
    affine images of the z-variables); by default the primitive kernel
    parametrization is used.
    """
    prim = ell.primitive()
    mult = f.den.get(prim, 0)
    if mult == 0:
        raise NotAPole(ell)
    if mult != 1:
        raise NotSimplePole(ell, mult)
    rest = {g: k for g, k in f.den.items() if g != prim}
    # ell * f = ell.scale * (f with the primitive factor removed)
    g = FactoredRatFun(f.num, rest, f.scalar * ell.scale, reduce=False)
    if images is None:
        images = parametrization(ell)
    else:
        check = prim.primitive_poly().compose(list(images))
        if not check.is_zero():
            raise ValueError("parametrization does not lie on the hyperplane")
    return g.compose_affine(images)


# --------------------------------------------------------- Laurent fractions


E_VARS = 2


class LaurentFrac:
    """``E^shift * num / den`` for polynomials num, den in the exponential variables.

    num and den carry no monomial content and are coprime; den has leading
    coefficient 1.  This makes the representation canonical.
    """

    __slots__ = ("num", "den", "shift")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None, shift: Sequence[int] | None = None):
        n = num.nvars
        den = MultiPoly.constant(1, n) if den is None else den
        if den.is_zero():
            raise ZeroDivisionError("zero denominator in LaurentFrac")
        shift = [0] * n if shift is None else list(shift)
        if num.is_zero():
            self.num, self.den, self.shift = num, MultiPoly.constant(1, n), (0,) * n
            return
        for poly, sign in ((num, 1), (den, -1)):
            content = _monomial_content(poly)
            for i in range(n):
                shift[i] += sign * content[i]
        num = _strip_content(num)
        den = _strip_content(den)
        if not den.is_constant():
            g = MultiPoly(num.raw.gcd(den.raw), n)
            if not g.is_constant():
                num = num.exact_div(g)
                den = den.exact_div(g)
        lc = den.leading_coefficient()
        self.num = num * (1 / lc)
        self.den = den * (1 / lc)
        self.shift = tuple(shift)

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: Scalar = 1) -> "LaurentFrac":
        n = len(exps)
        return cls(MultiPoly.constant(coeff, n), shift=exps)

    @classmethod
    def constant(cls, c: Scalar, nvars: int = E_VARS) -> "LaurentFrac":
        return cls(MultiPoly.constant(c, nvars))

    @classmethod
    def from_laurent_terms(cls, terms: Mapping[tuple, Scalar], nvars: int = E_VARS) -> "LaurentFrac":
        """A Laurent polynomial given by (possibly negative) exponent vectors."""
        if not terms:
            return cls(MultiPoly.zero(nvars))
        low = [min(e[i] for e in terms) for i in range(nvars)]
        shifted = {tuple(e[i] - low[i] for i in range(nvars)): c for e, c in terms.items()}
        return cls(MultiPoly.from_terms(shifted, nvars), shift=low)

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_laurent_polynomial(self) -> bool:
        return self.den.is_constant()

    def laurent_terms(self) -> dict[tuple, Fraction]:
        if not self.is_laurent_polynomial():
            raise ValueError("not a Laurent polynomial")
        c = self.den.constant_value()
        return {
            tuple(e[i] + self.shift[i] for i in range(self.nvars)): v / c
            for e, v in self.num.terms().items()
        }

    def _parts(self) -> tuple[MultiPoly, MultiPoly]:
        """Numerator and denominator as honest polynomials (monomials moved across)."""
        n = self.nvars
        pos = [max(s, 0) for s in self.shift]
        neg = [max(-s, 0) for s in self.shift]
        return self.num * _mono(pos, n), self.den * _mono(neg, n)

    def __add__(self, other) -> "LaurentFrac":
        o = _lift_laurent(other, self.nvars)
        a, b = self._parts()
        c, d = o._parts()
        return LaurentFrac(a * d + c * b, b * d)

    __radd__ = __add__

    def __neg__(self) -> "LaurentFrac":
        out = object.__new__(LaurentFrac)
        out.num, out.den, out.shift = -self.num, self.den, self.shift
        return out

    def __sub__(self, other) -> "LaurentFrac":
        return self + (-_lift_laurent(other, self.nvars))

    def __rsub__(self, other) -> "LaurentFrac":
        return _lift_laurent(other, self.nvars) - self

    def __mul__(self, other) -> "LaurentFrac":
        o = _lift_laurent(other, self.nvars)
        shift = [a + b for a, b in zip(self.shift, o.shift)]
        return LaurentFrac(self.num * o.num, self.den * o.den, shift)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LaurentFrac":
        o = _lift_laurent(other, self.nvars)
        if o.is_zero():
            raise ZeroDivisionError("division by zero LaurentFrac")
        shift = [a - b for a, b in zip(self.shift, o.shift)]
        return LaurentFrac(self.num * o.den, self.den * o.num, shift)

    def __rtruediv__(self, other) -> "LaurentFrac":
        return _lift_laurent(other, self.nvars) / self

    def __pow__(self, k: int) -> "LaurentFrac":
        if k < 0:
            return LaurentFrac.constant(1, self.nvars) / self ** (-k)
        shift = [k * s for s in self.shift]
        return LaurentFrac(self.num**k, self.den**k, shift)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (LaurentFrac, int, Fraction)):
            return NotImplemented
        o = _lift_laurent(other, self.nvars)
        a, b = self._parts()
        c, d = o._parts()
        return a * d == c * b

    def __hash__(self) -> int:
        return hash((self.num, self.den, self.shift))

    def evaluate(self, point: Sequence[Scalar]) -> Fraction:
        a, b = self._parts()
        d = b.evaluate(point)
        if d == 0:
            raise ZeroDivisionError("LaurentFrac has a pole at this point")
        return a.evaluate(point) / d

    def invert_exponents(self) -> "LaurentFrac":
        """The substitution E -> 1/E."""
        n = self.nvars
        a, b = self._parts()
        da = [a.degree_in([i]) for i in range(n)]
        db = [b.degree_in([i]) for i in range(n)]
        ra = _reflect(a, da)
        rb = _reflect(b, db)
        return LaurentFrac(ra, rb, [db[i] - da[i] for i in range(n)])

    def to_json(self) -> dict:
        n = self.nvars
        num = [
            [[e[i] + self.shift[i] for i in range(n)], format_rational(c)]
            for e, c in self.num.sorted_terms()
        ]
        den = [[list(e), format_rational(c)] for e, c in self.den.sorted_terms()]
        return {"vars": n, "num": num, "den": den}

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentFrac":
        n = int(data.get("vars", E_VARS))
        num = cls.from_laurent_terms({tuple(e): parse_rational(c) for e, c in data["num"]}, n)
        den = cls.from_laurent_terms({tuple(e): parse_rational(c) for e, c in data["den"]}, n)
        return num / den

    def __repr__(self) -> str:
        return f"LaurentFrac(E^{list(self.shift)} * ({self.num}) / ({self.den}))"


def _mono(exps: Sequence[int], n: int) -> MultiPoly:
    return MultiPoly.from_terms({tuple(exps): 1}, n)


def _monomial_content(p: MultiPoly) -> list[int]:
    if p.is_zero():
        return [0] * p.nvars
    monoms = p.raw.monoms()
    return [int(min(m[i] for m in monoms)) for i in range(p.nvars)]


def _strip_content(p: MultiPoly) -> MultiPoly:
    c = _monomial_content(p)
    if not any(c):
        return p
    return p.exact_div(_mono(c, p.nvars))


def _reflect(p: MultiPoly, degs: Sequence[int]) -> MultiPoly:
    terms = {tuple(d - e for d, e in zip(degs, exps)): c for exps, c in p.terms().items()}
    return MultiPoly.from_terms(terms, p.nvars)


def _lift_laurent(x, nvars: int) -> LaurentFrac:
    if isinstance(x, LaurentFrac):
        return x
    return LaurentFrac.constant(x, nvars)
