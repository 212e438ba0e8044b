"""Difference operators sum_tau a_tau(z) (T_tau - 1) + c(z) with affine-factored coefficients.

Application to polynomials never forms one global common denominator.  The
coefficients are moved to working coordinates w (u = M w) in which every pole
hyperplane has a nonzero coefficient of w_0.  Each term's numerator is then
split by division with remainder in w_0: the quotients add up to the answer
and the proper remainders must cancel, which is verified hyperplane by
hyperplane on restricted (one variable smaller) slices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact import (
    E_VARS,
    AffineForm,
    FactoredRatFun,
    MultiPoly,
    NotAPole,
    NotSimplePole,
    Scalar,
    as_fraction,
    format_rational,
    parse_rational,
    residue_at,
    restrict_to_hyperplane,
)
from .expoly import ExpPolynomial, e_monomial, shift_z
from .lattice import (
    A1,
    ALPHAS,
    B1,
    BETAS,
    GRAM,
    Configuration,
    LatticeVector,
    Matrix,
    coroot_pairing,
    e_exponent,
    gram_inner,
    identity_gram,
    norm2,
    reflect,
    u_form,
    u_shift,
    weyl_elements,
)


class ResidueObstruction(ArithmeticError):
    """A pole of the operator's coefficients survives in D[p]."""

    def __init__(self, ell: AffineForm, witness: MultiPoly):
        super().__init__(f"pole along {ell} does not cancel")
        self.ell = ell
        self.witness = witness


class NotLineReducible(ValueError):
    pass


def _zero(n: int) -> FactoredRatFun:
    return FactoredRatFun(MultiPoly.zero(n))


def _lift(c, n: int) -> FactoredRatFun:
    if isinstance(c, FactoredRatFun):
        return c
    if isinstance(c, MultiPoly):
        return FactoredRatFun(c)
    return FactoredRatFun.constant(c, n)


class DifferenceOperator:
    """``sum_tau a_tau(z) (T_tau - 1) + const(z)``.

    Shifts are LatticeVectors in the basis of ``gram``; the u-displacement and
    the exponent of exp<x, tau> are both ``gram . tau``.
    """

    def __init__(
        self,
        terms: Mapping[LatticeVector, FactoredRatFun],
        gram: Matrix = GRAM,
        const: FactoredRatFun | Scalar = 0,
        name: str = "",
    ):
        n = len(gram)
        clean: dict[LatticeVector, FactoredRatFun] = {}
        for tau, a in terms.items():
            if len(tau) != n:
                raise ValueError("shift vector has the wrong dimension")
            a = _lift(a, n)
            if tau.is_zero() or a.is_zero():
                continue
            clean[tau] = a
        self.terms = dict(sorted(clean.items()))
        self.gram = gram
        self.const = _lift(const, n)
        self.name = name
        self._frames: dict = {}

    @property
    def nvars(self) -> int:
        return len(self.gram)

    @property
    def shifts(self) -> list[LatticeVector]:
        return list(self.terms)

    def coefficient(self, tau: LatticeVector) -> FactoredRatFun:
        return self.terms.get(tau, _zero(self.nvars))

    def u_delta(self, tau: LatticeVector) -> tuple[Fraction, ...]:
        return u_shift(tau, self.gram)

    def e_exponent(self, tau: LatticeVector) -> tuple[int, ...]:
        return e_exponent(tau, self.gram)

    def t_form(self) -> dict[LatticeVector, FactoredRatFun]:
        """Coefficients c_rho of sum_rho c_rho T_rho (rho = 0 included when nonzero)."""
        n = self.nvars
        out = dict(self.terms)
        c0 = self.const
        for a in self.terms.values():
            c0 = c0 - a
        if not c0.is_zero():
            out[LatticeVector(*([0] * n))] = c0
        return dict(sorted(out.items()))

    @classmethod
    def from_t_form(cls, coeffs: Mapping[LatticeVector, FactoredRatFun], gram: Matrix = GRAM, name: str = ""):
        n = len(gram)
        const = _zero(n)
        terms = {}
        for rho, c in coeffs.items():
            const = const + c
            if not rho.is_zero():
                terms[rho] = c
        return cls(terms, gram, const, name)

    # algebra
    def _check(self, other: "DifferenceOperator") -> None:
        if self.gram != other.gram:
            raise ValueError("operators act on different spaces")

    def __add__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        self._check(other)
        terms = dict(self.terms)
        for tau, b in other.terms.items():
            terms[tau] = terms[tau] + b if tau in terms else b
        return DifferenceOperator(terms, self.gram, self.const + other.const)

    def __neg__(self) -> "DifferenceOperator":
        return DifferenceOperator({t: -a for t, a in self.terms.items()}, self.gram, -self.const)

    def __sub__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        return self + (-other)

    def scaled(self, c: Scalar) -> "DifferenceOperator":
        c = as_fraction(c)
        return DifferenceOperator({t: a * c for t, a in self.terms.items()}, self.gram, self.const * c)

    def plus_constant(self, c: FactoredRatFun | Scalar) -> "DifferenceOperator":
        return DifferenceOperator(self.terms, self.gram, self.const + _lift(c, self.nvars), self.name)

    def __matmul__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        return compose(self, other)

    def is_zero(self) -> bool:
        return not self.terms and self.const.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, DifferenceOperator):
            return NotImplemented
        if self.gram != other.gram or set(self.terms) != set(other.terms):
            return False
        if not self.const == other.const:
            return False
        return all(self.terms[t] == other.terms[t] for t in self.terms)

    __hash__ = None

    def leading_scalars(self) -> dict[LatticeVector, Fraction]:
        return {t: a.value_at_infinity() for t, a in self.terms.items()}

    # application
    def frame(self, extra: int) -> "OperatorFrame":
        if extra not in self._frames:
            self._frames[extra] = OperatorFrame(self, extra)
        return self._frames[extra]

    def apply_to_poly(self, p: MultiPoly) -> MultiPoly:
        return apply_to_poly(self, p)

    def apply_to_exp(self, f: ExpPolynomial) -> ExpPolynomial:
        return apply_to_exp(self, f)

    # serialization
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "convention": "sum a_tau (T_tau - 1) + const",
            "gram": [[format_rational(x) for x in row] for row in self.gram],
            "terms": [
                {
                    "shift": tau.to_json(),
                    "uShift": [format_rational(x) for x in self.u_delta(tau)],
                    "coeff": a.to_json(),
                }
                for tau, a in self.terms.items()
            ],
            "const": self.const.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "DifferenceOperator":
        gram = tuple(tuple(parse_rational(x) for x in row) for row in data["gram"])
        terms = {
            LatticeVector(*(parse_rational(x) for x in t["shift"])): FactoredRatFun.from_json(t["coeff"])
            for t in data["terms"]
        }
        return cls(terms, gram, FactoredRatFun.from_json(data["const"]), data.get("name", ""))

    def __repr__(self) -> str:
        label = self.name or "DifferenceOperator"
        return f"<{label}: {len(self.terms)} shifts>"


def compose(d1: DifferenceOperator, d2: DifferenceOperator) -> DifferenceOperator:
    """The operator f -> d1[d2[f]]."""
    d1._check(d2)
    n = d1.nvars
    terms: dict[LatticeVector, FactoredRatFun] = {}

    def add(rho: LatticeVector, c: FactoredRatFun) -> None:
        if rho.is_zero() or c.is_zero():
            return
        terms[rho] = terms[rho] + c if rho in terms else c

    const = d1.const * d2.const
    for tau, a in d1.terms.items():
        delta = d1.u_delta(tau)
        # a(T_tau - 1) b(T_sigma - 1) = a b(z+tau) [(T_{tau+sigma}-1) - (T_tau-1)] - a b (T_sigma-1)
        for sigma, b in d2.terms.items():
            ab_shift = a * b.shift(delta)
            add(tau + sigma, ab_shift)
            add(tau, -ab_shift)
            add(sigma, -(a * b))
        c_shift = d2.const.shift(delta)
        add(tau, a * c_shift)
        const = const + a * (c_shift - d2.const)
    for sigma, b in d2.terms.items():
        add(sigma, d1.const * b)
    return DifferenceOperator(terms, d1.gram, const)


def commutator(d1: DifferenceOperator, d2: DifferenceOperator) -> DifferenceOperator:
    return compose(d1, d2) - compose(d2, d1)


def power(d: DifferenceOperator, k: int) -> DifferenceOperator:
    if k < 1:
        raise ValueError("power needs k >= 1")
    out = d
    for _ in range(k - 1):
        out = compose(out, d)
    return out


# ------------------------------------------------------------- application


def _matrix_for(forms: Iterable[AffineForm], n: int) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """M and M^{-1} with u = M w such that every form has a nonzero w_0 coefficient."""
    forms = list(forms)
    t = 0
    while True:
        col = [Fraction(t) ** i if i else Fraction(1) for i in range(n)]
        if all(sum(f.linear[i] * col[i] for i in range(n)) != 0 for f in forms):
            break
        t += 1
    mat = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(1, n):
        mat[i][0] = col[i]
        inv[i][0] = -col[i]
    return mat, inv


@dataclass
class _Term:
    delta: tuple[Fraction, ...]
    e_exp: tuple[int, ...] | None
    num: MultiPoly
    den: MultiPoly | None
    factors: dict


class OperatorFrame:
    """Working-coordinate data for applying an operator (optionally with E-variables)."""

    def __init__(self, op: DifferenceOperator, extra: int):
        n = op.nvars
        self.n, self.extra, self.total = n, extra, n + extra
        forms = set()
        for a in list(op.terms.values()) + [op.const]:
            forms.update(a.den)
        mat, inv = _matrix_for(forms, n)
        self.mat, self.inv = mat, inv
        total = self.total
        gens = [MultiPoly.variable(i, total) for i in range(total)]
        self.to_work = [sum((mat[i][j] * gens[j] for j in range(n)), MultiPoly.zero(total)) for i in range(n)]
        self.to_work += gens[n:]
        self.from_work = [sum((inv[i][j] * gens[j] for j in range(n)), MultiPoly.zero(total)) for i in range(n)]
        self.from_work += gens[n:]
        self.terms: list[_Term] = []
        for tau, a in op.terms.items():
            du = op.u_delta(tau)
            dw = tuple(sum(inv[i][j] * du[j] for j in range(n)) for i in range(n))
            e = op.e_exponent(tau) if extra else None
            self.terms.append(self._term(a, dw, e))
        self.const = None if op.const.is_zero() else self._term(op.const, None, None)
        if extra:
            self.h = tuple(max([0] + [-t.e_exp[i] for t in self.terms]) for i in range(extra))
        else:
            self.h = ()

    def _term(self, a: FactoredRatFun, delta, e) -> _Term:
        aw = a.linear_substitute(self.mat)
        num = aw.scaled_numerator().embed(self.total)
        if aw.den:
            den = aw.denominator_poly().embed(self.total)
        else:
            den = None
        return _Term(delta, e, num, den, dict(aw.den))

    def work(self, p: MultiPoly) -> MultiPoly:
        return p.compose(self.to_work)

    def unwork(self, p: MultiPoly) -> MultiPoly:
        return p.compose(self.from_work)

    def obstruction(self, h: AffineForm, numer: MultiPoly) -> ResidueObstruction:
        ell = self.unwork_form(h)
        return ResidueObstruction(ell, restrict_to_hyperplane(self.unwork(numer), ell, self.n))

    def unwork_form(self, f: AffineForm) -> AffineForm:
        lin = [sum(f.linear[i] * self.inv[i][j] for i in range(self.n)) for j in range(self.n)]
        return AffineForm(lin, f.constant)

    def apply(self, g: MultiPoly) -> MultiPoly:
        """D applied to g in working coordinates.

        With E-variables the result is the numerator of E^{-h} D[g e^<z,x>] e^{-<z,x>},
        i.e. everything is multiplied by E^h so no negative exponents occur.
        """
        n, total = self.n, self.total
        if self.extra:
            eh = e_monomial(self.h, n)
            base = g * eh
        else:
            base = g
        out = MultiPoly.zero(total)
        pending = []
        for term in self.terms:
            shifted = shift_z(g, term.delta, n)
            if self.extra:
                shifted = shifted * e_monomial([a + b for a, b in zip(term.e_exp, self.h)], n)
            numer = term.num * (shifted - base)
            out = out + self._split(numer, term, pending)
        if self.const is not None:
            out = out + self._split(self.const.num * base, self.const, pending)
        if pending:
            self._check_cancellation(pending)
        return out

    def _split(self, numer: MultiPoly, term: _Term, pending: list) -> MultiPoly:
        if term.den is None or numer.is_zero():
            return numer
        q, r = divmod(numer.raw, term.den.raw)
        if not r.is_zero():
            pending.append((MultiPoly(r, self.total), term))
        return MultiPoly(q, self.total)

    def _restriction(self, h: AffineForm) -> list[MultiPoly]:
        total = self.total
        a = h.linear[0]
        x = MultiPoly.constant(Fraction(-h.constant, a), total)
        for j in range(1, self.n):
            if h.linear[j]:
                x = x - Fraction(h.linear[j], a) * MultiPoly.variable(j, total)
        return [x] + [MultiPoly.variable(i, total) for i in range(1, total)]

    def _restrict(self, p: MultiPoly, h: AffineForm) -> MultiPoly:
        # h has a nonzero w_0 coefficient, so the remainder mod h is p with w_0 eliminated
        _, r = divmod(p.raw, h.primitive_poly().embed(self.total).raw)
        return MultiPoly(r, self.total)

    def _check_cancellation(self, pending: list) -> None:
        hyperplanes: dict[AffineForm, list] = {}
        simple = True
        for r, term in pending:
            for f, k in term.factors.items():
                hyperplanes.setdefault(f, []).append((r, term))
                if k > 1:
                    simple = False
        if not simple:
            self._check_by_common_denominator(pending)
            return
        for h in sorted(hyperplanes, key=lambda f: f.sort_key()):
            images = self._restriction(h)
            parts = []
            for r, term in hyperplanes[h]:
                cof = MultiPoly.constant(1, self.total)
                for f in term.factors:
                    if f != h:
                        cof = cof * f.primitive_poly().embed(self.total)
                parts.append((self._restrict(r, h), cof.compose(images)))
            total = MultiPoly.constant(1, self.total)
            for _, c in parts:
                total = total * c
            witness = MultiPoly.zero(self.total)
            for rr, c in parts:
                witness = witness + rr * total.exact_div(c)
            if not witness.is_zero():
                raise self.obstruction(h, witness)

    def _check_by_common_denominator(self, pending: list) -> None:
        common: dict[AffineForm, int] = {}
        for _, term in pending:
            for f, k in term.factors.items():
                common[f] = max(common.get(f, 0), k)
        acc = MultiPoly.zero(self.total)
        for r, term in pending:
            cof = MultiPoly.constant(1, self.total)
            for f, k in common.items():
                e = k - term.factors.get(f, 0)
                if e:
                    cof = cof * f.primitive_poly().embed(self.total) ** e
            acc = acc + r * cof
        if acc.is_zero():
            return
        for f in sorted(common, key=lambda f: f.sort_key()):
            restricted = acc.compose(self._restriction(f))
            if not restricted.is_zero():
                raise self.obstruction(f, restricted)
        raise AssertionError("remainders fail to cancel but vanish on every hyperplane")


def apply_to_poly(d: DifferenceOperator, p: MultiPoly) -> MultiPoly:
    """D[p]; raises ResidueObstruction if the result is not a polynomial."""
    if p.nvars != d.nvars:
        raise ValueError("polynomial and operator have different numbers of variables")
    fr = d.frame(0)
    return fr.unwork(fr.apply(fr.work(p)))


def apply_to_exp(d: DifferenceOperator, f: ExpPolynomial) -> ExpPolynomial:
    """D[P e^<z,x>] as an ExpPolynomial; raises ResidueObstruction on a surviving pole."""
    if f.zvars != d.nvars or d.nvars != E_VARS:
        raise ValueError("exponential application needs a two-variable operator")
    fr = d.frame(E_VARS)
    num = fr.unwork(fr.apply(fr.work(f.num)))
    shift = [s - h for s, h in zip(f.shift, fr.h)]
    return ExpPolynomial(num, f.den, shift, f.zvars)


# ------------------------------------------------------------ constructors


def _factor(gamma: LatticeVector, c: Scalar, d: Scalar, gram: Matrix = GRAM) -> FactoredRatFun:
    """1 - c*gamma^2 / (<gamma, z> + d*gamma^2)."""
    g2 = norm2(gamma, gram)
    return FactoredRatFun.one_minus(as_fraction(c) * g2, u_form(gamma, as_fraction(d) * g2))


def _product(factors: Iterable[FactoredRatFun]) -> FactoredRatFun:
    out = FactoredRatFun.constant(1, 2)
    for f in factors:
        out = out * f
    return out


SHORT_ORBIT = tuple(s * b for b in BETAS for s in (1, -1))
LONG_ORBIT = tuple(s * a for a in ALPHAS for s in (1, -1))


def _select(orbit, tau: LatticeVector, value: int) -> list[LatticeVector]:
    return [g for g in orbit if coroot_pairing(tau, g) == value]


def make_D1(m: int) -> DifferenceOperator:
    """The twelve-term operator with shifts 2*(vectors of G2)."""
    if m < 0:
        raise ValueError("m must be a natural number")
    terms = {}
    for b in BETAS:
        for eps in (1, -1):
            tau = 2 * eps * b
            parts = [FactoredRatFun.constant(3, 2)]
            for g in _select(SHORT_ORBIT, tau, 1):
                parts += [_factor(g, 3 * m + 2, 0), _factor(g, -3 * m, 2), _factor(g, 3 * m - 1, -1)]
            for g in _select(LONG_ORBIT, tau, 1):
                parts.append(_factor(g, m, 0))
            parts += [_factor(eps * b, 3 * m + 2, 0), _factor(eps * b, 3 * m, 1)]
            terms[tau] = _product(parts)
    for a in ALPHAS:
        for eps in (1, -1):
            tau = 2 * eps * a
            parts = []
            for g in _select(SHORT_ORBIT, tau, 3):
                parts += [_factor(g, 3 * m + 2, 0), _factor(g, 3 * m + 1, 1), _factor(g, 3 * m, 2)]
            for g in _select(LONG_ORBIT, tau, 1):
                parts.append(_factor(g, m, 0))
            parts += [_factor(eps * a, m, 0), _factor(eps * a, m, 1)]
            terms[tau] = _product(parts)
    return DifferenceOperator(terms, GRAM, name=f"D1(m={m})")


def coupling(m_half: int, m_full: int, tau: LatticeVector, gram: Matrix = GRAM) -> Fraction:
    """lambda_tau = m_{tau/2} (m_{tau/2} + 2 m_tau + 1) tau^2 / 4."""
    return Fraction(m_half * (m_half + 2 * m_full + 1)) * norm2(tau, gram) / 4


def make_D2(m: int) -> DifferenceOperator:
    """The eighteen-term operator with shifts 2*(vectors of AG2); six survive at m = 0."""
    if m < 0:
        raise ValueError("m must be a natural number")
    terms = {}
    for b in BETAS:
        for eps in (1, -1):
            eb = eps * b
            tau = 4 * eb
            parts = [FactoredRatFun.constant(coupling(1, 0, tau), 2)]
            for g in _select(LONG_ORBIT, tau, 2):
                parts += [_factor(g, m, 0), _factor(g, m, 1)]
            for g in _select(SHORT_ORBIT, tau, 2):
                parts += [_factor(g, 3 * m + 2, 0), _factor(g, 3 * m, 1)]
            parts += [_factor(eb, 3 * m + 2, 0), _factor(eb, 3 * m, 1), _factor(eb, 3 * m + 2, 2), _factor(eb, 3 * m, 3)]
            terms[tau] = _product(parts)

            tau = 2 * eb
            parts = [FactoredRatFun.constant(coupling(3 * m, 1, tau), 2)]
            for g in _select(LONG_ORBIT, tau, 0):
                parts.append(_factor(g, Fraction(2, 3), -1))
            for g in _select(LONG_ORBIT, tau, 1):
                parts.append(_factor(g, m, 0))
            for g in _select(SHORT_ORBIT, tau, 1):
                parts += [_factor(g, 3 * m + 2, 0), _factor(g, -3 * m, 2), _factor(g, 3 * m - 1, -1)]
            parts += [_factor(eb, 3 * m + 2, 0), _factor(eb, 3 * m, 1), _factor(eb, -4, 3), _factor(eb, 4, -1)]
            terms[tau] = _product(parts)
    for a in ALPHAS:
        for eps in (1, -1):
            ea = eps * a
            tau = 2 * ea
            parts = [FactoredRatFun.constant(coupling(m, 0, tau), 2)]
            for g in _select(SHORT_ORBIT, tau, 3):
                parts += [_factor(g, 3 * m + 2, 0), _factor(g, 3 * m + 1, 1), _factor(g, 3 * m, 2)]
            for g in _select(SHORT_ORBIT, tau, 0):
                parts.append(_factor(g, 6, -1))
            for g in _select(LONG_ORBIT, tau, 1):
                parts.append(_factor(g, m, 0))
            parts += [_factor(ea, m, 0), _factor(ea, m, 1)]
            terms[tau] = _product(parts)
    return DifferenceOperator(terms, GRAM, name=f"D2(m={m})")


# --------------------------------------------------------- line restriction


def restrict_line(d: DifferenceOperator) -> DifferenceOperator:
    """Restrict a two-variable standard-basis operator to functions of w = z1 - z2."""
    if d.gram != identity_gram(2):
        raise ValueError("line restriction needs two standard-basis variables")
    diag = [MultiPoly.linear([1, 0], 1), MultiPoly.linear([0, 1], 1)]
    onto_line = [MultiPoly.variable(0, 1), MultiPoly.zero(1)]

    def reduce(c: FactoredRatFun) -> FactoredRatFun:
        if c.is_zero():
            return _zero(1)
        if not c.compose_affine(diag) == c:
            raise NotLineReducible(f"coefficient {c} depends on z1 + z2")
        return c.compose_affine(onto_line)

    terms: dict[LatticeVector, FactoredRatFun] = {}
    for tau, a in d.terms.items():
        w = LatticeVector(tau[0] - tau[1])
        ra = reduce(a)
        terms[w] = terms[w] + ra if w in terms else ra
    return DifferenceOperator(terms, identity_gram(1), reduce(d.const), name=f"line({d.name})")


# ------------------------------------------------------- structural checks


@dataclass
class StructureReport:
    degree_ok: bool
    poles_ok: bool
    symmetry_ok: bool
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.degree_ok and self.poles_ok and self.symmetry_ok

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "D1_degree": self.degree_ok,
            "D2_poles": self.poles_ok,
            "D3_symmetry": self.symmetry_ok,
            "violations": self.violations,
        }


def _root_of(form: AffineForm, roots: Sequence[LatticeVector]) -> tuple[LatticeVector, Fraction] | None:
    """(alpha, c) with form proportional to <alpha, z> - c*alpha^2, or None."""
    for alpha in roots:
        ref = u_form(alpha)
        if ref.linear == form.linear:
            # <alpha, z> = scale * (form - constant)
            return alpha, -ref.scale * form.constant / norm2(alpha)
    return None


def pole_catalogue(tau: LatticeVector, alpha: LatticeVector, config: Configuration, shifts) -> set[Fraction]:
    """Values c for which the structural condition demands a pole of a_tau at <alpha,z> = c alpha^2."""
    b = coroot_pairing(tau, alpha, config.gram)
    allowed = set(shifts) | {LatticeVector(*([0] * len(tau)))}
    out = set()
    for t in config.axiom_set(alpha):
        for c in (t - b, -t - b):
            lam = reflect(alpha, tau, config.gram) - alpha * (2 * c)
            if lam in allowed:
                out.add(Fraction(c))
    return out


def check_structural_conditions(d: DifferenceOperator, config: Configuration) -> StructureReport:
    """Degree zero, the exact simple-pole catalogue, and Weyl equivariance of the coefficients."""
    violations = []
    degree_ok = True
    for tau, a in d.terms.items():
        if a.degree != 0:
            degree_ok = False
            violations.append({"condition": "degree", "shift": tau.to_json(), "degree": str(a.degree)})
    roots = config.reduced_positive()
    shifts = set(d.terms)
    poles_ok = True
    for tau, a in d.terms.items():
        found: dict[LatticeVector, set] = {alpha: set() for alpha in roots}
        for form, k in a.den.items():
            hit = _root_of(form, roots)
            if hit is None:
                poles_ok = False
                violations.append({"condition": "poles", "shift": tau.to_json(), "foreign": form.to_json()})
                continue
            alpha, c = hit
            if k != 1:
                poles_ok = False
                violations.append(
                    {"condition": "poles", "shift": tau.to_json(), "root": alpha.to_json(), "c": format_rational(c), "multiplicity": k}
                )
            found[alpha].add(c)
        for alpha in roots:
            expected = pole_catalogue(tau, alpha, config, shifts)
            for c in sorted(found[alpha] - expected):
                poles_ok = False
                violations.append(
                    {"condition": "poles", "shift": tau.to_json(), "root": alpha.to_json(), "c": format_rational(c), "problem": "unexpected pole"}
                )
            for c in sorted(expected - found[alpha]):
                poles_ok = False
                violations.append(
                    {"condition": "poles", "shift": tau.to_json(), "root": alpha.to_json(), "c": format_rational(c), "problem": "missing pole"}
                )
    symmetry_ok = True
    if d.gram == GRAM:
        for w in weyl_elements():
            inv = w.u_matrix_inverse()
            for tau, a in d.terms.items():
                image = w.apply(tau)
                if not a.linear_substitute(inv) == d.coefficient(image):
                    symmetry_ok = False
                    violations.append({"condition": "symmetry", "shift": tau.to_json(), "weyl": [list(r) for r in w.lattice_action]})
    return StructureReport(degree_ok, poles_ok, symmetry_ok, violations)


# ---------------------------------------------------------------- residues


def hyperplane_images(alpha: LatticeVector, c: Scalar, keep: LatticeVector) -> list[MultiPoly]:
    """Affine images of (u1, u2) on <alpha,z> = c alpha^2, parametrized by X = <keep, z>."""
    a = alpha.coords
    k = keep.coords
    det = Fraction(a[0] * k[1] - a[1] * k[0])
    if det == 0:
        raise ValueError("the kept coordinate is not independent of the hyperplane normal")
    rhs = as_fraction(c) * norm2(alpha)
    # solve a.u = rhs, k.u = X
    u1 = MultiPoly.linear([Fraction(-a[1]) / det], rhs * k[1] / det)
    u2 = MultiPoly.linear([Fraction(a[0]) / det], -rhs * k[0] / det)
    return [u1, u2]


def surviving_coordinate(alpha: LatticeVector) -> LatticeVector:
    """A = <alpha1, z> on short-root hyperplanes, B = <beta1, z> on long-root ones."""
    return A1 if norm2(alpha) == 2 else B1


@dataclass
class PairResidue:
    tau_residue: FactoredRatFun
    lambda_residue: FactoredRatFun
    total: FactoredRatFun

    def to_json(self) -> dict:
        return {
            "tau": self.tau_residue.to_json(),
            "lambda": self.lambda_residue.to_json(),
            "sum": self.total.to_json(),
            "cancels": self.total.is_zero(),
        }


def single_residue(a: FactoredRatFun, alpha: LatticeVector, c: Scalar, keep: LatticeVector | None = None) -> FactoredRatFun:
    keep = surviving_coordinate(alpha) if keep is None else keep
    ell = u_form(alpha, -as_fraction(c) * norm2(alpha))
    try:
        return residue_at(a, ell, hyperplane_images(alpha, c, keep))
    except NotAPole:
        return _zero(1)


def residue_pair_sum(
    d: DifferenceOperator, tau: LatticeVector, lam: LatticeVector, alpha: LatticeVector, c: Scalar
) -> PairResidue:
    """Residues of a_tau, a_lambda and their sum along <alpha, z> = c alpha^2."""
    c = as_fraction(c)
    if reflect(alpha, tau) - alpha * (2 * c) != lam:
        raise ValueError("lambda must equal s_alpha(tau) - 2 c alpha")
    rt = single_residue(d.coefficient(tau), alpha, c)
    rl = single_residue(d.coefficient(lam), alpha, c)
    return PairResidue(rt, rl, rt + rl)


# ------------------------------------------------------------ expansions


@dataclass
class LeadingExpansion:
    kappa: dict
    linear_part: dict
    predicted: dict
    remainder_degree_ok: bool

    @property
    def matches_prediction(self) -> bool:
        return self.linear_part == self.predicted

    def to_json(self) -> dict:
        return {
            "kappa": [[t.to_json(), format_rational(k)] for t, k in self.kappa.items()],
            "linearPart": [
                [t.to_json(), [[g.to_json(), format_rational(v)] for g, v in parts.items()]]
                for t, parts in self.linear_part.items()
            ],
            "matchesPrediction": self.matches_prediction,
            "remainderDegreeOK": self.remainder_degree_ok,
        }


def _positive_roots(config: Configuration) -> list[LatticeVector]:
    return config.reduced_positive()


def leading_expansion(d: DifferenceOperator, config: Configuration) -> LeadingExpansion:
    """a_tau = kappa - sum_gamma c_gamma / <gamma, z> + (degree <= -2), for each shift."""
    n = d.nvars
    roots = _positive_roots(config)
    kappa, linear, predicted = {}, {}, {}
    ok = True
    for tau, a in d.terms.items():
        k = a.value_at_infinity()
        kappa[tau] = k
        rest = a - k
        parts = {}
        if rest.degree >= -1:
            top_num = rest.num.homogeneous_part(rest.num.degree) * rest.scalar
            top_den = {}
            for f, mult in rest.den.items():
                h = AffineForm(f.linear, 0)
                top_den[h] = top_den.get(h, 0) + mult
            top = FactoredRatFun(top_num, top_den)
            for g in roots:
                try:
                    res = residue_at(top, u_form(g))
                except NotAPole:
                    continue
                except NotSimplePole:
                    ok = False
                    continue
                if not (res.is_polynomial() and res.as_poly().is_constant()):
                    ok = False
                    continue
                parts[g] = res.as_poly().constant_value()
        for g in list(parts):
            if parts[g] == 0:
                del parts[g]
        linear[tau] = parts
        remainder = rest
        for g, v in parts.items():
            remainder = remainder - FactoredRatFun.inverse_affine(u_form(g)) * v
        if remainder.degree > -2:
            ok = False
        pred = {}
        for g in roots:
            mult = config.multiplicity(g) + config.multiplicity(g * 2)
            v = -k * gram_inner(tau, g, config.gram) * mult
            if v:
                pred[g] = v
        predicted[tau] = pred
    return LeadingExpansion(kappa, linear, predicted, ok)


def kappa_balance(d: DifferenceOperator) -> LatticeVector:
    """sum_tau kappa_tau * tau (zero for the symmetric operators)."""
    n = d.nvars
    total = LatticeVector(*([0] * n))
    for tau, k in d.leading_scalars().items():
        total = total + tau * k
    return total
