"""Baker-Akhiezer function for AG2: construction by iterated difference operators and its checks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .exact import E_VARS, LaurentFrac, MultiPoly, Scalar, as_fraction, format_rational
from .expoly import ExpPolynomial, e_monomial
from .lattice import (
    ALPHAS,
    BETAS,
    G2_POSITIVE,
    GRAM,
    LatticeVector,
    build_config,
    e_exponent,
    gram_inner,
    gram_inverse,
    norm2,
    u_form,
)
from .operators import DifferenceOperator, OperatorFrame, ResidueObstruction, make_D1, make_D2
from .quasi import delta_axiom_stages, is_quasi_invariant, q_polynomial_for, report_summary, shift_difference


class LeadingTermMismatch(ArithmeticError):
    pass


class RankDeficient(ArithmeticError):
    def __init__(self, rank: int, unknowns: int):
        super().__init__(f"linear system has rank {rank} < {unknowns} unknowns")
        self.rank = rank
        self.unknowns = unknowns


class InconsistentSystem(ArithmeticError):
    pass


VIAS = ("D1", "D2")


def operator_for(m: int, via: str) -> DifferenceOperator:
    via = via.upper()
    if via == "D1":
        return make_D1(m)
    if via == "D2":
        return make_D2(m)
    raise ValueError(f"unknown operator {via!r}")


def total_degree(m: int) -> int:
    """M = sum of AG2 multiplicities over positive vectors = 12m + 3."""
    return sum(k for _, k in build_config("AG2", m).vectors)


def g2_multiplicities(m: int) -> dict[LatticeVector, int]:
    """m_gamma + m_{2 gamma} for gamma in G2+."""
    cfg = build_config("AG2", m)
    return {g: cfg.multiplicity(g) + cfg.multiplicity(2 * g) for g in G2_POSITIVE}


def couplings(m: int) -> dict[LatticeVector, Fraction]:
    """g_gamma = m_gamma (m_gamma + 2 m_{2gamma} + 1) gamma^2 over the positive AG2 vectors."""
    cfg = build_config("AG2", m)
    out = {}
    for v, k in cfg.vectors:
        g = k * (k + 2 * cfg.multiplicity(2 * v) + 1) * norm2(v)
        if g:
            out[v] = Fraction(g)
    return out


def mu_function(d: DifferenceOperator) -> LaurentFrac:
    terms: dict[tuple, Fraction] = {}
    for tau, k in d.leading_scalars().items():
        e = d.e_exponent(tau)
        terms[e] = terms.get(e, 0) + k
        terms[(0,) * E_VARS] = terms.get((0,) * E_VARS, 0) - k
    return LaurentFrac.from_laurent_terms(terms)


def _weighted_sum(d: DifferenceOperator, gamma: LatticeVector) -> LaurentFrac:
    terms: dict[tuple, Fraction] = {}
    for tau, k in d.leading_scalars().items():
        e = d.e_exponent(tau)
        terms[e] = terms.get(e, 0) + k * gram_inner(tau, gamma, d.gram)
    return LaurentFrac.from_laurent_terms(terms)


def c_function(m: int, via: str = "D1", d: DifferenceOperator | None = None) -> LaurentFrac:
    d = operator_for(m, via) if d is None else d
    out = LaurentFrac.constant(Fraction(math.factorial(total_degree(m)), 8))
    for gamma, k in g2_multiplicities(m).items():
        if k:
            out = out * _weighted_sum(d, gamma) ** k
    return out


def q_polynomial(m: int) -> MultiPoly:
    return q_polynomial_for(build_config("AG2", m))


def leading_product(m: int) -> MultiPoly:
    """prod over positive AG2 vectors of <gamma, z>^{m_gamma}."""
    out = MultiPoly.constant(1, 2)
    for v, k in build_config("AG2", m).vectors:
        out = out * u_form(v).as_poly() ** k
    return out


@dataclass
class BAFunction:
    m: int
    P: ExpPolynomial
    built_via: str
    verification: dict = field(default_factory=dict)
    degree_trace: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def degree(self):
        return self.P.z_degree

    def laurent_coefficients(self) -> bool:
        return self.P.has_laurent_coefficients()

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "builtVia": self.built_via,
            "P": self.P.to_json(),
            "verification": self.verification,
            "degreeTrace": self.degree_trace,
            "timing": self.timing,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "BAFunction":
        return cls(
            int(data["m"]),
            ExpPolynomial.from_json(data["P"]),
            data["builtVia"],
            dict(data.get("verification", {})),
            list(data.get("degreeTrace", [])),
            dict(data.get("timing", {})),
        )


def _mu_numerator(d: DifferenceOperator, h: Sequence[int], total: int) -> MultiPoly:
    """E^h * mu as a polynomial in the z+E ring."""
    zv = total - E_VARS
    out = MultiPoly.zero(total)
    base = e_monomial(h, zv)
    for tau, k in d.leading_scalars().items():
        e = d.e_exponent(tau)
        out = out + (e_monomial([a + b for a, b in zip(e, h)], zv) - base) * k
    return out


def iterate(
    d: DifferenceOperator,
    start: ExpPolynomial,
    steps: int,
    on_step: Callable[[int, ExpPolynomial], None] | None = None,
) -> tuple[ExpPolynomial, list[int]]:
    """(D - mu)^steps applied to start; returns the result and the z-degree trace."""
    fr: OperatorFrame = d.frame(E_VARS)
    if not start.den.is_constant():
        raise ValueError("iteration expects a Laurent-polynomial start")
    mu_h = _mu_numerator(d, fr.h, fr.total)
    g = fr.work(start.num * (1 / start.den.constant_value()))
    shift = list(start.shift)
    trace = [g.degree_in(range(2))]
    for k in range(1, steps + 1):
        g = fr.apply(g) - mu_h * g
        shift = [s - h for s, h in zip(shift, fr.h)]
        trace.append(g.degree_in(range(2)))
        if on_step is not None:
            on_step(k, ExpPolynomial(fr.unwork(g), None, shift))
    return ExpPolynomial(fr.unwork(g), None, shift), trace


def construct_ba(
    m: int,
    via: str = "D1",
    check_each: bool = False,
    progress: Callable[[str], None] | None = None,
    on_step: Callable[[int, ExpPolynomial], None] | None = None,
) -> BAFunction:
    """psi = c^{-1} (D - mu)^M [Q e^<z,x>].

    ``on_step(k, f)`` sees every undivided iterate; the last one is (D - mu)^M [Q e].
    """
    t0 = time.perf_counter()
    d = operator_for(m, via)
    M = total_degree(m)
    cfg = build_config("AG2", m)
    start = ExpPolynomial.from_poly(q_polynomial(m))
    failures = []

    def step(k: int, f: ExpPolynomial) -> None:
        if progress:
            progress(f"iteration {k}/{M}: z-degree {f.z_degree}")
        if check_each:
            rep = is_quasi_invariant(f, cfg, first_only=True)
            if not rep.passed:
                failures.append((k, report_summary(rep)))
        if on_step:
            on_step(k, f)

    raw, trace = iterate(d, start, M, step)
    t1 = time.perf_counter()
    c = c_function(m, via, d)
    P = raw.divide_by_laurent(c).reduced()
    lead = P.z_homogeneous(M)
    expected = ExpPolynomial.from_poly(leading_product(m))
    if not lead == expected:
        raise LeadingTermMismatch(f"leading part after division by c(x) is {lead}, expected {expected}")
    psi = BAFunction(m, P, via.upper(), degree_trace=trace)
    psi.verification["degreeLaw"] = trace == [2 * M - k for k in range(M + 1)]
    psi.verification["leadingTerm"] = True
    psi.verification["laurentCoefficients"] = P.den.is_constant()
    if check_each:
        psi.verification["ringMembershipEachStep"] = not failures
    psi.timing = {"iterate_s": round(t1 - t0, 3), "total_s": round(time.perf_counter() - t0, 3)}
    return psi


def annihilation_check(psi: BAFunction, d: DifferenceOperator | None = None) -> bool:
    """(D - mu) kills c * psi, i.e. (D - mu)^{M+1}[Q e] = 0."""
    d = operator_for(psi.m, psi.built_via) if d is None else d
    return verify_eigen_difference(psi, d)


# --------------------------------------------------------------- checks


@dataclass
class AxiomReport:
    shift_conditions: bool
    leading_term: bool
    delta_chains: dict
    failures: list

    @property
    def passed(self) -> bool:
        return self.shift_conditions and self.leading_term and all(v for v in self.delta_chains.values() if v is not None)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "shiftConditions": self.shift_conditions,
            "leadingTerm": self.leading_term,
            "deltaChains": self.delta_chains,
            "failures": self.failures,
        }


def verify_axioms(psi: BAFunction) -> AxiomReport:
    cfg = build_config("AG2", psi.m)
    rep = is_quasi_invariant(psi.P, cfg)
    failures = [f"{v} s={s}" for v, s, _ in rep.failures]
    M = total_degree(psi.m)
    top = psi.P.z_homogeneous(M)
    leading_ok = psi.P.z_degree == M and top == ExpPolynomial.from_poly(leading_product(psi.m))
    chains = {}
    for v in cfg.reduced_positive():
        ma, m2a = cfg.multiplicity(v), cfg.multiplicity(2 * v)
        key = ",".join(v.to_json())
        if ma < 1:
            chains[key] = None
            continue
        ok, stage, _ = delta_axiom_stages(psi.P, v, ma, m2a, cfg.gram)
        chains[key] = ok
        if not ok:
            failures.append(f"delta chain for {v} stops at stage {stage}")
    return AxiomReport(rep.passed, leading_ok, chains, failures)


def verify_eigen_difference(psi: BAFunction | ExpPolynomial, d: DifferenceOperator) -> bool:
    P = psi.P if isinstance(psi, BAFunction) else psi
    try:
        lhs = d.apply_to_exp(P)
    except ResidueObstruction:
        # D P has a pole, so it cannot equal mu P
        return False
    return (lhs - P.scale(mu_function(d))).is_zero()


def _theta(p: MultiPoly, j: int, zvars: int) -> MultiPoly:
    """E_j d/dE_j."""
    return p.derivative(zvars + j) * MultiPoly.variable(zvars + j, p.nvars)


def verify_eigen_schrodinger(psi: BAFunction | ExpPolynomial, m: int) -> bool:
    """L psi = z^2 psi with L = Laplacian in x minus sum g_gamma / sinh^2 <gamma, x>.

    Writing psi = (N/D) e^<z,x> and theta_j = E_j d/dE_j, the equation becomes
    sum G^ij theta_i theta_j F + 2 sum (G^{-1} u)_j theta_j F - V F = 0 with
    F = N/D; it is multiplied through by D^3 and the potential's denominator.
    """
    P = psi.P if isinstance(psi, BAFunction) else psi
    zv = P.zvars
    n = P.nvars
    N, D = P._parts()
    inv = gram_inverse(GRAM)
    u = [MultiPoly.variable(i, n) for i in range(zv)]
    ginv_u = [sum((inv[j][k] * u[k] for k in range(zv)), MultiPoly.zero(n)) for j in range(zv)]
    thD = [_theta(D, j, zv) for j in range(E_VARS)]
    A = [D * _theta(N, j, zv) - N * thD[j] for j in range(E_VARS)]
    kinetic = MultiPoly.zero(n)
    for i in range(E_VARS):
        for j in range(E_VARS):
            if inv[i][j]:
                kinetic = kinetic + (D * _theta(A[j], i, zv) - A[j] * thD[i] * 2) * inv[i][j]
    drift = MultiPoly.zero(n)
    for j in range(E_VARS):
        drift = drift + ginv_u[j] * A[j] * 2
    # V = sum g * 4 E^{2g} / (E^{2g} - 1)^2 with a common denominator W
    pot_terms = []
    W = MultiPoly.constant(1, n)
    for v, g in couplings(m).items():
        e2 = [2 * c for c in e_exponent(v)]
        pos = e_monomial([max(c, 0) for c in e2], zv)
        neg = e_monomial([max(-c, 0) for c in e2], zv)
        # E^{2g} = pos/neg, so 4E^{2g}/(E^{2g}-1)^2 = 4 pos neg / (pos - neg)^2
        pot_terms.append((g * 4 * pos * neg, (pos - neg) ** 2))
        W = W * (pos - neg) ** 2
    V_num = MultiPoly.zero(n)
    for num, den in pot_terms:
        V_num = V_num + num * W.exact_div(den)
    total = (kinetic + drift * D) * W - V_num * N * D**2
    return total.is_zero()


def verify_subleading(psi: BAFunction, sign: int = 1) -> bool:
    """P1 = -sum_gamma g_gamma/(2 <gamma,z>) coth<gamma,x> P0 for the top two homogeneous parts."""
    M = total_degree(psi.m)
    P0 = psi.P.z_homogeneous(M)
    P1 = psi.P.z_homogeneous(M - 1)
    rhs = ExpPolynomial.zero(psi.P.zvars)
    for v, g in couplings(psi.m).items():
        e2 = tuple(2 * c for c in e_exponent(v))
        coth = (LaurentFrac.monomial(e2) + 1) / (LaurentFrac.monomial(e2) - 1)
        lin = u_form(v).as_poly().embed(P0.nvars)
        quotient = ExpPolynomial(P0.num.exact_div(lin), P0.den, P0.shift, P0.zvars)
        rhs = rhs + quotient.scale(coth * Fraction(-sign * g, 2))
    return P1 == rhs


# ---------------------------------------------------------------- oracle


def _restricted_difference(p: MultiPoly, gamma: LatticeVector, s: int) -> MultiPoly:
    """[E^{e+h} p(z + s gamma) - E^{h-e} p(z - s gamma)] restricted to <gamma, z> = 0."""
    return shift_difference(ExpPolynomial(p), gamma, s, GRAM)


def _oracle_rows(m: int) -> tuple[list[tuple], list[MultiPoly], MultiPoly]:
    cfg = build_config("AG2", m)
    M = total_degree(m)
    monos = [
        (a, d - a) for d in range(M - 1, -1, -1) for a in range(d, -1, -1)
    ]
    lead = leading_product(m).embed(2 + E_VARS)
    conds = [(v, s) for v in cfg.reduced_positive() for s in cfg.axiom_set(v)]
    return monos, conds, lead


def _collect(poly: MultiPoly, zpos: int) -> dict[int, MultiPoly]:
    """Group a restricted polynomial by the power of the hyperplane parameter."""
    out: dict[int, dict] = {}
    n = poly.nvars
    for e, c in poly.terms().items():
        out.setdefault(e[zpos], {})[tuple(0 if i == zpos else x for i, x in enumerate(e))] = c
    return {k: MultiPoly.from_terms(v, n) for k, v in out.items()}


def _eliminate(rows: list[list], zero, is_zero, div, mul, sub, unknowns: int) -> list:
    """Gauss-Jordan elimination with the first nonzero pivot in column order.

    Each row is [coefficients..., right-hand side].  Returns the unique solution.
    """
    rows = [r for r in rows if not all(is_zero(x) for x in r)]
    pivots = []
    r = 0
    for col in range(unknowns):
        piv = next((i for i in range(r, len(rows)) if not is_zero(rows[i][col])), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        rows[r] = [div(x, p) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not is_zero(rows[i][col]):
                f = rows[i][col]
                rows[i] = [sub(x, mul(f, y)) for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    if len(pivots) < unknowns:
        raise RankDeficient(len(pivots), unknowns)
    for i in range(r, len(rows)):
        if not is_zero(rows[i][-1]):
            raise InconsistentSystem("the axioms admit no solution with this leading term")
    return [rows[i][-1] for i in range(unknowns)]


def ba_linear_oracle(m: int, e_values: Sequence[Scalar] | None = None) -> BAFunction:
    """Solve the BA axioms as a linear system for the lower-order coefficients of P.

    Without ``e_values`` the system is solved over Q(E1, E2); with them, the
    E-variables are specialized first and the result has rational coefficients.
    """
    monos, conds, lead = _oracle_rows(m)
    n = 2 + E_VARS
    unknowns = len(monos)
    # one block of equations per condition and power of the hyperplane parameter
    blocks: list[dict[int, list]] = []
    for v, s in conds:
        rhs = _collect(_restricted_difference(lead, v, s), 0)
        cols = []
        for a, b in monos:
            mono = MultiPoly.from_terms({(a, b, 0, 0): 1}, n)
            cols.append(_collect(_restricted_difference(mono, v, s), 0))
        powers = set(rhs)
        for c in cols:
            powers |= set(c)
        for k in sorted(powers):
            blocks.append({"coeffs": [c.get(k) for c in cols], "rhs": rhs.get(k)})
    if e_values is None:
        proj = [MultiPoly.zero(E_VARS)] + [MultiPoly.variable(i, E_VARS) for i in range(E_VARS)]

        def conv(p):
            return LaurentFrac.constant(0) if p is None else LaurentFrac(p.compose(proj))

        rows = [[conv(c) for c in b["coeffs"]] + [-conv(b["rhs"])] for b in blocks]
        sol = _eliminate(
            rows, LaurentFrac.constant(0), lambda x: x.is_zero(), lambda x, y: x / y, lambda x, y: x * y, lambda x, y: x - y, unknowns
        )
        P = ExpPolynomial.from_poly(leading_product(m))
        for (a, b), c in zip(monos, sol):
            if not c.is_zero():
                P = P + ExpPolynomial.from_poly(MultiPoly.from_terms({(a, b): 1}, 2), c)
        return BAFunction(m, P, "oracle", verification={"rank": unknowns, "unknowns": unknowns})
    vals = [as_fraction(x) for x in e_values]
    if any(v == 0 for v in vals):
        raise ValueError("E values must be nonzero")
    point = [Fraction(0)] + vals

    def num(p):
        return Fraction(0) if p is None else p.evaluate(point)

    rows = [[num(c) for c in b["coeffs"]] + [-num(b["rhs"])] for b in blocks]
    sol = _eliminate(rows, Fraction(0), lambda x: x == 0, lambda x, y: x / y, lambda x, y: x * y, lambda x, y: x - y, unknowns)
    terms = {(a, b): c for (a, b), c in zip(monos, sol)}
    poly = leading_product(m) + MultiPoly.from_terms(terms, 2)
    # stored as an E-free ExpPolynomial; the specialization is recorded in the metadata
    out = BAFunction(m, ExpPolynomial.from_poly(poly), "oracle", verification={"rank": unknowns, "unknowns": unknowns})
    out.verification["eValues"] = [format_rational(v) for v in vals]
    return out


# ---------------------------------------------------------- rational limit


@dataclass
class LimitReport:
    quadratic_form: bool
    vector_identity: bool
    multiplicity_bookkeeping: bool
    scale: Fraction

    @property
    def passed(self) -> bool:
        return self.quadratic_form and self.vector_identity and self.multiplicity_bookkeeping

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "quadraticForm": self.quadratic_form,
            "quadraticScale": format_rational(self.scale),
            "vectorIdentity": self.vector_identity,
            "multiplicityBookkeeping": self.multiplicity_bookkeeping,
        }


def rational_limit_identities(m: int) -> LimitReport:
    basis = [LatticeVector(1, 0), LatticeVector(0, 1)]
    weighted = [(3, 2 * b) for b in BETAS] + [(1, 2 * a) for a in ALPHAS]
    form = [[sum(k * gram_inner(t, v) * gram_inner(t, w) for k, t in weighted) for w in basis] for v in basis]
    ratios = {form[i][j] / GRAM[i][j] for i in range(2) for j in range(2) if GRAM[i][j]}
    scale = ratios.pop() if len(ratios) == 1 else Fraction(0)
    quad = scale == 72 and all(form[i][j] == 72 * GRAM[i][j] for i in range(2) for j in range(2))
    b1, b2, b3 = BETAS
    a1, a2, a3 = ALPHAS
    vec = 2 * (2 * b1) + 2 * b2 - 2 * b3 + 2 * a3 - 2 * a2 == 12 * b1
    cfg = build_config("AG2", m)
    book = cfg.multiplicity(b1) + cfg.multiplicity(2 * b1) == 3 * m + 1 and 12 * (3 * m + 1) * 12 == 144 * (
        cfg.multiplicity(b1) + cfg.multiplicity(2 * b1)
    )
    return LimitReport(quad, vec, book, scale)


__all__ = [
    "BAFunction",
    "InconsistentSystem",
    "LeadingTermMismatch",
    "RankDeficient",
    "ba_linear_oracle",
    "c_function",
    "construct_ba",
    "mu_function",
    "q_polynomial",
    "rational_limit_identities",
    "verify_axioms",
    "verify_eigen_difference",
    "verify_eigen_schrodinger",
    "verify_subleading",
]
