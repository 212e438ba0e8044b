"""Quasi-invariance: the shift conditions on hyperplanes, the delta-chain axiomatics, samples."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import AffineForm, MultiPoly, NotDivisible, exact_div_affine, format_rational, restrict_to_hyperplane
from .expoly import ExpPolynomial, e_monomial, shift_z
from .lattice import (
    ALPHAS,
    BETAS,
    GRAM,
    Configuration,
    LatticeVector,
    e_exponent,
    norm2,
    u_form,
    u_shift,
    z_squared,
)


class DivisionObstruction(ArithmeticError):
    def __init__(self, stage: int, witness: MultiPoly):
        super().__init__(f"delta chain stopped at stage {stage}: quotient is not divisible")
        self.stage = stage
        self.witness = witness


@dataclass
class QuasiInvarianceReport:
    passed: bool
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "failures": [
                {"vector": v.to_json(), "shift": s, "witness": w.to_json()} for v, s, w in self.failures
            ],
        }


def shift_difference(p, gamma: LatticeVector, s: int, gram) -> MultiPoly:
    """Numerator of f(z + s*gamma) - f(z - s*gamma), restricted to <gamma, z> = 0."""
    delta = [s * c for c in u_shift(gamma, gram)]
    ell = u_form(gamma)
    if isinstance(p, ExpPolynomial):
        e = [s * c for c in e_exponent(gamma, gram)]
        h = [abs(c) for c in e]
        plus = shift_z(p.num, delta, p.zvars) * e_monomial([a + b for a, b in zip(e, h)], p.zvars)
        minus = shift_z(p.num, [-d for d in delta], p.zvars) * e_monomial([b - a for a, b in zip(e, h)], p.zvars)
        return restrict_to_hyperplane(plus - minus, ell, p.zvars)
    diff = p.shift(delta) - p.shift([-d for d in delta])
    return restrict_to_hyperplane(diff, ell)


def is_quasi_invariant(p: MultiPoly | ExpPolynomial, config: Configuration, first_only: bool = False) -> QuasiInvarianceReport:
    """Check p(z + s*gamma) = p(z - s*gamma) on <gamma, z> = 0 for all gamma and s in A_gamma.

    For an ExpPolynomial the exponential factor contributes E^{+-s*gamma}.
    """
    zv = p.zvars if isinstance(p, ExpPolynomial) else p.nvars
    if zv != len(config.gram):
        raise ValueError("polynomial and configuration have different dimensions")
    failures = []
    for gamma in config.reduced_positive():
        for s in config.axiom_set(gamma):
            w = shift_difference(p, gamma, s, config.gram)
            if not w.is_zero():
                failures.append((gamma, s, w))
                if first_only:
                    return QuasiInvarianceReport(False, failures)
    return QuasiInvarianceReport(not failures, failures)


def _delta(f: ExpPolynomial | MultiPoly, vec: LatticeVector, gram) -> ExpPolynomial | MultiPoly:
    delta = u_shift(vec, gram)
    neg = [-d for d in delta]
    if isinstance(f, ExpPolynomial):
        e = e_exponent(vec, gram)
        return f.translate(delta, e) - f.translate(neg, [-c for c in e])
    return f.shift(delta) - f.shift(neg)


def _divide(f, ell: AffineForm):
    if isinstance(f, ExpPolynomial):
        lifted = ell.as_poly().embed(f.nvars)
        try:
            q = f.num.exact_div(lifted)
        except ArithmeticError:
            raise NotDivisible(ell, restrict_to_hyperplane(f.num, ell, f.zvars)) from None
        return ExpPolynomial(q, f.den, f.shift, f.zvars)
    return exact_div_affine(f, ell)


def delta_axiom_stages(
    psi: ExpPolynomial | MultiPoly, alpha: LatticeVector, m_alpha: int, m_2alpha: int, gram=None
) -> tuple[bool, int | None, MultiPoly | None]:
    """Run the delta chain; return (passed, failing stage or None, witness).

    Stages 1..m_alpha use delta_alpha, stages m_alpha+1..m_alpha+m_2alpha use
    delta_{2 alpha}.  Each stage must produce a function vanishing on
    <alpha, z> = 0, which is then divided by <alpha, z> before the next stage.
    """
    gram = GRAM if gram is None else gram
    if m_alpha < 1:
        raise ValueError("the delta chain needs m_alpha >= 1")
    ell = u_form(alpha)
    f = psi
    steps = [alpha] * m_alpha + [alpha * 2] * m_2alpha
    for stage, vec in enumerate(steps, start=1):
        g = _delta(f, vec, gram)
        try:
            f = _divide(g, ell)
        except NotDivisible as exc:
            return False, stage, exc.witness
    return True, None, None


def delta_axiom_check(
    psi: ExpPolynomial | MultiPoly,
    alpha: LatticeVector,
    m_alpha: int,
    m_2alpha: int,
    gram=None,
    raise_on_obstruction: bool = False,
) -> bool:
    """True iff every stage of the delta chain vanishes on the hyperplane <alpha, z> = 0.

    With ``raise_on_obstruction`` a failure before the final stage raises
    DivisionObstruction carrying the stage index instead of returning False.
    """
    ok, stage, witness = delta_axiom_stages(psi, alpha, m_alpha, m_2alpha, gram)
    if not ok and raise_on_obstruction and stage < m_alpha + m_2alpha:
        raise DivisionObstruction(stage, witness)
    return ok


# ------------------------------------------------------------------ samples


def q_polynomial_for(config: Configuration) -> MultiPoly:
    """Product of (<g,z> - s g^2)(<g,z> + s g^2) over reduced positive g and s in A_g."""
    n = len(config.gram)
    out = MultiPoly.constant(1, n)
    for gamma in config.reduced_positive():
        lin = u_form(gamma).as_poly()
        g2 = norm2(gamma, config.gram)
        for s in config.axiom_set(gamma):
            out = out * (lin**2 - (s * g2) ** 2)
    return out


def orbit_product(vectors) -> MultiPoly:
    out = None
    for v in vectors:
        lin = u_form(v).as_poly()
        out = lin if out is None else out * lin
    return out


def sample_ring_elements(config: Configuration, count: int, seed: int) -> list[MultiPoly]:
    """Deterministic quasi-invariant polynomials for preservation tests.

    The first two samples are z^2 and Q; the rest are random low-degree
    combinations of powers of z^2, Q * (z^2)^k, squares of Weyl orbit products,
    and Q times a random polynomial.
    """
    if config.gram != GRAM:
        raise ValueError("sample generation is defined for configurations in the G2 lattice")
    rng = random.Random(seed)
    n = len(config.gram)
    z2 = z_squared(config.gram)
    q = q_polynomial_for(config)
    gens = [z2, q]
    short = orbit_product(BETAS) ** 2
    long = orbit_product(ALPHAS) ** 2

    def coeff() -> Fraction:
        return Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4))

    def one() -> MultiPoly:
        kind = rng.randrange(5)
        if kind == 0:
            return z2 ** rng.randint(1, 3)
        if kind == 1:
            return q * z2 ** rng.randint(0, 1)
        if kind == 2:
            return short if rng.random() < 0.5 else long
        if kind == 3:
            terms = {}
            for _ in range(rng.randint(1, 3)):
                e = [0] * n
                for _ in range(rng.randint(0, 2)):
                    e[rng.randrange(n)] += 1
                terms[tuple(e)] = coeff()
            return q * MultiPoly.from_terms(terms, n)
        return z2 * coeff() + z2**2 * coeff() + coeff()

    out = gens[:count]
    while len(out) < count:
        parts = [one() for _ in range(rng.randint(1, 2))]
        p = MultiPoly.zero(n)
        for part in parts:
            p = p + part * coeff()
        if p.is_zero() or p.is_constant():
            continue
        out.append(p)
    for p in out:
        if not is_quasi_invariant(p, config).passed:
            raise AssertionError("sample generator produced a non-quasi-invariant polynomial")
    return out


def report_summary(report: QuasiInvarianceReport) -> str:
    if report.passed:
        return "passed"
    v, s, w = report.failures[0]
    return f"failed at {v} s={s} witness={w} ({format_rational(len(report.failures))} failures)"
