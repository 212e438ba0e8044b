"""The m = 0 operator on G2, its three-variable A2 form, and the A1 operator identities."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .exact import AffineForm, FactoredRatFun, MultiPoly, Scalar, as_fraction
from .lattice import (
    BETAS,
    GRAM,
    Configuration,
    LatticeVector,
    coroot_pairing,
    gram_inner,
    identity_gram,
    norm2,
    reflect,
    standard_config,
    u_form,
    z_squared,
)
from .operators import (
    LONG_ORBIT,
    SHORT_ORBIT,
    DifferenceOperator,
    ResidueObstruction,
    _factor,
    apply_to_poly,
    commutator,
    compose,
    make_D2,
    power,
    restrict_line,
)
from .quasi import is_quasi_invariant, q_polynomial_for, sample_ring_elements

A1_GRAM = identity_gram(2)
A2_GRAM = identity_gram(3)


def _unit(i: int, n: int, c: int = 1) -> LatticeVector:
    return LatticeVector(*[c if j == i else 0 for j in range(n)])


def _vec(*coords: int) -> LatticeVector:
    return LatticeVector(*coords)


def _difference_factor(c: Scalar, i: int, j: int, n: int, offset: Scalar = 0) -> FactoredRatFun:
    """1 - c / (z_i - z_j + offset)."""
    lin = [0] * n
    lin[i], lin[j] = 1, -1
    return FactoredRatFun.one_minus(as_fraction(c), AffineForm(lin, as_fraction(offset)))


def _prod(factors: Sequence[FactoredRatFun], n: int, scalar: Scalar = 1) -> FactoredRatFun:
    out = FactoredRatFun.constant(scalar, n)
    for f in factors:
        out = out * f
    return out


# ------------------------------------------------------------ operators


def make_d0() -> DifferenceOperator:
    """The m = 0 operator on the G2 lattice with shifts in G2 itself."""
    terms = {}
    for b in BETAS:
        for eps in (1, -1):
            tau = eps * b
            parts = [_factor(g, Fraction(1, 2), Fraction(-1, 2)) for g in SHORT_ORBIT if coroot_pairing(tau, g) == Fraction(1, 2)]
            parts += [_factor(g, 1, 0) for g in SHORT_ORBIT if coroot_pairing(tau, g) == 1]
            terms[tau] = _prod(parts, 2, 3)
    for tau in LONG_ORBIT:
        parts = [_factor(g, Fraction(3, 2), Fraction(1, 2)) for g in SHORT_ORBIT if coroot_pairing(tau, g) == Fraction(3, 2)]
        terms[tau] = _prod(parts, 2)
    return DifferenceOperator(terms, GRAM, name="D0")


def _s2_coefficient(tau: LatticeVector, n: int) -> FactoredRatFun:
    parts = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            p = tau[i] - tau[j]
            if p == 1:
                parts.append(_difference_factor(1, i, j, n, -1))
            elif p == 2:
                parts.append(_difference_factor(2, i, j, n))
    return _prod(parts, n, 3)


def _s1_coefficient(tau: LatticeVector, n: int) -> FactoredRatFun:
    parts = [
        _difference_factor(3, i, j, n, 1) for i in range(n) for j in range(n) if i != j and tau[i] - tau[j] == 3
    ]
    return _prod(parts, n)


def _t_sum(s1, s2, n: int, gram, name: str) -> DifferenceOperator:
    coeffs: dict[LatticeVector, FactoredRatFun] = {}
    for tau in s2:
        coeffs[tau] = coeffs[tau] + _s2_coefficient(tau, n) if tau in coeffs else _s2_coefficient(tau, n)
    for tau in s1:
        coeffs[tau] = coeffs[tau] + _s1_coefficient(tau, n) if tau in coeffs else _s1_coefficient(tau, n)
    return DifferenceOperator.from_t_form(coeffs, gram, name)


def _s1_distinct(n: int) -> list[LatticeVector]:
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if k not in (i, j):
                    out.append(_unit(i, n, 2) + _unit(j, n, 2) - _unit(k, n))
    return out


def _s1_with_repeat(n: int) -> list[LatticeVector]:
    out = []
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                if k not in (i, j):
                    out.append(_unit(i, n, 2) + _unit(j, n, 2) - _unit(k, n))
    return out


def _s1_k_only_differs_from_i(n: int) -> list[LatticeVector]:
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                if k != i:
                    out.append(_unit(i, n, 2) + _unit(j, n, 2) - _unit(k, n))
    return out


# index-set readings of the second part of S1, tried in this order
S1_READINGS: dict[str, Callable[[int], list[LatticeVector]]] = {
    "i<j, k distinct from i and j": _s1_distinct,
    "i<=j, k distinct from i and j": _s1_with_repeat,
    "i<j, k distinct from i only": _s1_k_only_differs_from_i,
}


def a2_shift_sets(reading: str) -> tuple[list[LatticeVector], list[LatticeVector]]:
    n = 3
    s1 = [_unit(i, n, 3) for i in range(n)] + S1_READINGS[reading](n)
    s2 = [_unit(i, n, 2) + _unit(j, n) for i in range(n) for j in range(n) if i != j]
    return s1, s2


def make_tilde_d0(reading: str = "i<j, k distinct from i and j") -> DifferenceOperator:
    s1, s2 = a2_shift_sets(reading)
    return _t_sum(s1, s2, 3, A2_GRAM, f"tildeD0[{reading}]")


def make_hat_d0() -> DifferenceOperator:
    """The A1 version built from the shift sets {3e1, 3e2} and {2e1+e2, e1+2e2}."""
    return _t_sum([_vec(3, 0), _vec(0, 3)], [_vec(2, 1), _vec(1, 2)], 2, A1_GRAM, "hatD0")


def make_a1_d1() -> DifferenceOperator:
    return DifferenceOperator.from_t_form(
        {
            _vec(1, 2): _prod([_difference_factor(1, 1, 0, 2, -1)], 2, 3),
            _vec(3, 0): _difference_factor(3, 0, 1, 2, 1),
        },
        A1_GRAM,
        "A1_D1",
    )


def make_a1_d2() -> DifferenceOperator:
    return DifferenceOperator.from_t_form(
        {
            _vec(2, 1): _prod([_difference_factor(1, 0, 1, 2, -1)], 2, 3),
            _vec(0, 3): _difference_factor(3, 1, 0, 2, 1),
        },
        A1_GRAM,
        "A1_D2",
    )


def make_dmsl() -> DifferenceOperator:
    return DifferenceOperator.from_t_form(
        {_vec(2, 0): _difference_factor(2, 0, 1, 2), _vec(0, 2): _difference_factor(2, 1, 0, 2)},
        A1_GRAM,
        "Dmsl",
    )


def make_dqm() -> DifferenceOperator:
    return DifferenceOperator(
        {
            _vec(4, 0): _difference_factor(2, 0, 1, 2) * _difference_factor(2, 0, 1, 2, 2),
            _vec(0, 4): _difference_factor(2, 1, 0, 2) * _difference_factor(2, 1, 0, 2, 2),
        },
        A1_GRAM,
        name="Dqm",
    )


def make_m0_family() -> dict[str, DifferenceOperator]:
    return {
        "D0": make_d0(),
        "tildeD0": make_tilde_d0(),
        "hatD0": make_hat_d0(),
        "A1_D1": make_a1_d1(),
        "A1_D2": make_a1_d2(),
        "Dmsl": make_dmsl(),
        "Dqm": make_dqm(),
    }


def swap_variables(d: DifferenceOperator) -> DifferenceOperator:
    """Conjugate a two-variable operator by z1 <-> z2."""
    if d.nvars != 2:
        raise ValueError("swap is defined for two variables")
    images = [MultiPoly.variable(1, 2), MultiPoly.variable(0, 2)]
    terms = {_vec(t[1], t[0]): a.compose_affine(images) for t, a in d.terms.items()}
    return DifferenceOperator(terms, d.gram, d.const.compose_affine(images), name=f"swap({d.name})")


# ------------------------------------------------------- quasiminuscule


def reflection_orbit(v: LatticeVector, roots: Sequence[LatticeVector], gram) -> list[LatticeVector]:
    seen = [v]
    frontier = [v]
    while frontier:
        nxt = []
        for w in frontier:
            for r in roots:
                x = reflect(r, w, gram)
                if x not in seen:
                    seen.append(x)
                    nxt.append(x)
        frontier = nxt
    return sorted(seen)


def quasiminuscule_operator(
    weight: LatticeVector, roots: Sequence[LatticeVector], multiplicity: int, gram, scale: Scalar = 1, name: str = ""
) -> DifferenceOperator:
    """sum over the orbit of ``weight`` of a_tau (T_tau - 1) for a reduced root system.

    a_tau is the product over roots r with <r, tau> > 0 and k = 0 .. <r^vee, tau>/2 - 1
    of 1 - multiplicity r^2 / (<r, z> + k r^2).  ``roots`` lists both signs.
    """
    n = len(gram)
    terms = {}
    for tau in reflection_orbit(weight, roots, gram):
        parts = []
        for r in roots:
            pair = gram_inner(r, tau, gram)
            if pair <= 0:
                continue
            r2 = norm2(r, gram)
            steps = 2 * pair / r2 / 2
            if steps.denominator != 1:
                raise ValueError(f"{weight} is not quasiminuscule for these roots")
            for k in range(int(steps)):
                parts.append(FactoredRatFun.one_minus(multiplicity * r2, u_form(r, k * r2)))
        terms[tau] = _prod(parts, n, scale)
    return DifferenceOperator(terms, gram, name=name or f"qm({list(weight)})")


def doubled_a2_roots() -> list[LatticeVector]:
    return [s * 2 * b for b in BETAS for s in (1, -1)]


# ------------------------------------------------------------- reports


@dataclass
class PreservationReport:
    operator: str
    passed: bool
    checked: int
    excluded: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    reading: str | None = None

    def to_json(self) -> dict:
        out = {
            "operator": self.operator,
            "passed": self.passed,
            "checked": self.checked,
            "excluded": self.excluded,
            "failures": self.failures,
        }
        if self.reading is not None:
            out["reading"] = self.reading
        return out


def _preserves(d: DifferenceOperator, config: Configuration, samples: Sequence[MultiPoly], name: str) -> PreservationReport:
    failures, excluded, checked = [], [], 0
    for idx, p in enumerate(samples):
        if not is_quasi_invariant(p, config).passed:
            excluded.append(idx)
            continue
        checked += 1
        try:
            out = apply_to_poly(d, p)
        except ResidueObstruction as exc:
            failures.append({"sample": idx, "reason": "pole", "hyperplane": str(exc.ell)})
            continue
        if not is_quasi_invariant(out, config).passed:
            failures.append({"sample": idx, "reason": "leaves the ring"})
    return PreservationReport(name, not failures and checked > 0, checked, excluded, failures)


def d0_config() -> Configuration:
    """Short roots of G2 with the single shift s = 1."""
    return Configuration("G2-short", 0, tuple((b, 1) for b in BETAS), {b: (1,) for b in BETAS})


def a2_config() -> Configuration:
    roots = [(1, -1, 0), (1, 0, -1), (0, 1, -1)]
    return standard_config("A2", [(r, 1) for r in roots], {r: (1,) for r in roots})


def a1_config() -> Configuration:
    return standard_config("A1", [((1, -1), 1)], {(1, -1): (1,)})


def d0_samples(count: int, seed: int) -> list[MultiPoly]:
    """z^2 and the product of the short roots first, then seeded ring elements."""
    first = [z_squared(GRAM), u_form(BETAS[0]).as_poly() * u_form(BETAS[1]).as_poly() * u_form(BETAS[2]).as_poly()]
    return first + sample_ring_elements(d0_config(), max(count - len(first), 0), seed)


def _symmetric(n: int) -> list[MultiPoly]:
    z = [MultiPoly.variable(i, n) for i in range(n)]
    e1 = sum(z[1:], z[0])
    e2 = MultiPoly.zero(n)
    for i in range(n):
        for j in range(i + 1, n):
            e2 = e2 + z[i] * z[j]
    e3 = z[0]
    for v in z[1:]:
        e3 = e3 * v
    disc = MultiPoly.constant(1, n)
    for i in range(n):
        for j in range(i + 1, n):
            disc = disc * (z[i] - z[j]) ** 2
    return [e1, e2, e3, disc]


def a2_samples(count: int, seed: int) -> list[MultiPoly]:
    """Power sums first, then seeded combinations of symmetric polynomials and Q times random polynomials."""
    n = 3
    rng = random.Random(seed)
    z = [MultiPoly.variable(i, n) for i in range(n)]
    e1, e2, e3, disc = _symmetric(n)
    q = q_polynomial_for(a2_config())
    out = [e1, z[0] ** 2 + z[1] ** 2 + z[2] ** 2, z[0] - z[1]]
    while len(out) < count:
        c = [Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 3)) for _ in range(4)]
        kind = rng.randrange(3)
        if kind == 0:
            p = e1 ** rng.randint(1, 3) * c[0] + e2 * c[1] + e3 * c[2] + disc * c[3]
        elif kind == 1:
            p = disc * e1 ** rng.randint(0, 2) * c[0] + e2 ** 2 * c[1]
        else:
            r = MultiPoly.constant(c[0], n)
            for _ in range(rng.randint(1, 2)):
                r = r + z[rng.randrange(n)] * c[rng.randrange(1, 4)]
            p = q * r
        out.append(p)
    return out[:count]


def verify_d0_preservation(samples: int = 5, seed: int = 0) -> PreservationReport:
    return _preserves(make_d0(), d0_config(), d0_samples(samples, seed), "D0")


def verify_a2_preservation(samples: int = 8, seed: int = 0, reading: str | None = None) -> PreservationReport:
    """Try the index-set readings in order and keep the first under which the ring is preserved."""
    config = a2_config()
    pool = a2_samples(samples, seed)
    last = None
    for name in [reading] if reading else list(S1_READINGS):
        rep = _preserves(make_tilde_d0(name), config, pool, "tildeD0")
        rep.reading = name
        if rep.passed:
            return rep
        last = rep
    return last


def verify_a1_preservation(samples: int = 6, seed: int = 0) -> list[PreservationReport]:
    """hatD0, D1, D2 and Dmsl on two-variable ring elements; Dqm on functions of z1 - z2."""
    config = a1_config()
    z1, z2 = MultiPoly.variable(0, 2), MultiPoly.variable(1, 2)
    q = q_polynomial_for(config)
    rng = random.Random(seed)
    pool = [z1 + z2, (z1 - z2) ** 2, q]
    while len(pool) < samples:
        pool.append(q * (z1 * rng.randint(-3, 3) + z2 * rng.randint(-3, 3) + 1) + ((z1 - z2) ** 2) ** rng.randint(1, 2))
    ops = [make_hat_d0(), make_a1_d1(), make_a1_d2(), make_dmsl()]
    reports = [_preserves(d, config, pool, d.name) for d in ops]
    line = restrict_line(make_dqm())
    reports.append(_preserves(line, line_config(), line_samples(samples, seed), "line(Dqm)"))
    return reports


def line_config() -> Configuration:
    """Functions f(w) of w = z1 - z2 with f(2) = f(-2) at w = 0."""
    return standard_config("A1-line", [((1,), 1)], {(1,): (2,)})


def line_samples(count: int, seed: int) -> list[MultiPoly]:
    rng = random.Random(seed)
    w = MultiPoly.variable(0, 1)
    q = w**2 - 4
    out = [w**2, q * w, q * w**3 + w**4]
    while len(out) < count:
        r = MultiPoly.constant(rng.randint(-3, 3), 1) + w * rng.randint(-3, 3) + w**2 * rng.randint(-2, 2)
        out.append(q * r + (w**2) ** rng.randint(1, 3) * rng.randint(1, 3))
    return out[:count]


def line_action_agrees(lhs: DifferenceOperator, rhs: DifferenceOperator, samples: Sequence[MultiPoly]) -> bool:
    """Apply both restricted operators to univariate ring elements and compare the results."""
    a, b = restrict_line(lhs), restrict_line(rhs)
    return all(apply_to_poly(a, f) == apply_to_poly(b, f) for f in samples)


@dataclass
class IdentityReport:
    identity_name: str
    holds_exactly: bool
    holds_on_line: bool
    witness: dict | None = None
    acts_equally: bool | None = None

    def to_json(self) -> dict:
        out = {
            "identityName": self.identity_name,
            "holdsExactly": self.holds_exactly,
            "holdsOnLine": self.holds_on_line,
            "witness": self.witness,
        }
        if self.acts_equally is not None:
            out["actsEquallyOnLineSamples"] = self.acts_equally
        return out


def _first_difference(d: DifferenceOperator) -> dict | None:
    for tau, a in d.t_form().items():
        if not a.is_zero():
            return {"shift": tau.to_json(), "coefficient": str(a)}
    return None


def _compare(name: str, lhs: DifferenceOperator, rhs: DifferenceOperator) -> IdentityReport:
    exact = lhs == rhs
    line_l, line_r = restrict_line(lhs), restrict_line(rhs)
    on_line = line_l == line_r
    witness = None
    if not on_line:
        witness = _first_difference(line_l - line_r)
    elif not exact:
        witness = _first_difference(lhs - rhs)
    return IdentityReport(name, exact, on_line, witness)


def verify_a1_identities(seed: int = 0) -> list[IdentityReport]:
    d1, d2, msl, qm = make_a1_d1(), make_a1_d2(), make_dmsl(), make_dqm()
    hat = make_hat_d0()
    zero = DifferenceOperator({}, A1_GRAM)
    reports = [
        _compare("[D1, D2] = 0", commutator(d1, d2), zero),
        _compare("[D1, Dmsl] = 0", commutator(d1, msl), zero),
        _compare("[D2, Dmsl] = 0", commutator(d2, msl), zero),
        _compare("hatD0^2 ~ (Dmsl + 2)^3", power(hat, 2), power(msl.plus_constant(2), 3)),
    ]
    prod = compose(d1, d2)
    qm_side = qm.scaled(3).plus_constant(16)
    msl_side = power(msl, 2).scaled(3).plus_constant(4)
    first = _compare("D1 D2 ~ 3 Dqm + 16", prod, qm_side)
    second = _compare("3 Dqm + 16 ~ 3 Dmsl^2 + 4", qm_side, msl_side)
    reports.append(
        IdentityReport(
            "D1 D2 ~ 3 Dqm + 16 ~ 3 Dmsl^2 + 4",
            first.holds_exactly and second.holds_exactly,
            first.holds_on_line and second.holds_on_line,
            first.witness or second.witness,
        )
    )
    # second route for the line identities: act on univariate ring elements
    pool = line_samples(6, seed)
    reports[3].acts_equally = line_action_agrees(power(hat, 2), power(msl.plus_constant(2), 3), pool)
    reports[4].acts_equally = line_action_agrees(prod, qm_side, pool) and line_action_agrees(qm_side, msl_side, pool)
    return reports


def verify_hat_split() -> bool:
    """hatD0 equals D1 + D2, and the swap exchanges D1 and D2 while fixing Dmsl and hatD0."""
    d1, d2, msl, hat = make_a1_d1(), make_a1_d2(), make_dmsl(), make_hat_d0()
    return (
        hat == d1 + d2
        and swap_variables(d1) == d2
        and swap_variables(msl) == msl
        and swap_variables(hat) == hat
        and not swap_variables(d1) == d1
    )


def d0_constant() -> FactoredRatFun:
    """The T_0 coefficient of D0 written as const + sum a_tau T_tau."""
    return make_d0().t_form().get(LatticeVector(0, 0), FactoredRatFun.constant(0, 2))


def quasiminuscule_match() -> IdentityReport:
    """D2 at m = 0 against the quasiminuscule operator of the doubled A2 roots, weight 4 beta_1."""
    qm = quasiminuscule_operator(4 * BETAS[0], doubled_a2_roots(), 1, GRAM, scale=16, name="qm(A2)")
    d2 = make_D2(0)
    exact = d2 == qm
    return IdentityReport("D2(m=0) = 16 qm(A2, 4 beta1)", exact, exact, None if exact else _first_difference(d2 - qm))


def a1_quasiminuscule_match() -> bool:
    """The displayed Dmsl and Dqm agree with the generic construction for the root e1 - e2."""
    roots = [_vec(1, -1), _vec(-1, 1)]
    msl = quasiminuscule_operator(_vec(2, 0), roots, 1, A1_GRAM)
    qm = quasiminuscule_operator(_vec(4, 0), roots, 1, A1_GRAM)
    # Dmsl is written without the -1's; compare its shift part only
    return qm == make_dqm() and msl.terms == make_dmsl().terms


def run_all(seed: int = 0) -> dict:
    d0 = verify_d0_preservation(5, seed)
    a2 = verify_a2_preservation(8, seed)
    a1 = verify_a1_preservation(6, seed)
    ids = verify_a1_identities(seed)
    qm = quasiminuscule_match()
    const = d0_constant()
    const_ok = const == FactoredRatFun.constant(-24, 2)
    passed = (
        d0.passed
        and a2.passed
        and all(r.passed for r in a1)
        and all(r.holds_on_line and r.acts_equally is not False for r in ids)
        and qm.holds_exactly
        and const_ok
        and verify_hat_split()
    )
    return {
        "passed": passed,
        "d0Preservation": d0.to_json(),
        "a2Preservation": a2.to_json(),
        "a1Preservation": [r.to_json() for r in a1],
        "identities": [r.to_json() for r in ids],
        "quasiminuscule": qm.to_json(),
        "d0ConstantIsMinus24": const_ok,
    }
