import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ag2ba.ba import _eliminate
from ag2ba.exact import LaurentFrac, MultiPoly
from ag2ba.expoly import ExpPolynomial
from ag2ba.lattice import (
    ALPHAS,
    BETAS,
    G2_POSITIVE,
    GRAM,
    Configuration,
    build_config,
    e_exponent,
    gram_inner,
    norm2,
    shift_set,
    u_form,
)
from ag2ba.quasi import (
    DivisionObstruction,
    delta_axiom_check,
    delta_axiom_stages,
    is_quasi_invariant,
    q_polynomial_for,
    sample_ring_elements,
)

MULTIPLICITY_PAIRS = [(1, 0), (2, 0), (1, 1), (3, 1)]


def single_vector_config(alpha, m_alpha, m_double):
    vecs = ((alpha, m_alpha),) + (((2 * alpha, m_double),) if m_double else ())
    return Configuration("single", 0, vecs, {alpha: shift_set(m_alpha, m_double)}, GRAM)


def rank_one_polynomial(alpha, m_alpha, m_double):
    """p(k) = k^M + lower terms with coefficients in Q(E) satisfying the shift conditions in k = <alpha, z>."""
    size = m_alpha + m_double
    a2 = norm2(alpha)
    x = LaurentFrac.monomial(e_exponent(alpha))
    rows = []
    for s in shift_set(m_alpha, m_double):
        plus, minus = x**s, x ** (-s)

        def cond(j, s=s, plus=plus, minus=minus):
            return plus * (s * a2) ** j - minus * (-s * a2) ** j

        rows.append([cond(j) for j in range(size)] + [-cond(size)])
    zero = LaurentFrac.constant(0)
    coeffs = _eliminate(rows, zero, lambda v: v.is_zero(), lambda p, q: p / q, lambda p, q: p * q, lambda p, q: p - q, size)
    return coeffs + [LaurentFrac.constant(1)]


def orthogonal_to(alpha):
    return next(g for g in G2_POSITIVE if gram_inner(g, alpha) == 0)


def random_e_monomial(rng):
    return LaurentFrac.monomial((rng.randint(-3, 3), rng.randint(-3, 3)), Fraction(rng.randint(1, 5), rng.randint(1, 3)))


def random_z_poly(rng, degree):
    terms = {}
    for _ in range(rng.randint(1, 3)):
        a = rng.randint(0, degree)
        terms[(a, rng.randint(0, degree - a))] = Fraction(rng.randint(-4, 4) or 1, rng.randint(1, 3))
    return MultiPoly.from_terms(terms, 2)


def random_psi(rng, alpha, m_alpha, m_double, rank_one):
    """Mostly members of the ring for alpha; about a third carry a random perturbation."""
    k = u_form(alpha).as_poly()
    v = u_form(orthogonal_to(alpha)).as_poly()
    cfg = single_vector_config(alpha, m_alpha, m_double)
    psi = ExpPolynomial.zero()
    if rng.random() < 0.7:
        side = MultiPoly.constant(rng.randint(1, 3), 2) + v * rng.randint(-2, 2) + v**2 * rng.randint(0, 1)
        for j, c in enumerate(rank_one):
            psi = psi + ExpPolynomial.from_poly(k**j * side, c * random_e_monomial(rng))
    if rng.random() < 0.6 or psi.is_zero():
        psi = psi + ExpPolynomial.from_poly(q_polynomial_for(cfg) * random_z_poly(rng, 2), random_e_monomial(rng))
    if rng.random() < 0.35:
        psi = psi + ExpPolynomial.from_poly(random_z_poly(rng, m_alpha + m_double + 1), random_e_monomial(rng))
    return psi


@pytest.mark.parametrize("m_alpha,m_double", MULTIPLICITY_PAIRS)
def test_direct_and_delta_axiomatics_agree(m_alpha, m_double):
    rng = random.Random(1000 * m_alpha + m_double)
    outcomes = []
    for i in range(200):
        alpha = (BETAS + ALPHAS)[i % 6]
        rank_one = rank_one_polynomial(alpha, m_alpha, m_double)
        psi = random_psi(rng, alpha, m_alpha, m_double, rank_one)
        cfg = single_vector_config(alpha, m_alpha, m_double)
        direct = is_quasi_invariant(psi, cfg).passed
        chain = delta_axiom_check(psi, alpha, m_alpha, m_double)
        assert direct == chain, f"sample {i}: direct={direct} delta={chain}"
        outcomes.append(direct)
        if chain:
            top = psi.z_homogeneous(psi.z_degree)
            lin = u_form(alpha).as_poly().embed(4) ** (m_alpha + m_double)
            assert lin.divides(top.num)
    # both outcomes must be exercised for the agreement to mean anything
    assert 20 < sum(outcomes) < 180


def test_rank_one_polynomial_passes_both_checks():
    alpha = BETAS[0]
    coeffs = rank_one_polynomial(alpha, 3, 1)
    k = u_form(alpha).as_poly()
    psi = ExpPolynomial.zero()
    for j, c in enumerate(coeffs):
        psi = psi + ExpPolynomial.from_poly(k**j, c)
    assert is_quasi_invariant(psi, single_vector_config(alpha, 3, 1)).passed
    assert delta_axiom_check(psi, alpha, 3, 1)


def test_delta_check_on_plain_exponential_is_false():
    assert not delta_axiom_check(ExpPolynomial.from_poly(MultiPoly.constant(1, 2)), BETAS[0], 1, 0)


def test_delta_check_linear_form_without_exponential():
    # delta_beta1 <beta1, z> = 2 beta1^2 = 4, which does not vanish on the hyperplane
    ok, stage, witness = delta_axiom_stages(u_form(BETAS[0]).as_poly(), BETAS[0], 1, 0)
    assert not ok and stage == 1
    assert witness == MultiPoly.constant(4, 1)


def test_delta_check_stages():
    u = u_form(BETAS[0]).as_poly()
    assert delta_axiom_check(u**2, BETAS[0], 2, 0)
    # (u^2 - 4) u vanishes at u = +-2 but not at u = +-4: the chain stops at its last stage
    f = (u**2 - 4) * u
    ok, stage, _ = delta_axiom_stages(f, BETAS[0], 2, 0)
    assert not ok and stage == 2
    assert not delta_axiom_check(f, BETAS[0], 2, 0, raise_on_obstruction=True)
    with pytest.raises(DivisionObstruction) as info:
        delta_axiom_check(u**3, BETAS[0], 2, 0, raise_on_obstruction=True)
    assert info.value.stage == 1
    with pytest.raises(ValueError):
        delta_axiom_check(f, BETAS[0], 0, 1)


def test_q_polynomial_is_quasi_invariant_and_literal_form_is_not():
    for m in (0, 1):
        cfg = build_config("AG2", m)
        q = q_polynomial_for(cfg)
        assert is_quasi_invariant(q, cfg).passed
        assert is_quasi_invariant(ExpPolynomial.from_poly(q), cfg).passed
    # with s^2 g^2 in place of s^2 (g^2)^2, Q e^<z,x> no longer vanishes at z +- s g
    cfg = build_config("AG2", 0)
    literal = MultiPoly.constant(1, 2)
    for b in BETAS:
        literal = literal * (u_form(b).as_poly() ** 2 - 8)
    assert is_quasi_invariant(literal, cfg).passed
    assert not is_quasi_invariant(ExpPolynomial.from_poly(literal), cfg).passed


def test_linear_form_fails_with_witness_eight():
    rep = is_quasi_invariant(u_form(BETAS[0]).as_poly(), build_config("AG2", 0))
    assert not rep.passed
    gamma, s, w = rep.failures[0]
    assert (gamma, s) == (BETAS[0], 2)
    assert w == MultiPoly.constant(8, 1)


@pytest.mark.parametrize("m", [0, 1])
def test_samples_are_deterministic_members(m):
    cfg = build_config("AG2", m)
    a = sample_ring_elements(cfg, 8, seed=3)
    b = sample_ring_elements(cfg, 8, seed=3)
    assert a == b
    assert len(a) == 8


@given(st.integers(0, 10_000))
def test_ring_is_closed_under_sums_and_products(seed):
    cfg = build_config("AG2", 1)
    p, q = sample_ring_elements(cfg, 4, seed)[2:4]
    assert is_quasi_invariant(p + q, cfg).passed
    assert is_quasi_invariant(p * q, cfg).passed
