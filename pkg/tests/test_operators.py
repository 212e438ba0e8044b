import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ag2ba.exact import AffineForm, FactoredRatFun, MultiPoly
from ag2ba.lattice import A1, B1, BETAS, GRAM, LatticeVector, build_config, identity_gram, u_form
from ag2ba.operators import (
    DifferenceOperator,
    NotLineReducible,
    ResidueObstruction,
    apply_to_poly,
    check_structural_conditions,
    commutator,
    compose,
    kappa_balance,
    leading_expansion,
    make_D1,
    make_D2,
    power,
    residue_pair_sum,
    restrict_line,
)
from ag2ba.quasi import is_quasi_invariant, sample_ring_elements
from ag2ba.residue_data import FORMULAS, m_values

LINE = identity_gram(1)
TWO = identity_gram(2)


@st.composite
def line_operators(draw):
    """Small one-variable operators with polynomial coefficients."""
    terms = {}
    for _ in range(draw(st.integers(1, 2))):
        tau = LatticeVector(draw(st.integers(-2, 2)))
        coeffs = [Fraction(draw(st.integers(-3, 3))), Fraction(draw(st.integers(-3, 3)))]
        terms[tau] = FactoredRatFun(MultiPoly.from_terms({(0,): coeffs[0], (1,): coeffs[1]}, 1))
    const = draw(st.integers(-2, 2))
    return DifferenceOperator(terms, LINE, const)


@given(line_operators(), line_operators(), line_operators())
def test_compose_is_associative(a, b, c):
    assert compose(compose(a, b), c) == compose(a, compose(b, c))


@given(line_operators(), line_operators())
def test_commutator_is_antisymmetric(a, b):
    assert commutator(a, b) == -commutator(b, a)
    assert commutator(a, a).is_zero()


@given(line_operators(), line_operators(), st.integers(0, 3))
def test_compose_matches_successive_application(a, b, k):
    p = MultiPoly.variable(0, 1) ** k + 1
    assert apply_to_poly(compose(a, b), p) == apply_to_poly(a, apply_to_poly(b, p))


def test_power_and_t_form_round_trip():
    d = make_D1(0)
    assert power(d, 1) == d
    assert DifferenceOperator.from_t_form(d.t_form()) == d


@pytest.mark.parametrize("make", [make_D1, make_D2])
@pytest.mark.parametrize("m", [0, 1, 2])
def test_structural_conditions(make, m):
    rep = check_structural_conditions(make(m), build_config("AG2", m))
    assert rep.passed, rep.violations[:3]


def test_shift_counts():
    assert len(make_D1(1).shifts) == 12
    assert len(make_D2(1).shifts) == 18
    assert len(make_D2(0).shifts) == 6


def test_corrupted_operator_violates_pole_catalogue():
    d = make_D1(1)
    tau = 2 * B1
    bad = dict(d.terms)
    bad[tau] = bad[tau] * FactoredRatFun.one_minus(1, u_form(B1, 14))
    rep = check_structural_conditions(DifferenceOperator(bad, GRAM), build_config("AG2", 1))
    assert rep.degree_ok and not rep.poles_ok
    assert any(v["condition"] == "poles" for v in rep.violations)


def test_broken_symmetry_is_reported():
    d = make_D1(1)
    bad = dict(d.terms)
    bad[2 * B1] = bad[2 * B1] * 2
    rep = check_structural_conditions(DifferenceOperator(bad, GRAM), build_config("AG2", 1))
    assert not rep.symmetry_ok


@pytest.mark.parametrize("formula", FORMULAS, ids=lambda f: f.key)
def test_residue_formulas(formula):
    op = make_D1 if formula.operator == "D1" else make_D2
    for m in range(1, 5):
        pair = residue_pair_sum(op(m), formula.tau, formula.lam, formula.alpha, formula.c)
        assert pair.tau_residue == formula.evaluate(m)
        assert pair.total.is_zero()
    assert len(m_values(formula)) >= formula.m_degree + 1


def test_residue_pair_requires_reflected_partner():
    with pytest.raises(ValueError):
        residue_pair_sum(make_D1(1), 2 * B1, 2 * B1, B1, 1)


@pytest.mark.parametrize("m", [1, 2])
def test_leading_expansion(m):
    d = make_D1(m)
    exp = leading_expansion(d, build_config("G2", m))
    assert exp.remainder_degree_ok
    assert exp.matches_prediction
    for tau, k in exp.kappa.items():
        assert k == (3 if tau in {2 * s * b for b in BETAS for s in (1, -1)} else 1)
    assert kappa_balance(d).is_zero()


@pytest.mark.parametrize("make", [make_D1, make_D2])
@pytest.mark.parametrize("m", [0, 1])
def test_preserves_ring_on_samples(make, m):
    cfg = build_config("AG2", m)
    d = make(m)
    for p in sample_ring_elements(cfg, 4, seed=11):
        assert is_quasi_invariant(apply_to_poly(d, p), cfg).passed


def test_non_member_hits_residue_obstruction():
    with pytest.raises(ResidueObstruction) as info:
        apply_to_poly(make_D1(0), u_form(B1).as_poly())
    assert not info.value.witness.is_zero()


def test_json_round_trip():
    d = make_D2(1)
    assert DifferenceOperator.from_json(d.to_json()) == d


def test_line_restriction():
    w = FactoredRatFun(MultiPoly.linear([1, -1], 0) + 3, {AffineForm([1, -1], 1): 1})
    d = DifferenceOperator({LatticeVector(1, -1): w}, TWO)
    line = restrict_line(d)
    assert line.shifts == [LatticeVector(2)]
    bad = DifferenceOperator({LatticeVector(1, 0): FactoredRatFun(MultiPoly.linear([1, 1]))}, TWO)
    with pytest.raises(NotLineReducible):
        restrict_line(bad)
    with pytest.raises(ValueError):
        restrict_line(make_D1(0))


def test_commutator_kills_samples_m0():
    d1, d2 = make_D1(0), make_D2(0)
    for p in sample_ring_elements(build_config("AG2", 0), 3, seed=2):
        assert apply_to_poly(d1, apply_to_poly(d2, p)) == apply_to_poly(d2, apply_to_poly(d1, p))


def test_first_step_on_q_exponential():
    from ag2ba.ba import q_polynomial
    from ag2ba.expoly import ExpPolynomial
    from ag2ba.operators import apply_to_exp

    assert apply_to_exp(make_D1(0), ExpPolynomial.from_poly(q_polynomial(0))).z_degree == 6
    literal = MultiPoly.constant(1, 2)
    for b in BETAS:
        literal = literal * (u_form(b).as_poly() ** 2 - 8)
    with pytest.raises(ResidueObstruction):
        apply_to_exp(make_D1(0), ExpPolynomial.from_poly(literal))


def test_single_term_on_plain_exponential():
    from ag2ba.exact import LaurentFrac
    from ag2ba.expoly import ExpPolynomial
    from ag2ba.lattice import e_exponent
    from ag2ba.operators import apply_to_exp

    tau = 2 * B1
    d = DifferenceOperator({tau: FactoredRatFun.constant(1, 2)}, GRAM)
    one = ExpPolynomial.from_poly(MultiPoly.constant(1, 2))
    expected = one.scale(LaurentFrac.monomial(e_exponent(tau)) - 1)
    assert apply_to_exp(d, one) == expected
