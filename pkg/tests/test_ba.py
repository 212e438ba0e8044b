from fractions import Fraction

import pytest

from ag2ba.ba import (
    BAFunction,
    LeadingTermMismatch,
    RankDeficient,
    ba_linear_oracle,
    c_function,
    construct_ba,
    iterate,
    leading_product,
    mu_function,
    operator_for,
    q_polynomial,
    rational_limit_identities,
    total_degree,
    verify_axioms,
    verify_eigen_difference,
    verify_eigen_schrodinger,
    verify_subleading,
)
from ag2ba.exact import LaurentFrac, MultiPoly
from ag2ba.expoly import ExpPolynomial
from ag2ba.lattice import BETAS, u_form


@pytest.fixture(scope="module")
def psi0():
    return construct_ba(0, "D1")


def test_total_degree():
    assert [total_degree(m) for m in range(4)] == [3, 15, 27, 39]


def test_m0_construction_shape(psi0):
    assert psi0.degree == 3
    assert psi0.degree_trace == [6, 5, 4, 3]
    assert psi0.verification["degreeLaw"] and psi0.verification["leadingTerm"]
    lead = MultiPoly.constant(1, 2)
    for b in BETAS:
        lead = lead * u_form(2 * b).as_poly()
    assert psi0.P.z_homogeneous(3) == ExpPolynomial.from_poly(lead)
    assert leading_product(0) == lead


def test_m0_c_function_is_not_laurent(psi0):
    # dividing by c(x) leaves genuine E-denominators at m = 0
    assert not psi0.laurent_coefficients()
    assert not psi0.verification["laurentCoefficients"]


def test_m0_constructions_agree_with_each_other_and_the_oracle(psi0):
    other = construct_ba(0, "D2")
    assert other.P == psi0.P
    assert ba_linear_oracle(0).P == psi0.P


def test_m0_numeric_oracle_matches_specialization(psi0):
    vals = (Fraction(2), Fraction(3, 2))
    assert ba_linear_oracle(0, vals).P.specialize((1, 1)) == psi0.P.specialize(vals)
    with pytest.raises(ValueError):
        ba_linear_oracle(0, (0, 1))


def test_m0_verifiers(psi0):
    assert verify_axioms(psi0).passed
    for via in ("D1", "D2"):
        assert verify_eigen_difference(psi0, operator_for(0, via))
    assert verify_eigen_schrodinger(psi0, 0)
    assert verify_subleading(psi0)
    assert not verify_subleading(psi0, -1)


def test_iteration_one_step_further_vanishes(psi0):
    d = operator_for(0, "D1")
    out, trace = iterate(d, ExpPolynomial.from_poly(q_polynomial(0)), total_degree(0) + 1)
    assert out.is_zero()
    assert trace[-1] == float("-inf")


def test_step_hook_sees_the_undivided_iterate():
    seen = {}
    construct_ba(0, "D1", on_step=lambda k, f: seen.__setitem__(k, f))
    assert sorted(seen) == [1, 2, 3]
    d = operator_for(0, "D1")
    direct, _ = iterate(d, ExpPolynomial.from_poly(q_polynomial(0)), 3)
    assert seen[3] == direct
    assert not seen[3].is_zero()
    assert iterate(d, seen[3], 1)[0].is_zero()


def test_perturbed_psi_fails_axioms(psi0):
    bumped = psi0.P + ExpPolynomial.from_poly(MultiPoly.from_terms({(1, 0): 1}, 2), LaurentFrac.monomial((1, 0)))
    rep = verify_axioms(BAFunction(0, bumped, "test"))
    assert not rep.passed
    assert rep.failures


def test_fake_psi_is_not_an_eigenfunction(psi0):
    fake = psi0.P + ExpPolynomial.from_poly(MultiPoly.constant(1, 2))
    assert not verify_eigen_difference(fake, operator_for(0, "D1"))


def test_plain_exponential_fails_schrodinger():
    assert not verify_eigen_schrodinger(ExpPolynomial.from_poly(MultiPoly.constant(1, 2)), 0)


def test_mu_is_symmetric_laurent_polynomial():
    mu = mu_function(operator_for(1, "D1"))
    assert mu.is_laurent_polynomial()
    assert mu.invert_exponents() == mu
    assert mu.evaluate((1, 1)) == 0


def test_c_function_leading_constant():
    c = c_function(0)
    assert c.is_laurent_polynomial()
    assert not c.is_zero()


def test_serialization_round_trip(psi0):
    again = BAFunction.from_json(psi0.to_json())
    assert again.P == psi0.P
    assert again.degree_trace == psi0.degree_trace


def test_oracle_rank_deficiency_is_reported():
    # E = 1 makes the exponential factor trivial and the system singular
    with pytest.raises(RankDeficient):
        ba_linear_oracle(0, (1, 1))


@pytest.mark.parametrize("m", [0, 1, 2])
def test_rational_limit_identities(m):
    rep = rational_limit_identities(m)
    assert rep.passed
    assert rep.scale == 72


def test_unknown_operator_name():
    with pytest.raises(ValueError):
        operator_for(0, "D3")
    assert issubclass(LeadingTermMismatch, ArithmeticError)


def test_q_exponential_is_not_an_eigenfunction_at_m1():
    assert not verify_eigen_difference(ExpPolynomial.from_poly(q_polynomial(1)), operator_for(1, "D1"))
