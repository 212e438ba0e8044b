from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ag2ba.exact import (
    AffineForm,
    FactoredRatFun,
    LaurentFrac,
    MultiPoly,
    NotAPole,
    NotSimplePole,
    exact_div_affine,
    NotDivisible,
    parse_rational,
    residue_at,
    restrict_to_hyperplane,
)

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def polys(draw, nvars=2, max_terms=4, max_deg=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, max_deg)) for _ in range(nvars))
        terms[e] = draw(small)
    return MultiPoly.from_terms(terms, nvars)


@st.composite
def laurents(draw):
    n = draw(st.integers(1, 3))
    terms = {}
    for _ in range(n):
        e = (draw(st.integers(-3, 3)), draw(st.integers(-3, 3)))
        terms[e] = draw(small.filter(lambda c: c != 0))
    return LaurentFrac.from_laurent_terms(terms)


@given(polys(), polys(), polys())
def test_poly_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == MultiPoly.zero(2)


@given(polys(), st.lists(small, min_size=2, max_size=2), st.lists(small, min_size=2, max_size=2))
def test_shift_composes_additively(p, d1, d2):
    both = [x + y for x, y in zip(d1, d2)]
    assert p.shift(d1).shift(d2) == p.shift(both)


@given(polys(), st.lists(small, min_size=2, max_size=2))
def test_shift_agrees_with_evaluation(p, d):
    pt = [Fraction(3, 2), Fraction(-2)]
    moved = [a + b for a, b in zip(pt, d)]
    assert p.shift(d).evaluate(pt) == p.evaluate(moved)


@given(laurents(), laurents(), laurents())
def test_laurent_field_axioms(a, b, c):
    assert a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert (a / b) * b == a
    assert a.invert_exponents().invert_exponents() == a


def test_polynomial_json_round_trip():
    p = MultiPoly.from_terms({(2, 1): Fraction(3, 7), (0, 0): -5, (1, 4): 1}, 2)
    assert MultiPoly.from_json(p.to_json()) == p
    assert p.to_json()["terms"][0][0] == [1, 4]


def test_affine_form_normalization():
    a = AffineForm([Fraction(2, 3), Fraction(4, 3)], 2)
    b = AffineForm([1, 2], 3)
    assert a.primitive() == b.primitive()
    assert a.scale == Fraction(2, 3)
    assert AffineForm([-1, -2], -3).primitive() == b
    with pytest.raises(ValueError):
        AffineForm([0, 0], 1)


def test_affine_form_json_rejects_unnormalized():
    with pytest.raises(ValueError):
        AffineForm.from_json({"linear": ["2", "4"], "constant": "6", "scale": "1"})


def test_exact_div_affine_and_obstruction():
    ell = AffineForm([1, -1], 0)
    p = MultiPoly.linear([1, -1]) * MultiPoly.linear([1, 1], 2)
    q = exact_div_affine(p, ell)
    assert q == MultiPoly.linear([1, 1], 2)
    with pytest.raises(NotDivisible) as info:
        exact_div_affine(MultiPoly.linear([1, 1], 2), ell)
    assert not info.value.witness.is_zero()


def test_restriction_vanishes_on_hyperplane_multiples():
    ell = AffineForm([2, 1], -3)
    p = ell.as_poly() * MultiPoly.from_terms({(2, 0): 1, (0, 1): 5}, 2)
    assert restrict_to_hyperplane(p, ell).is_zero()


def test_factored_ratfun_cancels_common_factor():
    ell = AffineForm([1, 0], -2)
    f = FactoredRatFun(ell.as_poly() * MultiPoly.variable(1, 2), {ell: 2})
    assert f.den == {ell.primitive(): 1}
    g = FactoredRatFun.one_minus(2, AffineForm([1, 0]))
    assert g == FactoredRatFun(MultiPoly.linear([1, 0], -2), {AffineForm([1, 0]): 1})
    assert (g - g).is_zero()


def test_residue_simple_pole():
    # 1/(u1 - 2) restricted to u1 = 2 has residue 1; parametrize by u2
    ell = AffineForm([1, 0], -2)
    f = FactoredRatFun(MultiPoly.variable(1, 2), {ell: 1})
    res = residue_at(f, ell)
    assert res.nvars == 1
    assert res.as_poly() == MultiPoly.variable(0, 1)


def test_residue_errors():
    ell = AffineForm([1, 0], -2)
    with pytest.raises(NotAPole):
        residue_at(FactoredRatFun.constant(1, 2), ell)
    with pytest.raises(NotSimplePole):
        residue_at(FactoredRatFun.inverse_affine(ell, 2), ell)


def test_value_at_infinity():
    f = FactoredRatFun.one_minus(3, AffineForm([1, 1])) * 5
    assert f.value_at_infinity() == 5


def test_parse_rational():
    assert parse_rational("−3/4") == Fraction(-3, 4)
    for bad in ("", "0.5", "1e3"):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_laurent_json_round_trip():
    x = LaurentFrac.from_laurent_terms({(-2, 1): 3, (0, 0): -1}) / LaurentFrac.from_laurent_terms({(1, 0): 1, (0, 0): 1})
    assert LaurentFrac.from_json(x.to_json()) == x
    assert not x.is_laurent_polynomial()
