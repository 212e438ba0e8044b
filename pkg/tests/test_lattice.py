from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ag2ba.lattice import (
    ALPHAS,
    BETAS,
    GRAM,
    LatticeVector,
    build_config,
    coroot_pairing,
    e_exponent,
    gram_inner,
    gram_inverse,
    norm2,
    reflect,
    shift_set,
    weyl_elements,
    weyl_orbit,
    z_squared,
)

vectors = st.builds(LatticeVector, st.integers(-6, 6), st.integers(-6, 6))


def test_root_lengths_and_angle():
    assert {norm2(b) for b in BETAS} == {2}
    assert {norm2(a) for a in ALPHAS} == {6}
    # cos^2 of the angle between beta1 and alpha2 is 3/4, obtuse
    b1, a2 = BETAS[0], ALPHAS[1]
    assert gram_inner(b1, a2) == -3
    assert gram_inner(b1, a2) ** 2 == Fraction(3, 4) * norm2(b1) * norm2(a2)


def test_named_vectors_are_sums_of_basis():
    b1, b2, b3 = BETAS
    a1, a2, a3 = ALPHAS
    assert b3 == b1 + a2 and b2 == 2 * b1 + a2
    assert a3 == 3 * b1 + a2 and a1 == 3 * b1 + 2 * a2


def test_weyl_group_has_twelve_elements():
    ws = weyl_elements()
    assert len(ws) == 12
    assert sorted(w.det for w in ws).count(-1) == 6
    assert max(w.length for w in ws) == 6


@given(vectors, vectors)
def test_weyl_preserves_gram(v, w):
    for g in weyl_elements():
        assert gram_inner(g.apply(v), g.apply(w)) == gram_inner(v, w)


@given(vectors)
def test_reflection_is_an_involution(v):
    for gamma in BETAS + ALPHAS:
        assert reflect(gamma, reflect(gamma, v)) == v
    assert reflect(BETAS[0], BETAS[0]) == -BETAS[0]


def test_orbits():
    short = set(weyl_orbit(BETAS[0]))
    long = set(weyl_orbit(ALPHAS[0]))
    assert short == set(BETAS) | {-b for b in BETAS}
    assert long == set(ALPHAS) | {-a for a in ALPHAS}


def test_coroot_pairings_are_half_integers():
    for tau in BETAS + ALPHAS:
        for gamma in BETAS + ALPHAS:
            assert (2 * coroot_pairing(tau, gamma)).denominator == 1


def test_e_exponent_is_gram_times_coordinates():
    assert e_exponent(BETAS[0]) == (2, -3)
    assert e_exponent(ALPHAS[1]) == (-3, 6)
    with pytest.raises(ValueError):
        e_exponent(LatticeVector(Fraction(1, 2), 0))


def test_gram_inverse_and_z_squared():
    inv = gram_inverse(GRAM)
    for i in range(2):
        for j in range(2):
            assert sum(GRAM[i][k] * inv[k][j] for k in range(2)) == int(i == j)
    # z = beta1-dual direction: u = Gram c for c = (1, 0) gives z^2 = beta1^2 = 2
    assert z_squared().evaluate([2, -3]) == 2


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_ag2_configuration(m):
    cfg = build_config("AG2", m)
    assert len(cfg.vectors) == 9
    assert sum(k for _, k in cfg.vectors) == 12 * m + 3
    assert cfg.multiplicity(BETAS[0]) == 3 * m
    assert cfg.multiplicity(2 * BETAS[0]) == 1
    assert cfg.multiplicity(ALPHAS[0]) == m
    assert set(cfg.reduced_positive()) == set(BETAS + ALPHAS)
    assert cfg.axiom_set(BETAS[1]) == tuple(range(1, 3 * m + 1)) + (3 * m + 2,)


def test_shift_set():
    assert shift_set(2, 0) == (1, 2)
    assert shift_set(3, 2) == (1, 2, 3, 5, 7)
    assert shift_set(0, 1) == (2,)
    with pytest.raises(ValueError):
        build_config("AG2", -1)
