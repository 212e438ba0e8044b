import pytest

from ag2ba.exact import FactoredRatFun
from ag2ba.operators import apply_to_poly, restrict_line
from ag2ba.reductions import (
    S1_READINGS,
    a1_quasiminuscule_match,
    d0_constant,
    line_action_agrees,
    line_samples,
    make_a1_d1,
    make_dmsl,
    make_dqm,
    make_m0_family,
    quasiminuscule_match,
    run_all,
    verify_a1_identities,
    verify_a1_preservation,
    verify_a2_preservation,
    verify_d0_preservation,
    verify_hat_split,
)


def test_d0_preserves_ring():
    rep = verify_d0_preservation(6, seed=4)
    assert rep.passed and rep.checked + len(rep.excluded) == 6 and rep.checked >= 5


def test_d0_constant_term():
    assert d0_constant() == FactoredRatFun.constant(-24, 2)


def test_a2_reading_selection():
    rep = verify_a2_preservation(8, seed=0)
    assert rep.passed
    assert rep.reading == "i<j, k distinct from i and j"
    others = [r for r in S1_READINGS if r != rep.reading]
    for reading in others:
        assert not verify_a2_preservation(8, seed=0, reading=reading).passed


def test_a1_operators_preserve_their_rings():
    reports = verify_a1_preservation(6, seed=1)
    assert [r.operator for r in reports][-1] == "line(Dqm)"
    for rep in reports:
        assert rep.passed, rep.to_json()


def test_dqm_only_preserves_functions_of_the_difference():
    from ag2ba.exact import MultiPoly
    from ag2ba.reductions import _preserves, a1_config

    # z1 + z2 lies in the two-variable ring, yet Dqm of it has a pole along z1 - z2 = 2
    rep = _preserves(make_dqm(), a1_config(), [MultiPoly.linear([1, 1])], "Dqm")
    assert not rep.passed
    assert rep.failures[0]["reason"] == "pole"


def test_a1_identities():
    reports = {r.identity_name: r for r in verify_a1_identities(seed=0)}
    assert len(reports) == 5
    for name in ("[D1, D2] = 0", "[D1, Dmsl] = 0", "[D2, Dmsl] = 0"):
        assert reports[name].holds_exactly
    for name in ("hatD0^2 ~ (Dmsl + 2)^3", "D1 D2 ~ 3 Dqm + 16 ~ 3 Dmsl^2 + 4"):
        rep = reports[name]
        assert rep.holds_on_line
        assert rep.acts_equally
        # the relation only holds on functions of z1 - z2
        assert not rep.holds_exactly
        assert rep.witness is not None


def test_line_action_second_route_detects_a_difference():
    pool = line_samples(4, seed=0)
    assert not line_action_agrees(make_dmsl(), make_dmsl().plus_constant(1), pool)
    line = restrict_line(make_a1_d1())
    assert apply_to_poly(line, pool[0]).nvars == 1


def test_hat_split_and_swap():
    assert verify_hat_split()


def test_quasiminuscule_matches():
    rep = quasiminuscule_match()
    assert rep.holds_exactly
    assert a1_quasiminuscule_match()


def test_m0_family_members():
    fam = make_m0_family()
    assert set(fam) >= {"D0", "tildeD0", "hatD0", "Dmsl", "Dqm"}


def test_run_all_passes():
    res = run_all(seed=0)
    assert res["passed"]
    assert len(res["identities"]) == 5
