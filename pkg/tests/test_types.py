"""Core value types: validation, presets, serialization."""
import json
import math

import pytest
from hypothesis import given, strategies as st

from equitysplit import (
    Arm,
    BargainingPowers,
    BeliefModel,
    Contract,
    EquilibriumOutcome,
    Institution,
    InvalidParameter,
    MarketParams,
    ProRating,
    RiskProfile,
    Scenario,
    make_preset_scenario,
)


def test_preset_poor_si_common():
    sc = make_preset_scenario(Arm.POOR, Institution.SI, Contract.COMMON)
    assert sc.params.e == 200.0
    assert sc.params.mu_alpha == pytest.approx(3.0, abs=1e-15)
    assert sc.params.d_e == 0.0
    assert sc.powers.theta == (0.5,)
    assert sc.belief is BeliefModel.STANDARD
    assert sc.risk.is_neutral


def test_preset_rich_ti_preferred_endowments():
    sc = make_preset_scenario(Arm.RICH, Institution.TI, Contract.PREFERRED)
    assert sc.params.d_e == 160.0
    assert sc.endowments == (100.0, 100.0)


def test_preset_poor_til_endowments():
    sc = make_preset_scenario(Arm.POOR, Institution.TIL, Contract.COMMON)
    assert sc.endowments == (200.0, 200.0)
    assert sum(sc.endowments) == 400.0


def test_preset_accepts_plain_strings():
    sc = make_preset_scenario("poor", "ti", "common")
    assert sc.institution is Institution.TI


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(e=0.0, alpha_h=11, alpha_l=1, p=0.2, d_e=0),
        dict(e=-5, alpha_h=11, alpha_l=1, p=0.2, d_e=0),
        dict(e=200, alpha_h=1.0, alpha_l=1, p=0.2, d_e=0),
        dict(e=200, alpha_h=11, alpha_l=1.5, p=0.2, d_e=0),
        dict(e=200, alpha_h=11, alpha_l=0.0, p=0.2, d_e=0),
        dict(e=200, alpha_h=11, alpha_l=1, p=0.0, d_e=0),
        dict(e=200, alpha_h=11, alpha_l=1, p=1.0, d_e=0),
        dict(e=200, alpha_h=11, alpha_l=1, p=0.2, d_e=-1),
        dict(e=200, alpha_h=11, alpha_l=1, p=0.2, d_e=600.0),  # = mu_alpha * e
        dict(e=200, alpha_h=11, alpha_l=1, p=0.2, d_e=700.0),
    ],
)
def test_market_params_rejections(kwargs):
    with pytest.raises(InvalidParameter):
        MarketParams(**kwargs)


def test_powers_rejections():
    with pytest.raises(InvalidParameter):
        BargainingPowers(theta=(1.2,))
    with pytest.raises(InvalidParameter):
        BargainingPowers(theta=(-0.1, 0.5))
    with pytest.raises(InvalidParameter):
        BargainingPowers(theta=(0.5, 0.5, 0.5))


def test_risk_profile_bounds():
    with pytest.raises(InvalidParameter):
        RiskProfile(rho_e=1.0, rho_i=(0.0,))
    with pytest.raises(InvalidParameter):
        RiskProfile(rho_e=0.0, rho_i=(-0.2,))
    assert RiskProfile.neutral(2).is_neutral


def test_scenario_power_count_must_match_institution():
    params = MarketParams(e=200, alpha_h=11, alpha_l=1, p=0.2, d_e=0)
    with pytest.raises(InvalidParameter):
        Scenario(
            params=params,
            institution=Institution.TI,
            contract=Contract.COMMON,
            powers=BargainingPowers(theta=(0.5,)),
        )


def test_preferred_requires_unit_low_multiplier():
    params = MarketParams(e=200, alpha_h=12, alpha_l=0.5, p=0.2, d_e=0)
    with pytest.raises(InvalidParameter):
        Scenario(
            params=params,
            institution=Institution.SI,
            contract=Contract.PREFERRED,
            powers=BargainingPowers(theta=(0.5,)),
        )


@given(
    e=st.floats(1.0, 1e4),
    alpha_h=st.floats(1.0 + 1e-9, 100.0),
    alpha_l=st.floats(1e-6, 1.0),
    p=st.floats(1e-6, 1.0 - 1e-6),
)
def test_mu_alpha_accessor_matches_definition(e, alpha_h, alpha_l, p):
    params = MarketParams(e=e, alpha_h=alpha_h, alpha_l=alpha_l, p=p, d_e=0.0)
    expected = p * alpha_h + (1.0 - p) * alpha_l
    assert params.mu_alpha == pytest.approx(expected, rel=1e-15, abs=0.0)


def test_institution_endowment_structure():
    assert Institution.SI.endowments(200.0) == (200.0,)
    assert Institution.TI.endowments(200.0) == (100.0, 100.0)
    assert Institution.TIL.endowments(200.0) == (200.0, 200.0)
    for inst in Institution:
        assert sum(inst.endowments(200.0)) >= 200.0


@given(
    e=st.floats(10.0, 1000.0),
    p=st.floats(0.05, 0.95),
    mu=st.floats(2.0, 8.0),
    d_frac=st.floats(0.0, 0.9),
    theta=st.floats(0.0, 1.0),
    rho=st.floats(0.0, 0.9),
)
def test_scenario_json_round_trip_is_lossless(e, p, mu, d_frac, theta, rho):
    alpha_h = (mu - (1.0 - p)) / p
    params = MarketParams(e=e, alpha_h=alpha_h, alpha_l=1.0, p=p, d_e=d_frac * mu * e * 0.99)
    sc = Scenario(
        params=params,
        institution=Institution.TI,
        contract=Contract.COMMON,
        powers=BargainingPowers(theta=(theta, theta / 2.0)),
        belief=BeliefModel.JOINT,
        risk=RiskProfile(rho_e=rho, rho_i=(rho, rho / 3.0)),
        prorating=ProRating.NONE,
    )
    again = Scenario.from_json(sc.to_json())
    assert again == sc  # bit-for-bit: json floats round-trip via repr


def test_outcome_json_round_trip_and_residual_share():
    out = EquilibriumOutcome(
        investments=(100.0, 100.0),
        shares=(0.2666666666666666, 0.26666666666666666),
        expected_profit_e=280.0,
        expected_profit_i=(160.0, 160.0),
        regime="TI-BothInvest",
    )
    again = EquilibriumOutcome.from_json(out.to_json())
    assert again == out
    assert out.entrepreneur_share + sum(out.shares) == 1.0
    payload = json.loads(out.to_json())
    assert math.isclose(payload["entrepreneur_share"], out.entrepreneur_share, rel_tol=0, abs_tol=0)


def test_outcome_rejects_bad_shares():
    with pytest.raises(InvalidParameter):
        EquilibriumOutcome(
            investments=(100.0, 100.0),
            shares=(0.6, 0.6),
            expected_profit_e=0.0,
            expected_profit_i=(0.0, 0.0),
            regime="x",
        )
    with pytest.raises(InvalidParameter):
        EquilibriumOutcome(
            investments=(100.0,),
            shares=(1.2,),
            expected_profit_e=0.0,
            expected_profit_i=(0.0,),
            regime="x",
        )
