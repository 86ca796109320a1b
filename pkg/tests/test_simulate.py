"""Negotiation protocol simulator: determinism, isolation, process facts."""
import numpy as np
import pytest

from equitysplit import (
    Arm,
    Contract,
    DegenerateData,
    Institution,
    InvalidParameter,
    UnsupportedModel,
    make_preset_scenario,
)
from equitysplit.simulate import (
    AgentStrategy,
    Concession,
    ProtocolConfig,
    Role,
    anchoring_stats,
    calibrated_openings,
    make_calibrated_population,
    run_batch,
    run_negotiation,
    transcripts_to_jsonl,
)


def _config(arm=Arm.POOR, institution=Institution.SI, contract=Contract.COMMON, ticks=None):
    sc = make_preset_scenario(arm, institution, contract)
    return ProtocolConfig(scenario=sc, tick_count=ticks)


def _ent(opening, reservation, concession=Concession.LINEAR):
    return AgentStrategy(Role.ENTREPRENEUR, opening, reservation, concession)


def _inv(opening, reservation, concession=Concession.LINEAR):
    return AgentStrategy(Role.INVESTOR, opening, reservation, concession)


def test_strategy_role_ordering_validation():
    with pytest.raises(InvalidParameter):
        AgentStrategy(Role.INVESTOR, 0.4, 0.6)  # investor must open high
    with pytest.raises(InvalidParameter):
        AgentStrategy(Role.ENTREPRENEUR, 0.6, 0.4)  # entrepreneur opens low
    _ent(0.3, 0.5)
    _inv(0.7, 0.5)


def test_protocol_defaults_and_til_rejection():
    assert _config(institution=Institution.SI).tick_count == 90
    assert _config(institution=Institution.TI).tick_count == 180
    with pytest.raises(UnsupportedModel):
        _config(institution=Institution.TIL)


def test_constant_strategies_agree_at_tick_two():
    config = _config()
    t = run_negotiation(config, _ent(0.55, 0.55), (_inv(0.55, 0.55),), seed=3)
    assert t.agreements == (0.55,)
    accept = [e for e in t.events if e.accepted]
    assert len(accept) == 1 and accept[0].tick == 2
    assert t.events[-1].accepted
    assert t.investments == (200.0,)


def test_midpoint_convergence_for_symmetric_linear_concession():
    config = _config()
    ent = _ent(0.37, 0.55)
    inv = _inv(0.70, 0.50)
    midpoint = 0.5 * (0.37 + 0.70)
    for seed in range(12):
        t = run_negotiation(config, ent, (inv,), seed=seed)
        share = t.agreements[0]
        assert share is not None
        assert 0.50 <= share <= 0.55
        assert abs(share - midpoint) <= 0.03


def test_disjoint_ranges_disagree_and_outside_options_apply():
    config = _config(arm=Arm.RICH)
    t = run_negotiation(config, _ent(0.1, 0.3), (_inv(0.95, 0.8),), seed=1)
    assert t.agreements == (None,)
    assert t.investments == (0.0,)
    assert t.entrepreneur_profit == 160.0
    assert t.investor_profits == (200.0,)


def test_seed_determinism_byte_identical():
    config = _config(institution=Institution.TI)
    pop = make_calibrated_population(Arm.POOR, Institution.TI, seed=4)
    a = run_batch(config, pop, 40, seed=9)
    b = run_batch(config, pop, 40, seed=9)
    assert transcripts_to_jsonl(a[1]) == transcripts_to_jsonl(b[1])
    assert a[0] == b[0]
    c = run_batch(config, pop, 40, seed=10)
    assert transcripts_to_jsonl(a[1]) != transcripts_to_jsonl(c[1])


def test_channel_isolation_under_stream_permutation():
    config = _config(institution=Institution.TI)
    ent = _ent(0.22, 0.35)
    invs = (_inv(0.45, 0.30), _inv(0.48, 0.33))
    base = run_negotiation(config, ent, invs, seed=5)
    permuted = run_negotiation(config, ent, invs, seed=5, channel_seeds=[(5, 0), (1234, 99)])
    ch0 = lambda t: [e for e in t.events if e.channel == 0]
    assert ch0(base) == ch0(permuted)
    assert base.agreements[0] == permuted.agreements[0]


def test_agreed_share_lies_in_reservation_intersection():
    rng = np.random.default_rng(14)
    config = _config()
    for _ in range(60):
        ent_open = float(rng.uniform(0.1, 0.5))
        ent_res = float(rng.uniform(ent_open, 0.9))
        inv_open = float(rng.uniform(0.5, 0.95))
        inv_res = float(rng.uniform(0.05, inv_open))
        t = run_negotiation(
            config, _ent(ent_open, ent_res), (_inv(inv_open, inv_res),), seed=2
        )
        share = t.agreements[0]
        if inv_res <= ent_res and share is not None:
            lo = min(inv_res, ent_open)  # offers start at the openings
            assert lo - 1e-12 <= share <= ent_res + 1e-12
        if inv_res > ent_res:
            # empty zone of agreement: must disagree
            assert share is None


def test_raising_entrepreneur_opening_never_lowers_agreement_rate():
    config = _config(institution=Institution.TI)
    inv = (_inv(0.45, 0.38), _inv(0.47, 0.36))
    prev_rate = -1.0
    for opening in (0.10, 0.18, 0.26, 0.34, 0.42):
        pop = [(_ent(opening, opening + 0.08), inv)]
        stats, _ = run_batch(config, pop, 60, seed=21)
        agree_rate = stats.full_rate + stats.partial_rate
        assert agree_rate >= prev_rate - 1e-12
        prev_rate = agree_rate


def test_batch_always_agree_population():
    config = _config()
    pop = [(_ent(0.5, 0.5), (_inv(0.5, 0.5),))]
    stats, _ = run_batch(config, pop, 25, seed=0)
    assert stats.full_rate == 1.0
    assert stats.mean_entrepreneur_share_full == pytest.approx(0.5)


def test_batch_partial_only_population():
    # exactly one channel has overlapping ranges
    config = _config(institution=Institution.TI)
    pop = [(_ent(0.2, 0.4), (_inv(0.5, 0.35), _inv(0.95, 0.9)))]
    stats, transcripts = run_batch(config, pop, 25, seed=0)
    assert stats.partial_rate == 1.0
    assert stats.none_rate == 0.0
    for t in transcripts:
        assert t.agreements[0] is not None and t.agreements[1] is None
        assert t.investments == (100.0, 0.0)


def test_partial_agreement_pays_prorated_outside_option():
    config = _config(arm=Arm.RICH, institution=Institution.TI)
    pop = [(_ent(0.2, 0.4), (_inv(0.5, 0.35), _inv(0.95, 0.9)))]
    _, transcripts = run_batch(config, pop, 5, seed=0)
    t = transcripts[0]
    s = t.agreements[0]
    deal_profit = 3.0 * 100.0 * (1.0 - s)
    assert t.entrepreneur_profit == pytest.approx(deal_profit + 80.0, abs=1e-9)


def test_calibrated_batch_brackets_observed_share():
    sc = make_preset_scenario(Arm.POOR, Institution.SI, Contract.COMMON)
    config = ProtocolConfig(scenario=sc)
    ent_open, inv_open = calibrated_openings(Arm.POOR, Institution.SI)
    mid = 0.5 * (ent_open + inv_open)
    pop = [
        (
            _ent(ent_open, mid + 0.03),
            (_inv(inv_open, mid - 0.03),),
        )
    ]
    stats, _ = run_batch(config, pop, 200, seed=17)
    assert stats.full_rate == 1.0
    assert 0.50 <= stats.mean_agreed_investor_share <= 0.58


def test_anchoring_midpoint_identity_gives_half_slopes():
    # If the final share always equals the midpoint of the two first offers,
    # both share slopes are exactly one half (arithmetic identity).
    from equitysplit.simulate import NegotiationTranscript, OfferEvent

    rng = np.random.default_rng(8)
    transcripts = []
    for _ in range(40):
        ent_open = float(rng.uniform(0.2, 0.45))
        inv_open = float(rng.uniform(0.55, 0.8))
        mid = 0.5 * (ent_open + inv_open)
        events = (
            OfferEvent(1, Role.ENTREPRENEUR, 0, ent_open, False),
            OfferEvent(2, Role.INVESTOR, 0, inv_open, False),
            OfferEvent(3, Role.ENTREPRENEUR, 0, mid, True),
        )
        transcripts.append(
            NegotiationTranscript(
                events=events,
                agreements=(mid,),
                investments=(200.0,),
                shares=(mid,),
                entrepreneur_profit=0.0,
                investor_profits=(0.0,),
            )
        )
    stats = anchoring_stats(transcripts)
    assert stats.n_agreed == 40
    assert stats.share_on_ent_first == pytest.approx(0.5, abs=1e-9)
    assert stats.share_on_inv_first == pytest.approx(0.5, abs=1e-9)


def test_near_midpoint_protocol_agreements_give_near_half_slopes():
    # Live protocol version: symmetric reservations just past the midpoint
    # make agreements land near the midpoint, so slopes come out near 0.5.
    config = _config(ticks=90)
    rng = np.random.default_rng(8)
    transcripts = []
    for _ in range(60):
        ent_open = float(rng.uniform(0.2, 0.45))
        inv_open = float(rng.uniform(0.55, 0.8))
        mid = 0.5 * (ent_open + inv_open)
        transcripts.append(
            run_negotiation(
                config,
                _ent(ent_open, mid + 0.02),
                (_inv(inv_open, mid - 0.02),),
                seed=1,
            )
        )
    stats = anchoring_stats(transcripts)
    assert stats.n_agreed == 60
    assert stats.share_on_ent_first == pytest.approx(0.5, abs=0.1)
    assert stats.share_on_inv_first == pytest.approx(0.5, abs=0.1)


def test_anchoring_signs_on_shipped_family():
    for arm in (Arm.POOR, Arm.RICH):
        for institution in (Institution.SI, Institution.TI):
            config = _config(arm=arm, institution=institution)
            pop = make_calibrated_population(arm, institution, seed=2)
            _, transcripts = run_batch(config, pop, 300, seed=6)
            stats = anchoring_stats(transcripts)
            assert stats.agreement_on_ent_first > 0.0
            assert stats.agreement_on_inv_first < 0.0
            assert stats.share_on_ent_first > 0.0
            assert stats.share_on_inv_first > 0.0


def test_anchoring_requires_variation_and_enough_data():
    config = _config()
    constant = [
        run_negotiation(config, _ent(0.3, 0.5), (_inv(0.7, 0.45),), seed=s)
        for s in range(12)
    ]
    with pytest.raises(DegenerateData):
        anchoring_stats(constant)  # no variance in first offers
    with pytest.raises(DegenerateData):
        anchoring_stats(constant[:3])  # too few rows


def test_transcript_jsonl_round_trip_fields():
    import json

    config = _config()
    t = run_negotiation(config, _ent(0.3, 0.5), (_inv(0.7, 0.45),), seed=0)
    lines = t.to_jsonl().splitlines()
    assert len(lines) == len(t.events)
    first = json.loads(lines[0])
    assert set(first) == {"tick", "role", "channel", "share", "accepted"}
