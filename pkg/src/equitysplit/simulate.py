"""Seeded agent simulation of the semi-structured offer/accept protocol.

One negotiation is a fixed number of discrete ticks per bilateral channel
(90 with one investor, 180 with two). Within a channel the sides strictly
alternate; the seeded per-channel random stream decides who opens, so
identical seeds give byte-identical transcripts and the two channels of a
triad are fully isolated. Scripted agents follow an opening/reservation/
concession strategy and accept the standing counteroffer as soon as it is
weakly better than their own next planned offer. Offers always quote the
share of realized value going to the investor; investments are all or
nothing at the channel's endowment.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import payoffs
from .errors import DegenerateData, InvalidParameter, UnsupportedModel
from .types import Arm, Institution, Scenario

__all__ = [
    "Role",
    "Concession",
    "AgentStrategy",
    "ProtocolConfig",
    "OfferEvent",
    "NegotiationTranscript",
    "SimStats",
    "AnchoringStats",
    "run_negotiation",
    "run_batch",
    "anchoring_stats",
    "calibrated_openings",
    "make_calibrated_population",
    "transcripts_to_jsonl",
]

_GEOMETRIC_RATE = 0.92


class Role(str, Enum):
    ENTREPRENEUR = "entrepreneur"
    INVESTOR = "investor"


class Concession(str, Enum):
    LINEAR = "linear"
    GEOMETRIC = "geometric"


@dataclass(frozen=True)
class AgentStrategy:
    """Opening/reservation/concession model of one negotiator.

    Shares quote the investor's slice. Investors open high and concede down
    to their reservation; entrepreneurs open low and concede up. The accept
    rule is fixed: take the standing counteroffer when it is weakly better
    than your own next planned offer.
    """

    role: Role
    opening_share: float
    reservation_share: float
    concession: Concession = Concession.LINEAR

    def __post_init__(self):
        for s in (self.opening_share, self.reservation_share):
            if not (0.0 <= s <= 1.0):
                raise InvalidParameter(f"strategy share out of [0, 1]: {s}")
        if self.role is Role.INVESTOR and self.opening_share < self.reservation_share:
            raise InvalidParameter("an investor's opening must be >= their reservation")
        if self.role is Role.ENTREPRENEUR and self.opening_share > self.reservation_share:
            raise InvalidParameter("an entrepreneur's opening must be <= their reservation")

    def planned_share(self, tick: int, horizon: int) -> float:
        """Offer this agent would put on the table at the given tick."""
        if horizon < 2:
            raise InvalidParameter("negotiations need at least 2 ticks")
        if self.concession is Concession.LINEAR:
            progress = (tick - 1) / (horizon - 1)
        else:
            g = _GEOMETRIC_RATE
            progress = (1.0 - g ** (tick - 1)) / (1.0 - g ** (horizon - 1))
        return self.opening_share + (self.reservation_share - self.opening_share) * progress


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol parameters: the scenario being negotiated and the clock."""

    scenario: Scenario
    tick_count: int | None = None

    def __post_init__(self):
        if self.scenario.institution is Institution.TIL:
            raise UnsupportedModel(
                "the offer protocol is defined for the SI and TI institutions"
            )
        if self.tick_count is None:
            default = 90 if self.scenario.institution is Institution.SI else 180
            object.__setattr__(self, "tick_count", default)
        if self.tick_count < 2:
            raise InvalidParameter("tick_count must be >= 2")


@dataclass(frozen=True)
class OfferEvent:
    tick: int
    role: Role
    channel: int
    share: float
    accepted: bool

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "role": self.role.value,
            "channel": self.channel,
            "share": self.share,
            "accepted": self.accepted,
        }


@dataclass(frozen=True)
class NegotiationTranscript:
    """Ordered offer events plus the terminal outcome.

    ``agreements`` holds the accepted investor share per channel (None on
    disagreement); ``investments`` the resulting all-or-nothing amounts.
    Expected profits follow the payoff kernel, with the entrepreneur's
    outside option pro-rated over the unsecured fraction.
    """

    events: tuple[OfferEvent, ...]
    agreements: tuple[float | None, ...]
    investments: tuple[float, ...]
    shares: tuple[float, ...]
    entrepreneur_profit: float
    investor_profits: tuple[float, ...]

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(e.to_dict()) for e in self.events)

    def first_offers(self, channel: int) -> dict[Role, float | None]:
        first: dict[Role, float | None] = {Role.ENTREPRENEUR: None, Role.INVESTOR: None}
        for e in self.events:
            if e.channel != channel or e.accepted:
                continue
            if first[e.role] is None:
                first[e.role] = e.share
        return first


def _entrepreneur_profit(scenario: Scenario, investments, shares) -> float:
    """Deal profit plus the pro-rated outside option retained on a partial raise."""
    total = sum(investments)
    pi_e, _ = payoffs.expected_profits(scenario, investments, shares)
    if total == 0.0:
        return pi_e  # already the bare outside option
    return pi_e + payoffs.prorated_outside_option(scenario, total)


def _run_channel(channel, ent, inv, horizon, rng):
    """Simulate one bilateral channel; returns (events, agreed share or None)."""
    events = []
    ent_first_mover = bool(rng.integers(2))
    standing = {Role.ENTREPRENEUR: None, Role.INVESTOR: None}
    for tick in range(1, horizon + 1):
        ent_turn = (tick % 2 == 1) == ent_first_mover
        actor, strategy = (
            (Role.ENTREPRENEUR, ent) if ent_turn else (Role.INVESTOR, inv)
        )
        other = Role.INVESTOR if ent_turn else Role.ENTREPRENEUR
        planned = strategy.planned_share(tick, horizon)
        counter = standing[other]
        if counter is not None:
            acceptable = counter <= planned if ent_turn else counter >= planned
            if acceptable:
                events.append(OfferEvent(tick, actor, channel, counter, True))
                return events, counter
        events.append(OfferEvent(tick, actor, channel, planned, False))
        standing[actor] = planned
    return events, None


def run_negotiation(
    config: ProtocolConfig,
    ent_strategy: AgentStrategy,
    investor_strategies,
    seed: int,
    channel_seeds=None,
) -> NegotiationTranscript:
    """Run one seeded negotiation; deterministic given the seed.

    ``channel_seeds`` optionally overrides the per-channel stream seeds
    (default: derived from the master seed and the channel index), which is
    how the channel-isolation property is exercised.
    """
    scenario = config.scenario
    n = scenario.n_investors
    investor_strategies = tuple(investor_strategies)
    if len(investor_strategies) != n:
        raise InvalidParameter(f"need {n} investor strategies, got {len(investor_strategies)}")
    if ent_strategy.role is not Role.ENTREPRENEUR:
        raise InvalidParameter("ent_strategy must have the entrepreneur role")
    for s in investor_strategies:
        if s.role is not Role.INVESTOR:
            raise InvalidParameter("investor strategies must have the investor role")
    if channel_seeds is None:
        channel_seeds = [(seed, c) for c in range(n)]

    all_events = []
    agreements = []
    for c in range(n):
        rng = np.random.default_rng(np.random.SeedSequence(list(channel_seeds[c])))
        events, agreed = _run_channel(
            c, ent_strategy, investor_strategies[c], config.tick_count, rng
        )
        all_events.extend(events)
        agreements.append(agreed)
    all_events.sort(key=lambda e: (e.tick, e.channel))

    endow = scenario.endowments
    investments = tuple(endow[c] if agreements[c] is not None else 0.0 for c in range(n))
    shares = tuple(agreements[c] if agreements[c] is not None else 0.0 for c in range(n))
    _, pi_i = payoffs.expected_profits(scenario, investments, shares)
    return NegotiationTranscript(
        events=tuple(all_events),
        agreements=tuple(agreements),
        investments=investments,
        shares=shares,
        entrepreneur_profit=_entrepreneur_profit(scenario, investments, shares),
        investor_profits=tuple(pi_i),
    )


@dataclass(frozen=True)
class SimStats:
    """Batch aggregates: agreement-rate decomposition, conditional shares and
    unconditional expected profit."""

    rounds: int
    full_rate: float
    partial_rate: float
    none_rate: float
    mean_entrepreneur_share_full: float | None
    mean_agreed_investor_share: float | None
    mean_entrepreneur_profit: float

    def to_csv(self) -> str:
        header = (
            "rounds,full_rate,partial_rate,none_rate,"
            "mean_entrepreneur_share_full,mean_agreed_investor_share,"
            "mean_entrepreneur_profit"
        )
        fmt = lambda x: "" if x is None else repr(float(x))
        row = ",".join(
            [
                str(self.rounds),
                repr(self.full_rate),
                repr(self.partial_rate),
                repr(self.none_rate),
                fmt(self.mean_entrepreneur_share_full),
                fmt(self.mean_agreed_investor_share),
                repr(self.mean_entrepreneur_profit),
            ]
        )
        return header + "\n" + row


def run_batch(config: ProtocolConfig, population, n_rounds: int, seed: int):
    """Run ``n_rounds`` seeded negotiations, drawing one strategy profile per
    round from the population. Returns (SimStats, transcripts)."""
    if n_rounds < 1:
        raise InvalidParameter("n_rounds must be >= 1")
    population = list(population)
    if not population:
        raise InvalidParameter("strategy population is empty")
    picker = np.random.default_rng(np.random.SeedSequence([seed, 0xA11CE]))
    transcripts = []
    for r in range(n_rounds):
        ent, investors = population[int(picker.integers(len(population)))]
        n = config.scenario.n_investors
        transcripts.append(
            run_negotiation(
                config, ent, investors, seed,
                channel_seeds=[(seed, r, c) for c in range(n)],
            )
        )

    n_channels = config.scenario.n_investors
    full = partial = none = 0
    ent_shares_full = []
    agreed_shares = []
    profits = []
    for t in transcripts:
        agreed = sum(1 for a in t.agreements if a is not None)
        if agreed == n_channels:
            full += 1
            ent_shares_full.append(1.0 - sum(t.shares))
        elif agreed == 0:
            none += 1
        else:
            partial += 1
        agreed_shares.extend(a for a in t.agreements if a is not None)
        profits.append(t.entrepreneur_profit)
    stats = SimStats(
        rounds=n_rounds,
        full_rate=full / n_rounds,
        partial_rate=partial / n_rounds,
        none_rate=none / n_rounds,
        mean_entrepreneur_share_full=(
            float(np.mean(ent_shares_full)) if ent_shares_full else None
        ),
        mean_agreed_investor_share=(
            float(np.mean(agreed_shares)) if agreed_shares else None
        ),
        mean_entrepreneur_profit=float(np.mean(profits)),
    )
    return stats, transcripts


@dataclass(frozen=True)
class AnchoringStats:
    """OLS slopes of agreement and final investor share on both first offers."""

    n_channels: int
    n_agreed: int
    agreement_on_ent_first: float
    agreement_on_inv_first: float
    share_on_ent_first: float
    share_on_inv_first: float


def _ols(design: np.ndarray, y: np.ndarray) -> np.ndarray:
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise DegenerateData("design matrix is rank deficient (constant first offers?)")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return coef


def anchoring_stats(transcripts) -> AnchoringStats:
    """Regress (agreement, final investor share) on both sides' first offers,
    pooled over channels. Needs at least 10 channel negotiations in which
    both sides made an offer."""
    rows = []
    for t in transcripts:
        for c in range(len(t.agreements)):
            first = t.first_offers(c)
            ent_f, inv_f = first[Role.ENTREPRENEUR], first[Role.INVESTOR]
            if ent_f is None or inv_f is None:
                continue
            rows.append((ent_f, inv_f, t.agreements[c]))
    if len(rows) < 10:
        raise DegenerateData(
            f"need >= 10 channel negotiations with both first offers, got {len(rows)}"
        )
    x = np.array([[1.0, r[0], r[1]] for r in rows])
    agreed_flag = np.array([1.0 if r[2] is not None else 0.0 for r in rows])
    coef_agree = _ols(x, agreed_flag)

    agreed_rows = [r for r in rows if r[2] is not None]
    if len(agreed_rows) < 3:
        raise DegenerateData("need >= 3 agreements to regress final shares")
    xa = np.array([[1.0, r[0], r[1]] for r in agreed_rows])
    ya = np.array([r[2] for r in agreed_rows])
    coef_share = _ols(xa, ya)
    return AnchoringStats(
        n_channels=len(rows),
        n_agreed=len(agreed_rows),
        agreement_on_ent_first=float(coef_agree[1]),
        agreement_on_inv_first=float(coef_agree[2]),
        share_on_ent_first=float(coef_share[1]),
        share_on_inv_first=float(coef_share[2]),
    )


# Mean opening offers (share proposed to the investor) observed in the
# benchmark environments; used to seed the shipped strategy families.
_OPENING_CALIBRATION: dict[tuple[Arm, Institution], tuple[float, float]] = {
    (Arm.POOR, Institution.SI): (0.3697, 0.7077),
    (Arm.RICH, Institution.SI): (0.4030, 0.6513),
    (Arm.POOR, Institution.TI): (0.2378, 0.4429),
    (Arm.RICH, Institution.TI): (0.2331, 0.4454),
}


def calibrated_openings(arm: Arm, institution: Institution) -> tuple[float, float]:
    """(entrepreneur opening, investor opening) for a benchmark environment."""
    try:
        return _OPENING_CALIBRATION[(Arm(arm), Institution(institution))]
    except KeyError:
        raise UnsupportedModel(f"no opening calibration for {institution}") from None


def make_calibrated_population(
    arm: Arm,
    institution: Institution,
    n_profiles: int = 40,
    seed: int = 0,
    opening_spread: float = 0.06,
    depth_range: tuple[float, float] = (0.5, 0.7),
    concession: Concession = Concession.LINEAR,
):
    """Shipped strategy family around the calibrated openings.

    Openings are jittered uniformly; each side's reservation sits a random
    fraction of the mean opening gap past its own opening. With the default
    depth range the two reservation ranges overlap for most but not all
    profiles, so batches produce both agreements and disagreements.
    """
    arm, institution = Arm(arm), Institution(institution)
    ent_open0, inv_open0 = calibrated_openings(arm, institution)
    gap = inv_open0 - ent_open0
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xBA5E]))
    population = []
    n_inv = institution.n_investors
    for _ in range(n_profiles):
        ent_open = float(np.clip(ent_open0 + rng.uniform(-opening_spread, opening_spread), 0.0, 1.0))
        ent_res = float(np.clip(ent_open + gap * rng.uniform(*depth_range), 0.0, 1.0))
        ent = AgentStrategy(Role.ENTREPRENEUR, ent_open, ent_res, concession)
        investors = []
        for _ in range(n_inv):
            inv_open = float(np.clip(inv_open0 + rng.uniform(-opening_spread, opening_spread), 0.0, 1.0))
            inv_res = float(np.clip(inv_open - gap * rng.uniform(*depth_range), 0.0, 1.0))
            investors.append(AgentStrategy(Role.INVESTOR, inv_open, inv_res, concession))
        population.append((ent, tuple(investors)))
    return population


def transcripts_to_jsonl(transcripts) -> str:
    """One offer event per line, transcripts separated in order."""
    return "\n".join(t.to_jsonl() for t in transcripts if t.events)
