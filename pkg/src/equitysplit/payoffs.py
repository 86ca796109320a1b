"""Pure payoff and utility kernel.

Realized payoffs per state, expected profits, CRRA expected utilities,
belief-consistent disagreement points and the gain/loss risk-exposure
classification, for every institution x contract x belief combination.
All functions are pure and raise typed errors on infeasible inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InfeasibleAllocation, UtilityDomainViolation
from .types import BeliefModel, Contract, Institution, ProRating, RiskProfile, Scenario

__all__ = [
    "State",
    "StateOutcome",
    "DisagreementPoints",
    "PayoffDomain",
    "check_feasible",
    "startup_value",
    "prorated_outside_option",
    "realized_payoffs",
    "expected_profits",
    "expected_utilities",
    "disagreement_points",
    "risk_exposure_domains",
    "check_claim_coverage",
    "crra_utility",
]

_FEAS_TOL = 1e-9


class State(str, Enum):
    HIGH = "high"
    LOW = "low"


@dataclass(frozen=True)
class StateOutcome:
    """Realized state and startup value V = alpha * total investment."""

    state: State
    value: float


@dataclass(frozen=True)
class DisagreementPoints:
    """Entrepreneur's fallback versus each investor and each investor's own
    fallback (their endowment)."""

    d_e_vs: tuple[float, ...]
    d_i: tuple[float, ...]


class PayoffDomain(str, Enum):
    GAIN = "gain"
    GAIN_OR_LOSS = "gain_or_loss"


def check_feasible(scenario: Scenario, investments, shares) -> None:
    """Raise InfeasibleAllocation unless investments respect per-investor
    endowments and the total cap, and shares lie in [0, 1] with sum <= 1."""
    endow = scenario.endowments
    if len(investments) != len(endow) or len(shares) != len(endow):
        raise InfeasibleAllocation(
            f"expected {len(endow)} investors, got {len(investments)} investments "
            f"and {len(shares)} shares"
        )
    for j, (inv, cap) in enumerate(zip(investments, endow)):
        if inv < -_FEAS_TOL or inv > cap + _FEAS_TOL:
            raise InfeasibleAllocation(f"investment {inv} outside [0, {cap}] for investor {j}")
    if sum(investments) > scenario.params.e + _FEAS_TOL:
        raise InfeasibleAllocation(
            f"total investment {sum(investments)} exceeds requirement {scenario.params.e}"
        )
    for j, s in enumerate(shares):
        if s < -_FEAS_TOL or s > 1.0 + _FEAS_TOL:
            raise InfeasibleAllocation(f"share {s} outside [0, 1] for investor {j}")
    if sum(shares) > 1.0 + _FEAS_TOL:
        raise InfeasibleAllocation(f"investor shares sum to {sum(shares)} > 1")


def _alpha(scenario: Scenario, state: State) -> float:
    return scenario.params.alpha_h if state is State.HIGH else scenario.params.alpha_l


def startup_value(scenario: Scenario, investments, state: State) -> StateOutcome:
    return StateOutcome(state=state, value=_alpha(scenario, state) * sum(investments))


def prorated_outside_option(scenario: Scenario, secured: float) -> float:
    """Outside option the entrepreneur retains after securing ``secured``
    points of investment, under the scenario's pro-rating rule."""
    d_e, e = scenario.params.d_e, scenario.params.e
    if scenario.prorating is ProRating.LINEAR:
        return d_e * max(e - secured, 0.0) / e
    return d_e if secured == 0.0 else 0.0


def _investor_claim(alpha_v: float, s_j: float, i_j: float, i_other: float) -> float:
    """Preferred-stock claim of one investor on the realized value alpha_v.

    The claim is the negotiated slice minus any compensation owed to the
    other protected investor once the entrepreneur's residual is exhausted,
    floored at the investor's own investment. The compensation term vanishes
    at equilibrium but is needed off-equilibrium.
    """
    compensation = max(i_other - alpha_v * (1.0 - s_j), 0.0)
    return max(alpha_v * s_j - compensation, i_j)


def _deal_payoffs(scenario: Scenario, investments, shares, state: State):
    """Per-state payoffs from the deals alone, excluding outside options.

    Returns (ent, tuple of investor payoffs). Investors keep uninvested
    endowment on top of their claim on the realized value.
    """
    total = sum(investments)
    endow = scenario.endowments
    if total == 0.0:
        return 0.0, tuple(endow)
    alpha = _alpha(scenario, state)
    v = alpha * total
    if scenario.contract is Contract.COMMON:
        inv = tuple(s * v + w - i for s, w, i in zip(shares, endow, investments))
        ent = (1.0 - sum(shares)) * v
        return ent, inv
    # Preferred: liquidation preference equal to the investment in both states.
    claims = []
    for j, (s, i) in enumerate(zip(shares, investments)):
        i_other = sum(investments) - i
        claims.append(_investor_claim(v, s, i, i_other))
    inv = tuple(c + w - i for c, w, i in zip(claims, endow, investments))
    ent = max(v - sum(claims), 0.0)
    return ent, inv


def realized_payoffs(scenario: Scenario, investments, shares, state: State):
    """Realized (state-contingent) payoffs.

    With no investment at all the deal is off: the entrepreneur earns the
    outside option d_e and each investor keeps their endowment. Otherwise the
    payoffs are the pure deal payoffs for the given contract.
    """
    check_feasible(scenario, investments, shares)
    ent, inv = _deal_payoffs(scenario, investments, shares, state)
    if sum(investments) == 0.0:
        ent = scenario.params.d_e
    return ent, inv


def expected_profits(scenario: Scenario, investments, shares):
    """Expectation of realized payoffs over the two-point alpha distribution."""
    p = scenario.params.p
    ent_h, inv_h = realized_payoffs(scenario, investments, shares, State.HIGH)
    ent_l, inv_l = realized_payoffs(scenario, investments, shares, State.LOW)
    ent = p * ent_h + (1.0 - p) * ent_l
    inv = tuple(p * h + (1.0 - p) * lo for h, lo in zip(inv_h, inv_l))
    return ent, inv


def crra_utility(x: float, rho: float) -> float:
    """u(x) = x**(1 - rho); identity at rho = 0, domain x >= 0 for rho > 0."""
    if rho == 0.0:
        return x
    if x < 0.0:
        raise UtilityDomainViolation(f"CRRA utility undefined for payoff {x} < 0")
    return x ** (1.0 - rho)


def expected_utilities(scenario: Scenario, risk: RiskProfile, investments, shares):
    """Expected CRRA utilities of the realized payoffs; equals
    expected_profits exactly when every exponent is zero."""
    p = scenario.params.p
    ent_h, inv_h = realized_payoffs(scenario, investments, shares, State.HIGH)
    ent_l, inv_l = realized_payoffs(scenario, investments, shares, State.LOW)
    u_e = p * crra_utility(ent_h, risk.rho_e) + (1.0 - p) * crra_utility(ent_l, risk.rho_e)
    u_i = tuple(
        p * crra_utility(h, r) + (1.0 - p) * crra_utility(lo, r)
        for h, lo, r in zip(inv_h, inv_l, risk.rho_i)
    )
    return u_e, u_i


def _solo_deal_profit_e(scenario: Scenario, i_j: float, s_j: float) -> float:
    """Entrepreneur's expected deal profit when one investor alone invests
    (i_j, s_j); excludes any outside-option component."""
    if i_j == 0.0:
        return 0.0
    params = scenario.params
    if scenario.contract is Contract.COMMON:
        return params.mu_alpha * i_j * (1.0 - s_j)
    high = params.alpha_h * i_j - max(params.alpha_h * i_j * s_j, i_j)
    return params.p * high  # low state leaves nothing after the preference


def disagreement_points(scenario: Scenario, other_deal=None) -> DisagreementPoints:
    """Belief-consistent disagreement points.

    ``other_deal`` describes the counterpart bilateral agreement(s) under the
    standard belief: either one (investment, share) pair taken as the deal the
    other investor holds, or a per-investor sequence of such pairs, in which
    case the fallback versus investor i uses the other investor's deal. None
    means no counterpart deal. Ignored for SI and under the joint belief.
    """
    d_e = scenario.params.d_e
    endow = scenario.endowments
    n = scenario.n_investors
    if n == 1:
        return DisagreementPoints(d_e_vs=(d_e,), d_i=endow)
    if scenario.belief is BeliefModel.JOINT:
        return DisagreementPoints(d_e_vs=(d_e,) * n, d_i=endow)
    if other_deal is None:
        deals = [(0.0, 0.0), (0.0, 0.0)]
    elif isinstance(other_deal[0], (int, float)):
        deals = [tuple(other_deal)] * n
    else:
        per = [tuple(d) for d in other_deal]
        if len(per) != n:
            raise InfeasibleAllocation(f"need {n} deals, got {len(per)}")
        # d_e_vs[i] falls back on the *other* investor's deal
        deals = [per[1], per[0]]
    d_e_vs = tuple(
        prorated_outside_option(scenario, i_j) + _solo_deal_profit_e(scenario, i_j, s_j)
        for i_j, s_j in deals
    )
    return DisagreementPoints(d_e_vs=d_e_vs, d_i=endow)


def risk_exposure_domains(scenario: Scenario):
    """Classify which side can end up below its outside option.

    The entrepreneur is pure-gain iff d_e = 0 (nothing to fall below);
    investors are pure-gain iff the contract is preferred (losses insured).
    """
    ent = PayoffDomain.GAIN if scenario.params.d_e == 0.0 else PayoffDomain.GAIN_OR_LOSS
    inv = (
        PayoffDomain.GAIN
        if scenario.contract is Contract.PREFERRED
        else PayoffDomain.GAIN_OR_LOSS
    )
    return ent, inv


def check_claim_coverage(scenario: Scenario, investments, shares) -> None:
    """Equilibrium guard for preferred contracts with two investors: the
    high-state residual left to each bilateral pair must cover the other
    investor's investment, i.e. alpha_h * total * (1 - s_i) >= I_other.
    Raises InfeasibleAllocation when violated."""
    if scenario.contract is not Contract.PREFERRED or scenario.n_investors != 2:
        return
    total = sum(investments)
    for i, s_i in enumerate(shares):
        i_other = total - investments[i]
        lhs = scenario.params.alpha_h * total * (1.0 - s_i)
        if lhs < i_other - _FEAS_TOL:
            raise InfeasibleAllocation(
                "preferred equilibrium violates claim coverage: "
                f"alpha_h * total * (1 - s_{i}) = {lhs} < {i_other}"
            )
