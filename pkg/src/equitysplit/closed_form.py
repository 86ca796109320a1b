"""Exact analytic bargaining equilibria.

One solver per institution, with every existence condition enforced:

* single investor, common or preferred stock, general bargaining power;
* two small investors, both contracts, standard or joint-disagreement belief,
  including the one-investor-investing branches;
* two large investors (common stock): the continuum of full-investment
  equilibria plus the exclusionary branches.

Conditions stated with strict inequalities are evaluated strictly; boundary
equality excludes the branch. Threshold comparisons are done in
multiplied-through form so that boundary bargaining powers do not divide by
zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import payoffs
from .errors import (
    AssumptionViolated,
    InvalidParameter,
    ModelDomainError,
    NoGainsFromTrade,
    UnsupportedModel,
)
from .types import (
    BargainingPowers,
    BeliefModel,
    Contract,
    EquilibriumOutcome,
    Institution,
    MarketParams,
    Scenario,
)

__all__ = [
    "ContinuumFamily",
    "EquilibriumSet",
    "solve_si",
    "solve_ti",
    "solve_til",
    "corollary_gap",
    "solve_scenario",
]

_GAIN_TOL = 1e-7


def _require_return_floor(params: MarketParams) -> None:
    if not params.meets_return_floor:
        raise AssumptionViolated(
            f"closed forms require mu_alpha >= 2, got {params.mu_alpha:.6g}"
        )


def _require_preferred_low_one(params: MarketParams, contract: Contract) -> None:
    if contract is Contract.PREFERRED and params.alpha_l != 1.0:
        raise InvalidParameter("preferred contracts require alpha_l = 1")


def _scenario_for(params, institution, theta, contract, belief) -> Scenario:
    return Scenario(
        params=params,
        institution=institution,
        contract=contract,
        powers=BargainingPowers(theta=tuple(theta)),
        belief=belief,
    )


def _finalize(scenario: Scenario, investments, shares, regime: str) -> EquilibriumOutcome:
    """Validate an analytic solution against the payoff kernel and package it.

    Checks feasibility, the preferred-contract claim-coverage guard, and that
    every bilateral pair weakly gains over its disagreement point.
    """
    payoffs.check_feasible(scenario, investments, shares)
    payoffs.check_claim_coverage(scenario, investments, shares)
    pi_e, pi_i = payoffs.expected_profits(scenario, investments, shares)
    deals = list(zip(investments, shares))
    dis = payoffs.disagreement_points(
        scenario, deals if scenario.n_investors == 2 else None
    )
    gain_tol = _GAIN_TOL * max(1.0, scenario.params.e)  # gains are in points
    for i in range(scenario.n_investors):
        if investments[i] == 0.0:
            continue  # inactive channel carries no bargain to check
        if pi_i[i] - dis.d_i[i] < -gain_tol or pi_e - dis.d_e_vs[i] < -gain_tol:
            raise NoGainsFromTrade(
                f"branch {regime} leaves negative gains versus investor {i} "
                f"(investor gain {pi_i[i] - dis.d_i[i]:.6g}, "
                f"entrepreneur gain {pi_e - dis.d_e_vs[i]:.6g})"
            )
    return EquilibriumOutcome(
        investments=tuple(investments),
        shares=tuple(shares),
        expected_profit_e=pi_e,
        expected_profit_i=tuple(pi_i),
        regime=regime,
    )


def solve_si(params: MarketParams, theta_0: float, contract: Contract) -> EquilibriumOutcome:
    """Single-investor bargaining outcome: full investment, share in closed form."""
    _require_return_floor(params)
    _require_preferred_low_one(params, contract)
    e, d = params.e, params.d_e
    if contract is Contract.COMMON:
        mu = params.mu_alpha
        s_0 = ((mu - 1.0) * theta_0 + 1.0) / mu - theta_0 * d / (e * mu)
    else:
        a, p = params.alpha_h, params.p
        s_0 = (theta_0 * (a - 1.0) + 1.0) / a - theta_0 * d / (e * a * p)
    scenario = _scenario_for(params, Institution.SI, (theta_0,), contract, BeliefModel.STANDARD)
    return _finalize(scenario, (e,), (s_0,), "SI")


def _ti_solo_condition(params: MarketParams, contract: Contract, theta_i: float) -> bool:
    # mu (1 - t) < (2 - t) - 2 d t / e        (common)
    # aH (1 - t) < (2 - t) - 2 d t / (e p)    (preferred)
    e, d = params.e, params.d_e
    if contract is Contract.COMMON:
        return params.mu_alpha * (1.0 - theta_i) < (2.0 - theta_i) - 2.0 * d * theta_i / e
    return params.alpha_h * (1.0 - theta_i) < (2.0 - theta_i) - 2.0 * d * theta_i / (
        e * params.p
    )


def _ti_solo_share(params: MarketParams, contract: Contract, theta_i: float) -> float:
    e, d = params.e, params.d_e
    if contract is Contract.COMMON:
        mu = params.mu_alpha
        return ((mu - 1.0) * theta_i + 1.0) / mu - 2.0 * d * theta_i / (e * mu)
    a, p = params.alpha_h, params.p
    return ((a - 1.0) * theta_i + 1.0) / a - 2.0 * theta_i * d / (e * a * p)


def _ti_both_common_standard(params, t1, t2):
    mu, e, d = params.mu_alpha, params.e, params.d_e
    den = 4.0 - t1 * t2
    shares = []
    for ti in (t1, t2):
        s = (
            (3.0 - 2.0 * mu) * (2.0 - ti) / (mu * den)
            + (mu - 1.0) / mu
            - d * (2.0 * ti - t1 * t2) / (e * mu * den)
        )
        shares.append(s)
    return tuple(shares)


def _ti_both_common_joint(params, t1, t2):
    mu, e, d = params.mu_alpha, params.e, params.d_e
    prod = t1 * t2
    # Existence: 2 mu (1 - ti) >= (3 - 2 ti - t1 t2) - 2 d (ti - t1 t2) / e
    for ti in (t1, t2):
        lhs = 2.0 * mu * (1.0 - ti)
        rhs = (3.0 - 2.0 * ti - prod) - 2.0 * d * (ti - prod) / e
        if lhs < rhs:
            return None
    if prod == 1.0:  # both powers at 1; evaluate the continuous limit
        s = 0.5 - d / (2.0 * e * mu)
        return (s, s)
    den = 2.0 * mu * (1.0 - prod)
    shares = []
    for ti in (t1, t2):
        s = (
            (1.0 - 2.0 * ti + 2.0 * mu * ti + (1.0 - 2.0 * mu) * prod) / den
            - d * (ti - prod) / (e * mu * (1.0 - prod))
        )
        shares.append(s)
    return tuple(shares)


def _safe_div(num: float, den: float) -> float:
    if den == 0.0:
        return math.inf if num >= 0.0 else -math.inf
    return num / den


def _ti_both_preferred_standard(params, t1, t2):
    """Four-regime piecewise shares for two protected investors.

    Returns (shares, regime_index). The alpha_h thresholds partition the
    parameter space; exactly one regime must match.
    """
    a, e, d, p = params.alpha_h, params.e, params.d_e, params.p
    prod = t1 * t2
    if prod == 1.0:
        raise InvalidParameter(
            "two-investor preferred closed form is undefined at theta = (1, 1)"
        )
    shift = d / (e * p)
    low = [_safe_div(1.0 - 2.0 * prod + t, t - prod) + shift for t in (t1, t2)]
    high = [_safe_div(2.0 + 3.0 * t - 2.0 * prod, 2.0 * t - prod) + shift for t in (t1, t2)]

    matches = []
    if a <= min(low):
        den = 2.0 * a * (1.0 - prod)
        s = tuple(
            (1.0 - a * prod + a * t - t) / den
            - d * (t - prod) / (den * p * e)
            for t in (t1, t2)
        )
        matches.append((s, 1))
    if low[0] < a <= high[1]:
        den = 2.0 - prod
        s1 = (1.0 - a * prod + a * t1 + prod - t1) / (a * den) - d * (t1 - prod) / (
            a * p * e * den
        )
        s2 = (2.0 - a * prod + 2.0 * a * t2 - 3.0 * t2) / (2.0 * a * den) - d * (
            2.0 * t2 - prod
        ) / (2.0 * a * p * e * den)
        matches.append(((s1, s2), 2))
    if low[1] < a <= high[0]:
        den = 2.0 - prod
        s1 = (2.0 - a * prod + 2.0 * a * t1 - 3.0 * t1) / (2.0 * a * den) - d * (
            2.0 * t1 - prod
        ) / (2.0 * a * p * e * den)
        s2 = (1.0 - a * prod + a * t2 + prod - t2) / (a * den) - d * (t2 - prod) / (
            a * p * e * den
        )
        matches.append(((s1, s2), 3))
    if a > max(high):
        den = 4.0 - prod
        s = tuple(
            (2.0 - a * prod + 2.0 * a * t + prod - 3.0 * t) / (a * den)
            - d * (2.0 * t - prod) / (a * p * e * den)
            for t in (t1, t2)
        )
        matches.append((s, 4))
    if len(matches) != 1:
        raise ModelDomainError(
            f"preferred regime selection matched {len(matches)} branches "
            f"(alpha_h={a}, thresholds low={low}, high={high})"
        )
    return matches[0]


def _ti_both_preferred_joint(params, t1, t2):
    a, e, d, p = params.alpha_h, params.e, params.d_e, params.p
    prod = t1 * t2
    # Existence: 2 aH (1 - ti) >= 3 (1 - ti) + (1 - tj) ti - 2 d (1 - tj) ti / (e p)
    for ti, tj in ((t1, t2), (t2, t1)):
        lhs = 2.0 * a * (1.0 - ti)
        rhs = 3.0 * (1.0 - ti) + (1.0 - tj) * ti - 2.0 * d * (1.0 - tj) * ti / (e * p)
        if lhs < rhs:
            return None
    if prod == 1.0:
        raise InvalidParameter(
            "two-investor preferred closed form is undefined at theta = (1, 1)"
        )
    shares = []
    for ti, tj in ((t1, t2), (t2, t1)):
        s = (ti * (2.0 * a * (1.0 - tj) + tj - 2.0) + 1.0) / (2.0 * a * (1.0 - prod)) - (
            d * ti * (1.0 - tj)
        ) / (a * e * p * (1.0 - prod))
        shares.append(s)
    return tuple(shares)


@dataclass(frozen=True)
class EquilibriumSet:
    """All coexisting equilibria for one scenario.

    ``outcomes`` lists point equilibria, both-invest first when present.
    ``continuum`` (two large investors only) describes the family of
    full-investment equilibria parametrized by investor 1's amount.
    """

    outcomes: tuple[EquilibriumOutcome, ...]
    continuum: "ContinuumFamily | None" = None


def solve_ti(
    params: MarketParams,
    theta,
    contract: Contract,
    belief: BeliefModel = BeliefModel.STANDARD,
) -> EquilibriumSet:
    """Two small complementary investors: both-invest equilibrium (when its
    condition holds) plus any one-investor-investing equilibria."""
    _require_return_floor(params)
    _require_preferred_low_one(params, contract)
    t1, t2 = theta
    e = params.e
    scenario = _scenario_for(params, Institution.TI, (t1, t2), contract, belief)

    outcomes = []
    if contract is Contract.COMMON:
        if belief is BeliefModel.STANDARD:
            shares = _ti_both_common_standard(params, t1, t2)
            regime = "TI-BothInvest"
        else:
            shares = _ti_both_common_joint(params, t1, t2)
            regime = "TI-BothInvest"
    else:
        if belief is BeliefModel.STANDARD:
            shares, regime_idx = _ti_both_preferred_standard(params, t1, t2)
            regime = f"TI-BothInvest-R{regime_idx}"
        else:
            shares = _ti_both_preferred_joint(params, t1, t2)
            regime = "TI-BothInvest"
    if shares is not None:
        outcomes.append(_finalize(scenario, (e / 2.0, e / 2.0), shares, regime))

    for i, ti in enumerate((t1, t2)):
        if _ti_solo_condition(params, contract, ti):
            s_i = _ti_solo_share(params, contract, ti)
            inv = [0.0, 0.0]
            sh = [0.0, 0.0]
            inv[i] = e / 2.0
            sh[i] = s_i
            outcomes.append(
                _finalize(scenario, tuple(inv), tuple(sh), f"TI-OneInvestor-{i + 1}")
            )

    if not outcomes:
        raise ModelDomainError(
            "no two-investor equilibrium branch matches these parameters"
        )
    return EquilibriumSet(outcomes=tuple(outcomes))


def _til_shares(params: MarketParams, theta, i1: float) -> tuple[float, float]:
    mu, e, d = params.mu_alpha, params.e, params.d_e
    t1, t2 = theta
    i2 = e - i1
    den = mu * e * (e * e - i1 * i2 * t1 * t2)
    shares = []
    for (ii, ti, tj) in ((i1, t1, t2), (i2, t2, t1)):
        num = ii * (
            ii * e * ti * (1.0 - tj + mu * tj)
            - e * e * (ti * (2.0 - mu * (1.0 - tj) - tj) - 1.0)
            - d * (ti * (1.0 - tj) * e + ii * ti * tj)
        )
        shares.append(num / den)
    return tuple(shares)


@dataclass(frozen=True)
class ContinuumFamily:
    """Full-investment equilibria for two large investors.

    For every split (i1, e - i1) with i1 in [i1_lo, i1_hi] there is an
    equilibrium whose shares are given by ``shares_at``.
    """

    params: MarketParams
    theta: tuple[float, float]
    i1_lo: float
    i1_hi: float

    def shares_at(self, i1: float) -> tuple[float, float]:
        lo, hi = self.i1_lo - 1e-9, self.i1_hi + 1e-9
        if not (lo <= i1 <= hi):
            raise InvalidParameter(
                f"i1 = {i1} outside the equilibrium interval [{self.i1_lo}, {self.i1_hi}]"
            )
        return _til_shares(self.params, self.theta, i1)

    def outcome_at(self, i1: float) -> EquilibriumOutcome:
        p = self.params
        scenario = _scenario_for(
            p, Institution.TIL, self.theta, Contract.COMMON, BeliefModel.STANDARD
        )
        shares = self.shares_at(i1)
        return _finalize(scenario, (i1, p.e - i1), shares, "TIL-Continuum")


def _til_point_valid(params: MarketParams, theta, i1: float) -> bool:
    """Validity of the full-investment family at split (i1, e - i1).

    Two requirements: the stated existence condition (in multiplied-through
    form it reduces to filling the remaining capacity being each investor's
    best response), and individual rationality of both bilateral pairs. With
    a zero outside option the two coincide; with d_e > 0 the participation
    constraint additionally clips the interval, since the pair's joint
    surplus is I_i * (mu * (1 - s_j) - 1 - d_e / e).
    """
    mu, e, d = params.mu_alpha, params.e, params.d_e
    t1, t2 = theta
    prod = t1 * t2
    for ii, ti in ((i1, t1), (e - i1, t2)):
        lhs = mu * (e**3 - e**2 * ii * ti)
        rhs = (
            e**3
            + e**2 * ii
            - 2.0 * e**2 * ii * ti
            + e * ii**2 * ti
            - d * (e * ii * (ti - prod) + ii**2 * prod)
        )
        if lhs < rhs:
            return False
    s1, s2 = _til_shares(params, theta, i1)
    if not (0.0 <= s1 <= 1.0 and 0.0 <= s2 <= 1.0 and s1 + s2 <= 1.0):
        return False
    for ii, s_other in ((i1, s2), (e - i1, s1)):
        if ii > 0.0 and ii * (mu * (1.0 - s_other) - 1.0 - d / e) < -1e-9 * e:
            return False
    return True


def _til_interval(params: MarketParams, theta) -> tuple[float, float]:
    """Contiguous run of valid investor-1 amounts containing the symmetric
    split, located by grid scan plus bisection refinement. With a positive
    outside option the corners can be valid but disconnected (a thin band of
    near-corner splits fails participation); those are reported separately by
    ``solve_til``, not here."""
    e = params.e
    n = 2001
    grid = [e * k / (n - 1) for k in range(n)]
    valid = [_til_point_valid(params, theta, x) for x in grid]
    mid = (n - 1) // 2
    if not valid[mid]:
        raise ModelDomainError(
            "symmetric split is not a two-large-investor equilibrium; "
            "the valid interval (if any) is not representable"
        )
    lo_idx = mid
    while lo_idx > 0 and valid[lo_idx - 1]:
        lo_idx -= 1
    hi_idx = mid
    while hi_idx < n - 1 and valid[hi_idx + 1]:
        hi_idx += 1
    if any(valid[1:lo_idx]) or any(valid[hi_idx + 1 : n - 1]):
        raise ModelDomainError(
            "two-large-investor validity region has interior pockets; "
            "not representable as one interval"
        )

    def bisect(inside: float, outside: float) -> float:
        for _ in range(80):
            m = 0.5 * (inside + outside)
            if _til_point_valid(params, theta, m):
                inside = m
            else:
                outside = m
        return inside

    lo = grid[lo_idx] if lo_idx == 0 else bisect(grid[lo_idx], grid[lo_idx - 1])
    hi = grid[hi_idx] if hi_idx == n - 1 else bisect(grid[hi_idx], grid[hi_idx + 1])
    return lo, hi


def solve_til(
    params: MarketParams,
    theta,
    contract: Contract = Contract.COMMON,
) -> EquilibriumSet:
    """Two large substitutable investors under common stock.

    Returns the continuum of full-investment equilibria (the contiguous
    family around the symmetric split) plus any single-funder point
    equilibria: exclusionary branches when their strict condition holds, and
    corner splits that remain valid but are disconnected from the family by a
    near-corner band that fails participation (possible when d_e > 0).
    """
    _require_return_floor(params)
    if contract is not Contract.COMMON:
        raise UnsupportedModel(
            "no closed form for two large investors under preferred stock; "
            "use the numeric solver"
        )
    t1, t2 = theta
    e, d, mu = params.e, params.d_e, params.mu_alpha
    scenario = _scenario_for(params, Institution.TIL, (t1, t2), contract, BeliefModel.STANDARD)
    lo, hi = _til_interval(params, (t1, t2))
    family = ContinuumFamily(params=params, theta=(t1, t2), i1_lo=lo, i1_hi=hi)

    outcomes = []
    for i, ti in enumerate((t1, t2)):
        corner_i1 = e if i == 0 else 0.0
        inv = [0.0, 0.0]
        sh = [0.0, 0.0]
        inv[i] = e
        if mu * (1.0 - ti) < 2.0 - ti - d * ti / e:
            # Exclusionary branch (strict condition); the corner lies outside
            # the stated continuum condition here.
            sh[i] = (1.0 + (mu - 1.0) * ti - d * ti / e) / mu
            outcomes.append(
                _finalize(scenario, tuple(inv), tuple(sh), f"TIL-Exclusive-{i + 1}")
            )
        elif not (lo - 1e-9 <= corner_i1 <= hi + 1e-9) and _til_point_valid(
            params, (t1, t2), corner_i1
        ):
            sh_pair = _til_shares(params, (t1, t2), corner_i1)
            outcomes.append(
                _finalize(scenario, tuple(inv), sh_pair, f"TIL-Corner-{i + 1}")
            )
    return EquilibriumSet(outcomes=tuple(outcomes), continuum=family)


def corollary_gap(
    params: MarketParams,
    contract: Contract,
    belief: BeliefModel = BeliefModel.STANDARD,
):
    """Entrepreneur-share comparison between one and two investors at equal
    bargaining powers: returns (s_e single, s_e both-invest, gap)."""
    si = solve_si(params, 0.5, contract)
    ti_set = solve_ti(params, (0.5, 0.5), contract, belief)
    both = next(o for o in ti_set.outcomes if o.regime.startswith("TI-BothInvest"))
    s_e_si = si.entrepreneur_share
    s_e_ti = both.entrepreneur_share
    return s_e_si, s_e_ti, s_e_ti - s_e_si


def solve_scenario(scenario: Scenario) -> EquilibriumSet:
    """Dispatch a scenario to the matching closed-form solver."""
    if not scenario.risk.is_neutral:
        raise UnsupportedModel(
            "closed forms assume risk neutrality; use the numeric solver"
        )
    params, theta = scenario.params, scenario.powers.theta
    if scenario.institution is Institution.SI:
        return EquilibriumSet(outcomes=(solve_si(params, theta[0], scenario.contract),))
    if scenario.institution is Institution.TI:
        return solve_ti(params, theta, scenario.contract, scenario.belief)
    if scenario.belief is not BeliefModel.STANDARD:
        raise UnsupportedModel(
            "no closed form for two large investors under the joint belief; "
            "use the numeric solver"
        )
    return solve_til(params, theta, scenario.contract)
