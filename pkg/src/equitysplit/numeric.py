"""Numerical Nash-product maximization and best-response fixed points.

This module never uses the analytic share formulas: each bilateral problem is
solved by log-domain grid bracketing plus golden-section search, and
multi-investor outcomes come from damped best-response iteration over the
bilateral deals. It is the independent cross-check for the closed forms and
the only solver for risk-averse preferences and for two large investors under
preferred stock.

Gains are measured in utility space, u(x) = x**(1 - rho); with all exponents
zero this reduces exactly to expected-profit gains.
"""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

from . import payoffs
from .errors import (
    InvalidParameter,
    MaxIterationsExceeded,
    NonFiniteObjective,
    NumericError,
)
from .types import (
    BeliefModel,
    Contract,
    EquilibriumOutcome,
    Institution,
    RiskProfile,
    Scenario,
)

__all__ = [
    "SolverConfig",
    "Interval",
    "NO_DEAL",
    "NoDeal",
    "maximize_nash_product",
    "solve_nash_in_nash",
    "solve_risk_averse",
    "solve_numeric",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_NEG_INF = float("-inf")
_FEAS_TOL = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Tunable solver knobs.

    share_tol: fixed-point convergence threshold on share vectors.
    max_iterations: best-response sweep cap.
    damping: best-response step factor in (0, 1].
    grid_points: share-grid resolution used to bracket the 1-D maximizer.
    investment_grid_points: grid resolution per investment zoom round.
    clamp_eps: floor applied to gains inside the log line search only.
    """

    share_tol: float = 1e-10
    max_iterations: int = 10_000
    damping: float = 0.5
    grid_points: int = 2001
    investment_grid_points: int = 17
    clamp_eps: float = 1e-14

    def __post_init__(self):
        if self.share_tol <= 0 or self.clamp_eps <= 0:
            raise InvalidParameter("tolerances must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise InvalidParameter("damping must be in (0, 1]")
        if self.grid_points < 3 or self.investment_grid_points < 3:
            raise InvalidParameter("grids need at least 3 points")


Interval = namedtuple("Interval", ["lo", "hi"])


class NoDeal:
    """Sentinel: the feasible region with nonnegative gains is empty."""

    def __repr__(self):  # pragma: no cover
        return "NO_DEAL"


NO_DEAL = NoDeal()


def _log_product(gains, theta: float, eps: float) -> float:
    g_i, g_e = gains
    if not (math.isfinite(g_i) and math.isfinite(g_e)):
        raise NonFiniteObjective(f"gains evaluated to ({g_i}, {g_e})")
    if g_i < -_FEAS_TOL or g_e < -_FEAS_TOL:
        return _NEG_INF
    out = 0.0
    if theta > 0.0:
        out += theta * math.log(g_i if g_i > eps else eps)
    if theta < 1.0:
        out += (1.0 - theta) * math.log(g_e if g_e > eps else eps)
    return out


def _best_share(pair_fn, inv, theta, lo, hi, config, coarse=False):
    """Maximize the log Nash product over shares in [lo, hi] for a fixed
    investment. Returns (share, value) or None if nothing is feasible."""
    if hi < lo:
        return None
    eps = config.clamp_eps

    def obj(s):
        return _log_product(pair_fn(inv, s), theta, eps)

    if hi == lo:
        v = obj(lo)
        return None if v == _NEG_INF else (lo, v)
    n = 65 if coarse else config.grid_points
    step = (hi - lo) / (n - 1)
    best_k, best_v = 0, _NEG_INF
    for k in range(n):
        v = obj(lo + k * step)
        if v > best_v:
            best_k, best_v = k, v
    if best_v == _NEG_INF:
        return None
    a = lo + max(best_k - 1, 0) * step
    b = lo + min(best_k + 1, n - 1) * step
    tol = (hi - lo) * (1e-5 if coarse else 1e-8) + 1e-16
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = obj(c), obj(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = obj(d)
    s = 0.5 * (a + b)
    v = obj(s)
    if best_v > v:  # keep the grid point if refinement did not help
        s, v = lo + best_k * step, best_v
    if not coarse:
        # The objective is flat to float precision near the maximizer, which
        # caps golden-section accuracy around sqrt(eps); polish with successive
        # parabolic vertex fits to pin the argmax itself.
        h = max(b - a, (hi - lo) * 1e-6)
        for _ in range(5):
            x_m, x_p = max(s - h, lo), min(s + h, hi)
            f_m, f_p = obj(x_m), obj(x_p)
            if f_m == _NEG_INF or f_p == _NEG_INF:
                h /= 64.0
                continue
            denom = f_p - 2.0 * v + f_m
            if denom >= 0.0 or not math.isfinite(denom):
                break
            step_to_vertex = -h * (f_p - f_m) / (2.0 * denom)
            x_new = min(max(s + step_to_vertex, lo), hi)
            v_new = obj(x_new)
            if v_new >= v:
                s, v = x_new, v_new
            h /= 64.0
    return s, v


_TIE_EPS = 1e-11


def maximize_nash_product(
    objective_pair,
    theta: float,
    feasible_share_interval,
    feasible_investment_set,
    config: SolverConfig | None = None,
):
    """Maximize (gain_i)**theta * (gain_e)**(1-theta) over feasible points.

    ``objective_pair(I, s)`` returns the two gains; both must be nonnegative
    at a feasible point. The investment set is either an ``Interval`` (solved
    by zoomed grids with exact endpoints) or an iterable of candidate levels
    (exhaustive comparison). Ties in the objective go to the larger
    investment. Returns (I, s) or NO_DEAL when no candidate is feasible.
    """
    config = config or SolverConfig()
    s_lo, s_hi = feasible_share_interval

    def better(val, inv, best):
        if best is None:
            return True
        bv, bi, _ = best
        if val > bv + _TIE_EPS:
            return True
        return val >= bv - _TIE_EPS and inv > bi

    best = None
    if isinstance(feasible_investment_set, Interval):
        ilo, ihi = feasible_investment_set
        if ihi < ilo:
            raise InvalidParameter(f"empty investment interval [{ilo}, {ihi}]")
        prev_best_i = None
        for _ in range(200):
            n = config.investment_grid_points
            step = (ihi - ilo) / (n - 1) if ihi > ilo else 0.0
            grid = [ilo + k * step for k in range(n)] if step else [ilo]
            grid[-1] = ihi
            round_best = None
            for inv in grid:
                res = _best_share(objective_pair, inv, theta, s_lo, s_hi, config, coarse=True)
                if res is None:
                    continue
                s, v = res
                if better(v, inv, round_best):
                    round_best = (v, inv, s)
            if round_best is None:
                return NO_DEAL
            _, b_inv, _ = round_best
            k = min(range(len(grid)), key=lambda j: abs(grid[j] - b_inv))
            ilo = grid[max(k - 1, 0)]
            ihi = grid[min(k + 1, len(grid) - 1)]
            if (ihi - ilo) < 1e-9 * (1.0 + abs(b_inv)) or b_inv == prev_best_i:
                best_inv = b_inv
                break
            prev_best_i = b_inv
        else:  # pragma: no cover - zoom always terminates far earlier
            raise NumericError("investment zoom failed to converge")
        res = _best_share(objective_pair, best_inv, theta, s_lo, s_hi, config)
        if res is None:
            return NO_DEAL
        return best_inv, res[0]

    for inv in sorted(feasible_investment_set):
        res = _best_share(objective_pair, inv, theta, s_lo, s_hi, config)
        if res is None:
            continue
        s, v = res
        if better(v, inv, best):
            best = (v, inv, s)
    if best is None:
        return NO_DEAL
    _, b_inv, b_s = best
    return b_inv, b_s


def _u(x: float, rho: float) -> float:
    if rho == 0.0:
        return x
    return (x if x > 0.0 else 0.0) ** (1.0 - rho)


def _bilateral_gains(scenario: Scenario, risk: RiskProfile, i: int, deals):
    """Build a fast (I, s) -> (gain_i, gain_e) closure for bilateral deal i.

    The entrepreneur's side uses pure deal payoffs (no outside-option term);
    the fallback is belief-consistent: under the standard belief it is the
    pro-rated outside option plus the payoff of the counterpart deal, under
    the joint belief the bare outside option.
    """
    params = scenario.params
    p, a_h, a_l = params.p, params.alpha_h, params.alpha_l
    endow_i = scenario.endowments[i]
    rho_e, rho_i = risk.rho_e, risk.rho_i[i]
    preferred = scenario.contract is Contract.PREFERRED

    if scenario.n_investors == 1:
        i_j, s_j = 0.0, 0.0
    else:
        i_j, s_j = deals[1 - i]

    d_i_u = _u(endow_i, rho_i)
    if scenario.n_investors == 1 or scenario.belief is BeliefModel.JOINT:
        d_e_u = _u(params.d_e, rho_e)
    else:
        base = payoffs.prorated_outside_option(scenario, i_j)
        if i_j == 0.0:
            solo_h = solo_l = 0.0
        elif preferred:
            solo_h = a_h * i_j - max(a_h * i_j * s_j, i_j)
            solo_l = 0.0
        else:
            solo_h = a_h * i_j * (1.0 - s_j)
            solo_l = a_l * i_j * (1.0 - s_j)
        d_e_u = p * _u(base + solo_h, rho_e) + (1.0 - p) * _u(base + solo_l, rho_e)

    def state_payoffs(inv, s, alpha):
        total = inv + i_j
        if total == 0.0:
            return 0.0, endow_i
        v = alpha * total
        if not preferred:
            return (1.0 - s - s_j) * v, s * v + endow_i - inv
        c_own = max(v * s - max(i_j - v * (1.0 - s), 0.0), inv)
        c_other = max(v * s_j - max(inv - v * (1.0 - s_j), 0.0), i_j)
        ent = v - c_own - c_other
        return (ent if ent > 0.0 else 0.0), c_own + endow_i - inv

    def pair(inv, s):
        ent_h, own_h = state_payoffs(inv, s, a_h)
        ent_l, own_l = state_payoffs(inv, s, a_l)
        u_e = p * _u(ent_h, rho_e) + (1.0 - p) * _u(ent_l, rho_e)
        u_i = p * _u(own_h, rho_i) + (1.0 - p) * _u(own_l, rho_i)
        return u_i - d_i_u, u_e - d_e_u

    return pair


def _investment_set(scenario, i, deals, full_investment):
    e = scenario.params.e
    endow_i = scenario.endowments[i]
    if scenario.institution is Institution.TIL:
        cap = min(endow_i, e - deals[1 - i][0])
        return (cap,) if full_investment else Interval(0.0, cap)
    if scenario.institution is Institution.TI:
        return (endow_i,) if full_investment else (0.0, endow_i)
    return (endow_i,) if full_investment else Interval(0.0, endow_i)


def _outcome_from_deals(scenario, deals, regime):
    investments = tuple(d[0] for d in deals)
    shares = tuple(d[1] for d in deals)
    payoffs.check_feasible(scenario, investments, shares)
    if sum(investments) > 0.0:
        payoffs.check_claim_coverage(scenario, investments, shares)
    pi_e, pi_i = payoffs.expected_profits(scenario, investments, shares)
    return EquilibriumOutcome(
        investments=investments,
        shares=shares,
        expected_profit_e=pi_e,
        expected_profit_i=tuple(pi_i),
        regime=regime,
    )


def solve_nash_in_nash(
    scenario: Scenario,
    risk_profile: RiskProfile | None = None,
    config: SolverConfig | None = None,
    full_investment: bool = False,
) -> EquilibriumOutcome:
    """Damped best-response iteration over the two bilateral deals.

    Each sweep re-solves both bilateral Nash products holding the counterpart
    deal fixed, with belief-consistent disagreement points; shares move by
    the damping step factor, investments jump to the best response. Converged
    when successive share vectors differ by less than share_tol and
    investments are unchanged.
    """
    if scenario.institution is Institution.SI:
        raise InvalidParameter("fixed point applies to two-investor institutions")
    risk = risk_profile if risk_profile is not None else scenario.risk
    config = config or SolverConfig()
    e = scenario.params.e
    theta = scenario.powers.theta
    start = e / 2.0 if scenario.institution is Institution.TIL else scenario.endowments[0]
    deals = [[start, 0.0], [start, 0.0]]

    trace: list = []
    deltas: list = []
    for it in range(config.max_iterations):
        prev = [tuple(d) for d in deals]
        for i in (0, 1):
            pair = _bilateral_gains(scenario, risk, i, deals)
            s_cap = 1.0 - deals[1 - i][1]
            inv_set = _investment_set(scenario, i, deals, full_investment)
            res = maximize_nash_product(pair, theta[i], (0.0, max(s_cap, 0.0)), inv_set, config)
            if res is NO_DEAL:
                deals[i][0] = 0.0
                deals[i][1] = 0.0
                continue
            new_i, new_s = res
            deals[i][0] = new_i
            deals[i][1] = deals[i][1] + config.damping * (new_s - deals[i][1])
        delta = max(abs(deals[k][1] - prev[k][1]) for k in (0, 1))
        inv_stable = all(deals[k][0] == prev[k][0] for k in (0, 1))
        trace.append((tuple(d[0] for d in deals), tuple(d[1] for d in deals)))
        if len(trace) > 10:
            trace.pop(0)
        deltas.append(delta)
        if inv_stable and delta < config.share_tol:
            if sum(d[0] for d in deals) == 0.0:
                return _outcome_from_deals(scenario, deals, "Numeric-NoDeal")
            return _outcome_from_deals(scenario, deals, "Numeric")
        if (
            it > 30
            and delta > max(1e-6, 10.0 * config.share_tol)
            and deltas[-1] > deltas[-16]
            and deltas[-8] > deltas[-16]
        ):
            raise NumericError(
                f"best-response iteration is not contracting (delta {delta:.3e} "
                f"after {it + 1} sweeps)"
            )
    raise MaxIterationsExceeded(
        f"no fixed point within {config.max_iterations} sweeps", trace=trace
    )


def _solve_single(scenario, risk, config, full_investment):
    pair = _bilateral_gains(scenario, risk, 0, [(0.0, 0.0), (0.0, 0.0)])
    inv_set = _investment_set(scenario, 0, [(0.0, 0.0), (0.0, 0.0)], full_investment)
    res = maximize_nash_product(
        pair, scenario.powers.theta[0], (0.0, 1.0), inv_set, config or SolverConfig()
    )
    if res is NO_DEAL:
        return _outcome_from_deals(scenario, [[0.0, 0.0]], "Numeric-NoDeal")
    inv, s = res
    return _outcome_from_deals(scenario, [[inv, s]], "Numeric")


def solve_numeric(
    scenario: Scenario,
    risk_profile: RiskProfile | None = None,
    config: SolverConfig | None = None,
    full_investment: bool = False,
) -> EquilibriumOutcome:
    """Solve any scenario numerically: a single Nash-product maximization for
    one investor, the Nash-in-Nash fixed point otherwise."""
    risk = risk_profile if risk_profile is not None else scenario.risk
    if scenario.institution is Institution.SI:
        return _solve_single(scenario, risk, config, full_investment)
    return solve_nash_in_nash(scenario, risk, config, full_investment)


def solve_risk_averse(
    scenario: Scenario,
    risk_profile: RiskProfile,
    config: SolverConfig | None = None,
    full_investment: bool = True,
) -> EquilibriumOutcome:
    """Nash(-in-Nash) solution with CRRA utility gains replacing profit gains.

    By default investments are pinned to the endowments (the setting in which
    the risk-aversion comparisons are defined); pass full_investment=False to
    optimize the investment levels jointly.
    """
    return solve_numeric(scenario, risk_profile, config, full_investment)
