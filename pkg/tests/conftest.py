"""Shared fixtures: preset scenario grid, a fast solver config, and the
random-scenario sampler used by the oracle-equivalence and property tests."""
from __future__ import annotations

import numpy as np
import pytest

from equitysplit import (
    Arm,
    BargainingPowers,
    BeliefModel,
    Contract,
    Institution,
    MarketParams,
    ModelDomainError,
    RiskProfile,
    Scenario,
    SolverConfig,
    solve_scenario,
)

# Tighter grids than the default keep the numeric oracle fast without
# sacrificing the 1e-6 comparison tolerance (golden section + parabolic
# polish do the real work).
FAST_CONFIG = SolverConfig(grid_points=201, damping=0.8)


@pytest.fixture(scope="session")
def fast_config():
    return FAST_CONFIG


def random_market_params(rng: np.random.Generator, contract: Contract, d_e_max_frac=0.5):
    """Valid parameters with mu_alpha in [2, 6] and enough surplus that every
    bilateral pair strictly gains at the sampled outside option."""
    e = float(rng.uniform(50.0, 500.0))
    p = float(rng.uniform(0.1, 0.9))
    alpha_l = 1.0 if contract is Contract.PREFERRED else float(rng.uniform(0.2, 1.0))
    mu = float(rng.uniform(2.0, 6.0))
    alpha_h = (mu - (1.0 - p) * alpha_l) / p
    d_e = float(rng.uniform(0.0, d_e_max_frac)) * e * (mu - 1.0)
    return MarketParams(e=e, alpha_h=alpha_h, alpha_l=alpha_l, p=p, d_e=d_e)


def random_scenario(
    rng: np.random.Generator,
    institution: Institution,
    contract: Contract,
    belief: BeliefModel = BeliefModel.STANDARD,
    equal_powers: bool = False,
    require_closed_form: bool = True,
) -> Scenario:
    """Sample a valid scenario; when ``require_closed_form`` is set, resample
    until the closed-form solver accepts it (all existence conditions and
    gains-from-trade checks pass)."""
    n = institution.n_investors
    for _ in range(200):
        params = random_market_params(rng, contract)
        if equal_powers:
            powers = BargainingPowers.equal(n)
        else:
            powers = BargainingPowers(
                theta=tuple(float(rng.uniform(0.15, 0.85)) for _ in range(n))
            )
        scenario = Scenario(
            params=params,
            institution=institution,
            contract=contract,
            powers=powers,
            belief=belief,
        )
        if not require_closed_form:
            return scenario
        try:
            result = solve_scenario(scenario)
        except ModelDomainError:
            continue
        if institution is Institution.TIL:
            return scenario
        if any(o.regime.startswith(("SI", "TI-BothInvest")) for o in result.outcomes):
            return scenario
    raise RuntimeError("could not sample a valid scenario in 200 draws")


PRESET_CELLS = [
    (arm, institution, contract)
    for arm in (Arm.POOR, Arm.RICH)
    for institution in (Institution.SI, Institution.TI)
    for contract in (Contract.COMMON, Contract.PREFERRED)
]


def neutral_risk(institution: Institution) -> RiskProfile:
    return RiskProfile.neutral(institution.n_investors)
