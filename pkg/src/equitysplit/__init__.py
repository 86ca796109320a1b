"""Nash and Nash-in-Nash bargaining equilibria for entrepreneur-investor
equity negotiations: closed forms, a numerical solver, bargaining-power
estimation, a seeded negotiation-protocol simulator and a funding-round
analysis pipeline."""

from .closed_form import (
    ContinuumFamily,
    EquilibriumSet,
    corollary_gap,
    solve_scenario,
    solve_si,
    solve_ti,
    solve_til,
)
from .errors import (
    AssumptionViolated,
    DegenerateData,
    EquitySplitError,
    InfeasibleAllocation,
    InvalidParameter,
    MaxIterationsExceeded,
    ModelDomainError,
    NoGainsFromTrade,
    NonFiniteObjective,
    NumericError,
    UnsupportedModel,
    UtilityDomainViolation,
)
from .numeric import (
    NO_DEAL,
    Interval,
    SolverConfig,
    maximize_nash_product,
    solve_nash_in_nash,
    solve_numeric,
    solve_risk_averse,
)
from .types import (
    Arm,
    BargainingPowers,
    BeliefModel,
    Contract,
    EquilibriumOutcome,
    Institution,
    MarketParams,
    ProRating,
    RiskProfile,
    Scenario,
    make_preset_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Arm",
    "AssumptionViolated",
    "BargainingPowers",
    "BeliefModel",
    "ContinuumFamily",
    "Contract",
    "DegenerateData",
    "EquilibriumOutcome",
    "EquilibriumSet",
    "EquitySplitError",
    "InfeasibleAllocation",
    "Institution",
    "Interval",
    "InvalidParameter",
    "MarketParams",
    "MaxIterationsExceeded",
    "ModelDomainError",
    "NO_DEAL",
    "NoGainsFromTrade",
    "NonFiniteObjective",
    "NumericError",
    "ProRating",
    "RiskProfile",
    "Scenario",
    "SolverConfig",
    "UnsupportedModel",
    "UtilityDomainViolation",
    "corollary_gap",
    "make_preset_scenario",
    "maximize_nash_product",
    "solve_nash_in_nash",
    "solve_numeric",
    "solve_risk_averse",
    "solve_scenario",
    "solve_si",
    "solve_ti",
    "solve_til",
    "__version__",
]
