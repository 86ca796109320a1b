"""Typed error hierarchy shared by all solver and pipeline modules."""


class EquitySplitError(Exception):
    """Base class for every error raised by this package."""


class ModelDomainError(EquitySplitError):
    """The request is outside the model's domain (bad parameters, infeasible
    allocations, missing closed forms). CLI maps these to exit code 3."""


class InvalidParameter(ModelDomainError):
    """A constructor argument violates a documented invariant."""


class AssumptionViolated(ModelDomainError):
    """The expected investment multiplier is below 2, so the closed-form
    equilibria are not available for this scenario."""


class InfeasibleAllocation(ModelDomainError):
    """Shares or investments violate the feasibility constraints."""


class UtilityDomainViolation(ModelDomainError):
    """A risk-averse utility was requested on a negative payoff."""


class UnsupportedModel(ModelDomainError):
    """No closed form exists for this institution/contract combination."""


class NoGainsFromTrade(ModelDomainError):
    """Every candidate equilibrium leaves some party below its disagreement
    point; the bargaining problem has no solution with weakly positive gains."""


class DegenerateData(ModelDomainError):
    """A statistical routine received data it cannot identify anything from
    (empty sample, zero-variance regressor, rank-deficient design)."""


class NumericError(EquitySplitError):
    """A numerical routine failed. CLI maps these to exit code 4."""


class NonFiniteObjective(NumericError):
    """The Nash-product objective evaluated to NaN or infinity."""


class MaxIterationsExceeded(NumericError):
    """The best-response fixed point did not converge.

    Carries ``trace``, the last few iterates as (investments, shares) pairs,
    for diagnosis.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)
