"""Core value types for the bargaining model.

Every model symbol lives here as an immutable, validated, JSON-serializable
value: market parameters, bargaining powers, institution/contract/belief tags,
risk preferences, the bundled ``Scenario``, and ``EquilibriumOutcome``.
All types are frozen dataclasses or enums and are safe to share across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .errors import InvalidParameter

__all__ = [
    "Institution",
    "Contract",
    "BeliefModel",
    "ProRating",
    "Arm",
    "MarketParams",
    "BargainingPowers",
    "RiskProfile",
    "Scenario",
    "EquilibriumOutcome",
    "make_preset_scenario",
]


class Institution(str, Enum):
    """Bargaining institution: who sits across the table.

    SI: one investor endowed with the full capital requirement e.
    TI: two small investors endowed with e/2 each (complements).
    TIL: two large investors endowed with e each (substitutes); joint
    investment is still capped at e.
    """

    SI = "si"
    TI = "ti"
    TIL = "til"

    @property
    def n_investors(self) -> int:
        return 1 if self is Institution.SI else 2

    def endowments(self, e: float) -> tuple[float, ...]:
        if self is Institution.SI:
            return (e,)
        if self is Institution.TI:
            return (e / 2.0, e / 2.0)
        return (e, e)


class Contract(str, Enum):
    """Equity class. Preferred carries a liquidation preference with an
    exogenous multiple of 1: investors recover their investment in both
    states before the entrepreneur is paid."""

    COMMON = "common"
    PREFERRED = "preferred"


class BeliefModel(str, Enum):
    """How the entrepreneur's disagreement point versus one investor is formed.

    STANDARD: the other bilateral agreement survives a breakdown, so the
    fallback is the pro-rated outside option plus the profit from that deal.
    JOINT: disagreement with one investor means disagreement with both, so the
    fallback is the bare outside option.
    """

    STANDARD = "standard"
    JOINT = "joint"


class ProRating(str, Enum):
    """Rule for how much of the outside option survives a partial raise.

    LINEAR: d_e * (e - secured) / e.  NONE: full d_e only when nothing at all
    was secured.
    """

    LINEAR = "linear"
    NONE = "none"


class Arm(str, Enum):
    """Preset outside-option environments: POOR has d_e = 0, RICH d_e = 160."""

    POOR = "poor"
    RICH = "rich"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidParameter(msg)


@dataclass(frozen=True)
class MarketParams:
    """Primitives of the financing problem.

    e: capital requirement (points, > 0)
    alpha_h: high-state value multiplier (> 1)
    alpha_l: low-state value multiplier (0 < alpha_l <= 1)
    p: success probability (strictly inside (0, 1))
    d_e: entrepreneur's outside option (>= 0, < mu_alpha * e)
    """

    e: float
    alpha_h: float
    alpha_l: float
    p: float
    d_e: float = 0.0

    def __post_init__(self):
        _require(self.e > 0, f"capital requirement must be > 0, got {self.e}")
        _require(self.alpha_h > 1, f"alpha_h must be > 1, got {self.alpha_h}")
        _require(0 < self.alpha_l <= 1, f"alpha_l must be in (0, 1], got {self.alpha_l}")
        _require(0 < self.p < 1, f"p must be in (0, 1), got {self.p}")
        _require(self.d_e >= 0, f"d_e must be >= 0, got {self.d_e}")
        _require(
            self.d_e < self.mu_alpha * self.e,
            f"d_e = {self.d_e} leaves no gains from trade "
            f"(requires d_e < mu_alpha * e = {self.mu_alpha * self.e})",
        )

    @property
    def mu_alpha(self) -> float:
        """Expected value multiplier p*alpha_h + (1-p)*alpha_l (never stored)."""
        return self.p * self.alpha_h + (1.0 - self.p) * self.alpha_l

    @property
    def meets_return_floor(self) -> bool:
        """True when mu_alpha >= 2, the condition under which the closed-form
        both-invest equilibria are proved to exist."""
        return self.mu_alpha >= 2.0


@dataclass(frozen=True)
class BargainingPowers:
    """Per-investor bargaining powers; the entrepreneur's power against
    investor i is 1 - theta[i] and is never stored."""

    theta: tuple[float, ...]

    def __post_init__(self):
        theta = tuple(float(t) for t in self.theta)
        object.__setattr__(self, "theta", theta)
        _require(len(theta) in (1, 2), "theta must have length 1 or 2")
        for t in theta:
            _require(0.0 <= t <= 1.0, f"bargaining power must be in [0, 1], got {t}")

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def is_interior(self) -> bool:
        return all(0.0 < t < 1.0 for t in self.theta)

    @classmethod
    def equal(cls, n: int, value: float = 0.5) -> "BargainingPowers":
        return cls(theta=(value,) * n)


@dataclass(frozen=True)
class RiskProfile:
    """CRRA exponents, u(x) = x**(1 - rho); rho = 0 is risk neutrality."""

    rho_e: float = 0.0
    rho_i: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        rho_i = tuple(float(r) for r in self.rho_i)
        object.__setattr__(self, "rho_i", rho_i)
        for r in (self.rho_e, *rho_i):
            _require(0.0 <= r < 1.0, f"CRRA exponent must be in [0, 1), got {r}")

    @property
    def is_neutral(self) -> bool:
        return self.rho_e == 0.0 and all(r == 0.0 for r in self.rho_i)

    @classmethod
    def neutral(cls, n: int) -> "RiskProfile":
        return cls(rho_e=0.0, rho_i=(0.0,) * n)


@dataclass(frozen=True)
class Scenario:
    """A complete bargaining problem.

    Bundles market primitives with the institution, contract, per-investor
    bargaining powers, the off-equilibrium belief model, risk preferences and
    the outside-option pro-rating rule for partial raises.
    """

    params: MarketParams
    institution: Institution
    contract: Contract
    powers: BargainingPowers
    belief: BeliefModel = BeliefModel.STANDARD
    risk: RiskProfile | None = None
    prorating: ProRating = ProRating.LINEAR

    def __post_init__(self):
        n = self.institution.n_investors
        if self.risk is None:
            object.__setattr__(self, "risk", RiskProfile.neutral(n))
        _require(
            len(self.powers) == n,
            f"{self.institution.value} needs {n} bargaining power(s), "
            f"got {len(self.powers)}",
        )
        _require(
            len(self.risk.rho_i) == n,
            f"{self.institution.value} needs {n} investor CRRA exponent(s), "
            f"got {len(self.risk.rho_i)}",
        )
        if self.contract is Contract.PREFERRED:
            # The liquidation preference only covers the investment exactly
            # when the low-state multiplier is 1; anything else is undefined.
            _require(
                self.params.alpha_l == 1.0,
                "preferred contracts require alpha_l = 1",
            )

    @property
    def endowments(self) -> tuple[float, ...]:
        return self.institution.endowments(self.params.e)

    @property
    def n_investors(self) -> int:
        return self.institution.n_investors

    def to_dict(self) -> dict:
        return {
            "params": {
                "e": self.params.e,
                "alpha_h": self.params.alpha_h,
                "alpha_l": self.params.alpha_l,
                "p": self.params.p,
                "d_e": self.params.d_e,
            },
            "institution": self.institution.value,
            "contract": self.contract.value,
            "theta": list(self.powers.theta),
            "belief": self.belief.value,
            "rho_e": self.risk.rho_e,
            "rho_i": list(self.risk.rho_i),
            "prorating": self.prorating.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(
            params=MarketParams(**d["params"]),
            institution=Institution(d["institution"]),
            contract=Contract(d["contract"]),
            powers=BargainingPowers(theta=tuple(d["theta"])),
            belief=BeliefModel(d["belief"]),
            risk=RiskProfile(rho_e=d["rho_e"], rho_i=tuple(d["rho_i"])),
            prorating=ProRating(d["prorating"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "Scenario":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class EquilibriumOutcome:
    """One equilibrium: per-investor investments and shares plus expected
    profits, tagged with the regime (branch) that produced it.

    The entrepreneur's share is always the residual 1 - sum(shares); it is a
    derived property so the sum-to-one invariant is structural.
    """

    investments: tuple[float, ...]
    shares: tuple[float, ...]
    expected_profit_e: float
    expected_profit_i: tuple[float, ...]
    regime: str

    def __post_init__(self):
        inv = tuple(float(x) for x in self.investments)
        sh = tuple(float(x) for x in self.shares)
        object.__setattr__(self, "investments", inv)
        object.__setattr__(self, "shares", sh)
        object.__setattr__(self, "expected_profit_i", tuple(self.expected_profit_i))
        _require(len(inv) == len(sh), "investments and shares must align")
        for s in sh:
            _require(-1e-12 <= s <= 1.0 + 1e-12, f"share out of [0, 1]: {s}")
        _require(sum(sh) <= 1.0 + 1e-9, f"investor shares sum above 1: {sum(sh)}")
        for i in inv:
            _require(i >= -1e-9, f"negative investment: {i}")

    @property
    def entrepreneur_share(self) -> float:
        return 1.0 - sum(self.shares)

    def to_dict(self) -> dict:
        return {
            "investments": list(self.investments),
            "shares": list(self.shares),
            "entrepreneur_share": self.entrepreneur_share,
            "expected_profit_e": self.expected_profit_e,
            "expected_profit_i": list(self.expected_profit_i),
            "regime": self.regime,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EquilibriumOutcome":
        return cls(
            investments=tuple(d["investments"]),
            shares=tuple(d["shares"]),
            expected_profit_e=d["expected_profit_e"],
            expected_profit_i=tuple(d["expected_profit_i"]),
            regime=d["regime"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "EquilibriumOutcome":
        return cls.from_dict(json.loads(s))


# Benchmark parameterization: e = 200, (alpha_h, alpha_l, p) = (11, 1, 0.2),
# equal powers, d_e = 0 (poor) or 160 (rich).
_PRESET_E = 200.0
_PRESET_ALPHA_H = 11.0
_PRESET_ALPHA_L = 1.0
_PRESET_P = 0.2
_PRESET_D_E = {Arm.POOR: 0.0, Arm.RICH: 160.0}


def make_preset_scenario(
    arm: Arm | str,
    institution: Institution | str,
    contract: Contract | str,
) -> Scenario:
    """Benchmark scenario for one (arm, institution, contract) cell.

    Equal bargaining powers of 1/2, standard belief, risk neutral.
    """
    arm = Arm(arm)
    institution = Institution(institution)
    contract = Contract(contract)
    params = MarketParams(
        e=_PRESET_E,
        alpha_h=_PRESET_ALPHA_H,
        alpha_l=_PRESET_ALPHA_L,
        p=_PRESET_P,
        d_e=_PRESET_D_E[arm],
    )
    n = institution.n_investors
    return Scenario(
        params=params,
        institution=institution,
        contract=contract,
        powers=BargainingPowers.equal(n),
    )
