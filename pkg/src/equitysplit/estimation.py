"""Fitting bargaining powers to observed entrepreneur shares.

Predictions come from the closed forms (both-invest branch for two
investors); the fit minimizes weighted mean squared error over theta in
[0, 1] by grid bracketing plus golden-section refinement, with ties broken
toward the lower power. Three model variants are compared: equal powers
(theta fixed at 1/2), fitted powers under the standard belief, and fitted
powers under the joint-disagreement belief.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import closed_form
from .errors import DegenerateData, InvalidParameter
from .types import Arm, BeliefModel, Contract, Institution, Scenario, make_preset_scenario

__all__ = [
    "ModelTag",
    "ShareObservation",
    "FitResult",
    "predict_share",
    "fit_theta",
    "compare_models",
    "read_observations_csv",
]


class ModelTag(str, Enum):
    ORIGINAL = "original"
    REVISED_I = "revised_i"
    REVISED_II = "revised_ii"


@dataclass(frozen=True)
class ShareObservation:
    """One observed outcome: the scenario cell and the entrepreneur's share."""

    institution: Institution
    contract: Contract
    arm: Arm
    share: float
    weight: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.share <= 1.0):
            raise InvalidParameter(f"observed share must be in [0, 1], got {self.share}")
        if self.weight <= 0.0:
            raise InvalidParameter("observation weight must be positive")

    @property
    def scenario_key(self):
        return (self.institution, self.contract, self.arm)


@dataclass(frozen=True)
class FitResult:
    """Fitted power(s) with the achieved weighted MSE and residuals
    (predicted minus observed, in share fractions)."""

    theta_hat: tuple[float, ...]
    mse: float
    model_tag: ModelTag
    residuals: tuple[float, ...]


def predict_share(scenario: Scenario, theta, belief: BeliefModel) -> float:
    """Entrepreneur-share prediction at the given power(s) and belief.

    ``theta`` is a scalar applied to every investor or a per-investor tuple.
    Two-investor predictions use the both-invest branch.
    """
    if isinstance(theta, (int, float)):
        theta = (float(theta),) * scenario.n_investors
    if scenario.institution is Institution.SI:
        out = closed_form.solve_si(scenario.params, theta[0], scenario.contract)
        return out.entrepreneur_share
    result = closed_form.solve_ti(scenario.params, theta, scenario.contract, belief)
    both = next(
        (o for o in result.outcomes if o.regime.startswith("TI-BothInvest")), None
    )
    if both is None:
        raise DegenerateData(
            "no both-invest equilibrium exists at these powers; cannot predict"
        )
    return both.entrepreneur_share


def _belief_for(model_tag: ModelTag) -> BeliefModel:
    return BeliefModel.JOINT if model_tag is ModelTag.REVISED_II else BeliefModel.STANDARD


def _weighted_mse_fn(observations, belief):
    """Build theta -> (mse, residuals); predictions cached per scenario cell."""
    keys = sorted({o.scenario_key for o in observations}, key=lambda k: tuple(x.value for x in k))
    scenarios = {k: make_preset_scenario(k[2], k[0], k[1]) for k in keys}
    total_w = sum(o.weight for o in observations)

    def evaluate(theta: float):
        preds = {k: predict_share(scenarios[k], theta, belief) for k in keys}
        residuals = tuple(preds[o.scenario_key] - o.share for o in observations)
        mse = sum(w * r * r for w, r in zip((o.weight for o in observations), residuals))
        return mse / total_w, residuals

    return evaluate


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a: float, b: float, tol: float = 1e-9) -> float:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _fit_scalar(objective) -> float:
    """Minimize a smooth objective over [0, 1]; ties go to the lower theta."""
    n = 65
    grid = [k / (n - 1) for k in range(n)]
    vals = [objective(t) for t in grid]
    k = min(range(n), key=lambda j: (vals[j], grid[j]))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, n - 1)]
    refined = _golden_min(objective, a, b)
    candidates = [refined, grid[k], 0.0, 0.5, 1.0]
    best = min(candidates, key=lambda t: (objective(t), t))
    return min(max(best, 0.0), 1.0)


def fit_theta(
    observations,
    model_tag: ModelTag,
    common_theta: bool = True,
) -> FitResult:
    """Estimate bargaining power(s) by MSE minimization.

    All observations must share one institution. The original model keeps
    theta at 1/2; the revised models fit it, under the standard belief
    (revised i) or the joint-disagreement belief for two investors
    (revised ii). ``common_theta=False`` fits the two investors' powers
    separately by coordinate descent; note that the entrepreneur share alone
    identifies the pair only up to a one-dimensional ridge of equally good
    fits, so prefer the common-power default unless per-investor data exist.
    """
    observations = list(observations)
    if not observations:
        raise DegenerateData("cannot fit bargaining power to zero observations")
    institutions = {o.institution for o in observations}
    if len(institutions) != 1:
        raise DegenerateData(
            f"one fit covers one institution; got {sorted(i.value for i in institutions)}"
        )
    institution = institutions.pop()
    belief = _belief_for(model_tag)
    n_inv = institution.n_investors
    evaluate = _weighted_mse_fn(observations, belief)

    if model_tag is ModelTag.ORIGINAL:
        mse, residuals = evaluate(0.5)
        return FitResult(
            theta_hat=(0.5,) * n_inv, mse=mse, model_tag=model_tag, residuals=residuals
        )

    if common_theta or n_inv == 1:
        theta_hat = _fit_scalar(lambda t: evaluate(t)[0])
        mse, residuals = evaluate(theta_hat)
        return FitResult(
            theta_hat=(theta_hat,) * n_inv,
            mse=mse,
            model_tag=model_tag,
            residuals=residuals,
        )

    # Per-investor powers: coordinate descent with the same 1-D machinery.
    keys = sorted({o.scenario_key for o in observations}, key=lambda k: tuple(x.value for x in k))
    scenarios = {k: make_preset_scenario(k[2], k[0], k[1]) for k in keys}
    total_w = sum(o.weight for o in observations)

    def evaluate_pair(t1, t2):
        preds = {k: predict_share(scenarios[k], (t1, t2), belief) for k in keys}
        residuals = tuple(preds[o.scenario_key] - o.share for o in observations)
        mse = sum(o.weight * r * r for o, r in zip(observations, residuals))
        return mse / total_w, residuals

    t1 = t2 = 0.5
    for _ in range(60):
        new_t1 = _fit_scalar(lambda t: evaluate_pair(t, t2)[0])
        new_t2 = _fit_scalar(lambda t: evaluate_pair(new_t1, t)[0])
        if abs(new_t1 - t1) < 1e-7 and abs(new_t2 - t2) < 1e-7:
            t1, t2 = new_t1, new_t2
            break
        t1, t2 = new_t1, new_t2
    mse, residuals = evaluate_pair(t1, t2)
    return FitResult(theta_hat=(t1, t2), mse=mse, model_tag=model_tag, residuals=residuals)


def compare_models(observations) -> dict[Institution, dict[ModelTag, FitResult]]:
    """Fit all three model variants per institution present in the data.

    Institutions without observations get no row. For one investor the two
    revised variants coincide because there is no partial-disagreement belief
    to vary; both rows are still reported.
    """
    observations = list(observations)
    table: dict[Institution, dict[ModelTag, FitResult]] = {}
    for institution in (Institution.SI, Institution.TI, Institution.TIL):
        subset = [o for o in observations if o.institution is institution]
        if not subset:
            continue
        table[institution] = {
            tag: fit_theta(subset, tag) for tag in ModelTag
        }
    return table


def read_observations_csv(path) -> list[ShareObservation]:
    """Load observations from a CSV with header institution,contract,arm,share."""
    path = Path(path)
    if not path.exists():
        raise InvalidParameter(f"observations file not found: {path}")
    required = {"institution", "contract", "arm", "share"}
    out = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
            raise InvalidParameter(
                f"observations CSV must have columns {sorted(required)}, "
                f"got {reader.fieldnames}"
            )
        for row in reader:
            out.append(
                ShareObservation(
                    institution=Institution(row["institution"].strip().lower()),
                    contract=Contract(row["contract"].strip().lower()),
                    arm=Arm(row["arm"].strip().lower()),
                    share=float(row["share"]),
                    weight=float(row["weight"]) if row.get("weight") else 1.0,
                )
            )
    return out
