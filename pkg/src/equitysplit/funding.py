"""Funding-round field-data pipeline.

Ingests stage/amount/valuation/investor-count records from CSV with a
line-numbered quarantine for invalid rows, buckets each stage into deciles by
amount, and reports the within-decile Pearson correlation between the number
of investors and the combined investor share.

The combined investor share is operationalized as amount / post-money
valuation; that construction is the only one available from the named fields
and is flagged here deliberately.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import stats as scipy_stats

from .errors import InvalidParameter

__all__ = [
    "Stage",
    "FundingRound",
    "QuarantinedRow",
    "DecileStat",
    "ingest_csv",
    "pearson",
    "decile_correlations",
    "single_investor_rates",
    "stats_to_csv",
]


class Stage(str, Enum):
    PRE_SEED = "pre_seed"
    SEED = "seed"
    SERIES_AB = "series_ab"


_STAGE_ALIASES = {
    "preseed": Stage.PRE_SEED,
    "seed": Stage.SEED,
    "seriesab": Stage.SERIES_AB,
}


def parse_stage(raw: str) -> Stage:
    """Accepts pre_seed/Pre-Seed/preseed, seed, series_ab/Series A/B etc."""
    key = "".join(ch for ch in raw.strip().lower() if ch.isalnum())
    if key in _STAGE_ALIASES:
        return _STAGE_ALIASES[key]
    raise ValueError(f"unknown stage: {raw!r}")


@dataclass(frozen=True)
class FundingRound:
    """One field-data record; the combined investor share amount/valuation
    must land in (0, 1]."""

    stage: Stage
    amount: float
    post_money_valuation: float
    investor_count: int

    def __post_init__(self):
        if self.amount <= 0:
            raise InvalidParameter("amount must be > 0")
        if self.post_money_valuation <= 0:
            raise InvalidParameter("post-money valuation must be > 0")
        if self.investor_count < 1:
            raise InvalidParameter("investor_count must be >= 1")
        if self.amount > self.post_money_valuation:
            raise InvalidParameter("combined investor share above 1")

    @property
    def combined_investor_share(self) -> float:
        return self.amount / self.post_money_valuation


@dataclass(frozen=True)
class QuarantinedRow:
    line: int
    reason: str
    raw: dict


_REQUIRED_COLUMNS = ("stage", "amount", "post_money_valuation", "investor_count")


def ingest_csv(path):
    """Parse rounds from CSV; invalid rows are quarantined with the line
    number and reason, never dropped silently.

    Returns (rounds, quarantine).
    """
    path = Path(path)
    if not path.exists():
        raise InvalidParameter(f"rounds file not found: {path}")
    rounds: list[FundingRound] = []
    quarantine: list[QuarantinedRow] = []
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(_REQUIRED_COLUMNS).issubset(reader.fieldnames):
            raise InvalidParameter(
                f"rounds CSV must have columns {list(_REQUIRED_COLUMNS)}, "
                f"got {reader.fieldnames}"
            )
        for line, row in enumerate(reader, start=2):  # header is line 1
            try:
                stage = parse_stage(row["stage"])
                amount = float(row["amount"])
                valuation = float(row["post_money_valuation"])
                count_raw = float(row["investor_count"])
                count = int(count_raw)
                if count != count_raw:
                    raise ValueError("investor_count must be an integer")
                if valuation <= 0:
                    raise ValueError("nonpositive valuation")
                if amount <= 0:
                    raise ValueError("nonpositive amount")
                if amount > valuation:
                    raise ValueError("share above 1 (amount exceeds valuation)")
                if count < 1:
                    raise ValueError("investor_count below 1")
                rounds.append(FundingRound(stage, amount, valuation, count))
            except (ValueError, InvalidParameter, KeyError, TypeError) as err:
                quarantine.append(QuarantinedRow(line=line, reason=str(err), raw=dict(row)))
    return rounds, quarantine


def pearson(x, y):
    """Pearson r with a two-sided p-value via the t transform
    t = r * sqrt((n - 2) / (1 - r^2)).

    Returns (None, None) when either variable has no variance or n < 3.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 3:
        return None, None
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        return None, None
    r = float(np.dot(dx, dy) / math.sqrt(sxx * syy))
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(scipy_stats.t.sf(abs(t), df=n - 2))
    return r, p


@dataclass(frozen=True)
class DecileStat:
    stage: Stage | None
    decile: int
    n: int
    r: float | None
    p: float | None


def _decile_buckets(amounts: np.ndarray, n_buckets: int) -> list[np.ndarray]:
    """Contiguous rank-based buckets of near-equal size (differing by at most
    one), with whole tie groups on a boundary reassigned to the lower bucket."""
    order = np.argsort(amounts, kind="stable")
    n = len(order)
    base, extra = divmod(n, n_buckets)
    sizes = [base + (1 if k < extra else 0) for k in range(n_buckets)]
    bucket_of = np.empty(n, dtype=int)
    start = 0
    for k, size in enumerate(sizes):
        bucket_of[order[start : start + size]] = k
        start += size
    # Ties spanning a boundary belong to the lower decile.
    sorted_amounts = amounts[order]
    start = 0
    for k, size in enumerate(sizes[:-1]):
        if size == 0:
            continue
        boundary_value = sorted_amounts[start + size - 1]
        j = start + size
        while j < n and sorted_amounts[j] == boundary_value:
            bucket_of[order[j]] = k
            j += 1
        start += size
    return [np.flatnonzero(bucket_of == k) for k in range(n_buckets)]


def decile_correlations(rounds, stage: Stage | None = None, pooled: bool = False):
    """Per-decile (n, r, p) of investor count versus combined share.

    Deciles are taken within the given stage by default; set ``pooled=True``
    to bucket all rounds together regardless of stage. Fewer than 10 rounds
    produce correspondingly fewer (singleton) buckets; buckets with under 3
    points or no variance report an undefined r.
    """
    rounds = list(rounds)
    if pooled:
        subset = rounds
        tag = None
    else:
        if stage is None:
            raise InvalidParameter("stage is required unless pooled=True")
        stage = Stage(stage)
        subset = [rd for rd in rounds if rd.stage is stage]
        tag = stage
    if not subset:
        return []
    amounts = np.array([rd.amount for rd in subset], dtype=float)
    counts = np.array([rd.investor_count for rd in subset], dtype=float)
    shares = np.array([rd.combined_investor_share for rd in subset], dtype=float)
    n_buckets = min(10, len(subset))
    out = []
    for k, idx in enumerate(_decile_buckets(amounts, n_buckets)):
        # canonical within-bucket order makes the statistics exactly
        # independent of the input row order
        order = np.lexsort((shares[idx], counts[idx], amounts[idx]))
        idx = idx[order]
        r, p = pearson(counts[idx], shares[idx])
        out.append(DecileStat(stage=tag, decile=k + 1, n=len(idx), r=r, p=p))
    return out


def single_investor_rates(rounds) -> dict[Stage, float]:
    """Fraction of rounds with exactly one investor, per stage present."""
    totals: dict[Stage, int] = {}
    singles: dict[Stage, int] = {}
    for rd in rounds:
        totals[rd.stage] = totals.get(rd.stage, 0) + 1
        if rd.investor_count == 1:
            singles[rd.stage] = singles.get(rd.stage, 0) + 1
    return {s: singles.get(s, 0) / totals[s] for s in totals}


def stats_to_csv(stats) -> str:
    """Render decile statistics as ``stage,decile,n,r,p`` rows."""
    lines = ["stage,decile,n,r,p"]
    for st in stats:
        stage = st.stage.value if st.stage is not None else "pooled"
        r = "" if st.r is None else repr(st.r)
        p = "" if st.p is None else repr(st.p)
        lines.append(f"{stage},{st.decile},{st.n},{r},{p}")
    return "\n".join(lines)
