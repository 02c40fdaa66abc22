"""Two-asset (underlying + cash) risk-control index engines.

``run_hsrai`` re-levers every observation against the previous level and
accrues cash ACT/365. ``run_sprci`` measures the risky leg from the level at
the last rebalance and compounds ACT/360 cash accruals across the period,
either at a quoted rate or as a rolling 3-month deposit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from datetime import date
from typing import Literal, Union

import numpy as np

from ..errors import EnginePreconditionError, InputValidationError, NumericError
from ..moments import VolRecipe, realized_vol_path
from ..series import LevelSeries, RateSeries
from .leverage import LeverageParams, LeverageSchedule, leverage_hsrai, leverage_sprci

Rates = Union[RateSeries, float]
Accrual = Literal["simple-rate", "roll-3m"]

ROLL_DAYS = 30


@dataclass(frozen=True)
class RiskControlSeries:
    """Index levels plus the per-step split into risky and cash legs.

    ``risky[k]`` and ``cash[k]`` belong to the step ending at ``dates[k+1]``
    and satisfy ``levels[k+1] / levels[k] - 1 == risky[k] + cash[k]`` up to
    rounding.
    """

    engine: str
    dates: tuple[date, ...]
    levels: np.ndarray
    risky: np.ndarray
    cash: np.ndarray
    leverage: np.ndarray
    schedule: LeverageSchedule
    params: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.dates)

    def as_level_series(self) -> LevelSeries:
        return LevelSeries(self.dates, self.levels, self.engine)

    def step_returns(self) -> np.ndarray:
        return self.levels[1:] / self.levels[:-1] - 1.0

    def decomposition_residual(self) -> float:
        """Largest ``|step return - (risky + cash)|`` over all steps."""
        if len(self.risky) == 0:
            return 0.0
        return float(np.max(np.abs(self.step_returns() - (self.risky + self.cash))))

    def to_records(self) -> list[dict]:
        out = [{"date": self.dates[0].isoformat(), "level": float(self.levels[0]),
                "lf": None, "risky": None, "cash": None}]
        for k in range(len(self.risky)):
            out.append({
                "date": self.dates[k + 1].isoformat(),
                "level": float(self.levels[k + 1]),
                "lf": float(self.leverage[k]),
                "risky": float(self.risky[k]),
                "cash": float(self.cash[k]),
            })
        return out


def _rate_lookup(rates: Rates | None, label: str):
    if rates is None:
        raise EnginePreconditionError(f"{label} series is required")
    if isinstance(rates, RateSeries):
        return rates.rate_on
    r = float(rates)
    return lambda _when: r


def _first_rebalance(rv: np.ndarray, lag: int, offset: int, n_levels: int, engine: str) -> int:
    """Earliest observation whose lagged volatility reading exists."""
    finite = np.flatnonzero(np.isfinite(rv))
    if finite.size:
        s = max(int(finite[0]) + lag - offset, 0)
        if s <= n_levels - 2:
            return s
    raise EnginePreconditionError(
        f"{engine}: not enough history to seed realized volatility "
        f"({n_levels} levels, lag {lag})"
    )


def _lf_from_rv(rule, rv: float, cap: float, engine: str) -> float:
    if rv == 0.0:
        # tv/rv -> +inf, so the cap binds
        if math.isinf(cap):
            raise NumericError(f"{engine}: zero realized volatility with an uncapped leverage factor")
        return float(cap)
    return float(rule(rv))


def run_hsrai(
    underlying: LevelSeries,
    rates: Rates,
    p: LeverageParams,
    vol: VolRecipe = VolRecipe(),
    rebalance_every: int = 1,
    base: float = 100.0,
) -> RiskControlSeries:
    """Cash/underlying index with capped and floored leverage.

    Each step ``t-1 -> t`` earns ``LF * (B_t/B_{t-1} - 1)`` on the risky leg
    and ``(1 - LF) * r_{t-1}/365 * D`` on cash, ``D`` being the calendar days
    between the two observations. Leverage is refreshed on every
    ``rebalance_every``-th step from the volatility reading ``p.lag``
    observations before the step's end date, and held in between.

    Raises:
        EnginePreconditionError: too little history for the first volatility
            reading, or a rate missing for a needed date (the message names it).
    """
    if rebalance_every < 1:
        raise InputValidationError("rebalance_every must be >= 1")
    rate_on = _rate_lookup(rates, "rate")
    B, dates = underlying.levels, underlying.dates
    rv_path = realized_vol_path(underlying, vol)
    # the first step ends at s+1 and reads rv at s+1-lag
    s = _first_rebalance(rv_path, p.lag, 1, len(B), "hsrai")
    steps = len(B) - 1 - s
    levels = np.empty(steps + 1)
    levels[0] = base
    risky = np.empty(steps)
    cash = np.empty(steps)
    lfs = np.empty(steps)
    sched_d, sched_lf, sched_rv, sched_vd = [], [], [], []
    gaps = underlying.day_gaps()
    lf = math.nan
    rule = lambda rv: leverage_hsrai(p, rv)  # noqa: E731
    for k in range(steps):
        t = s + 1 + k
        if k % rebalance_every == 0:
            j = t - p.lag
            rv = float(rv_path[j])
            lf = _lf_from_rv(rule, rv, p.cap, "hsrai")
            sched_d.append(dates[t - 1])
            sched_lf.append(lf)
            sched_rv.append(rv)
            sched_vd.append(dates[j])
        r = rate_on(dates[t - 1])
        risky[k] = lf * (B[t] / B[t - 1] - 1.0)
        cash[k] = (1.0 - lf) * (r / 365.0) * gaps[t - 1]
        lfs[k] = lf
        levels[k + 1] = levels[k] * (1.0 + risky[k] + cash[k])
    if np.any(levels <= 0):
        raise NumericError("hsrai: index level fell to zero or below")
    schedule = LeverageSchedule(tuple(sched_d), np.array(sched_lf), np.array(sched_rv), tuple(sched_vd))
    params = {"engine": "hsrai", **asdict(p), "vol": asdict(vol),
              "rebalance_every": rebalance_every, "base": base, "day_count": "ACT/365"}
    return RiskControlSeries("hsrai", dates[s:], levels, risky, cash, lfs, schedule, params)


def roll_3m_rate(ir3m: float, ir2m: float, days_into_roll: int) -> float:
    """Yield of a rolled 3-month deposit ``days_into_roll`` days after purchase.

    Linear in time from the 3-month rate on the roll date toward the 2-month
    rate one month later.
    """
    w = (days_into_roll % ROLL_DAYS) / ROLL_DAYS
    return ir3m + (ir2m - ir3m) * w


def run_sprci(
    underlying: LevelSeries,
    rates: Rates | None,
    p: LeverageParams,
    accrual: Accrual = "simple-rate",
    vol: VolRecipe = VolRecipe(),
    rebalance_every: int = 1,
    base: float = 100.0,
    ir2m: Rates | None = None,
    ir3m: Rates | None = None,
) -> RiskControlSeries:
    """Cash/underlying index with capped leverage and period-anchored legs.

    Within a rebalance period starting at ``rb``::

        level_t = level_rb * (1 + LF * (B_t/B_rb - 1) + (1 - LF) * (A_t - 1))
        A_t     = prod_{i=rb+1..t} (1 + r_{i-1} * D_i / 360)

    With ``accrual="roll-3m"`` the rate ``r_{i-1}`` is the rolled 3-month
    deposit yield from :func:`roll_3m_rate`, with roll dates every 30
    calendar days from the index start. ``LF = min(cap, tv / RV)`` where RV
    is read ``p.lag`` observations before ``rb``; ``p.floor`` is ignored.
    """
    if rebalance_every < 1:
        raise InputValidationError("rebalance_every must be >= 1")
    if accrual == "simple-rate":
        rate_on = _rate_lookup(rates, "rate")
    elif accrual == "roll-3m":
        if ir2m is None or ir3m is None:
            raise EnginePreconditionError("sprci roll-3m accrual needs both IR2M and IR3M series")
        on2, on3 = _rate_lookup(ir2m, "IR2M"), _rate_lookup(ir3m, "IR3M")
    else:
        raise InputValidationError(f"unknown accrual {accrual!r}")

    B, dates = underlying.levels, underlying.dates
    rv_path = realized_vol_path(underlying, vol)
    s = _first_rebalance(rv_path, p.lag, 0, len(B), "sprci")
    start = dates[s]
    if accrual == "roll-3m":
        def rate_on(when: date) -> float:
            return roll_3m_rate(on3(when), on2(when), (when - start).days)

    steps = len(B) - 1 - s
    levels = np.empty(steps + 1)
    levels[0] = base
    risky = np.empty(steps)
    cash = np.empty(steps)
    lfs = np.empty(steps)
    sched_d, sched_lf, sched_rv, sched_vd = [], [], [], []
    gaps = underlying.day_gaps()
    rule = lambda rv: leverage_sprci(p.tv, p.cap, rv)  # noqa: E731
    rb = s
    lf = math.nan
    level_rb = base
    acc_prev = 1.0
    for k in range(steps):
        t = s + 1 + k
        if k % rebalance_every == 0:
            rb = t - 1
            level_rb = levels[k]
            acc_prev = 1.0
            j = rb - p.lag
            rv = float(rv_path[j])
            lf = _lf_from_rv(rule, rv, p.cap, "sprci")
            sched_d.append(dates[rb])
            sched_lf.append(lf)
            sched_rv.append(rv)
            sched_vd.append(dates[j])
        acc = acc_prev * (1.0 + rate_on(dates[t - 1]) * gaps[t - 1] / 360.0)
        levels[k + 1] = level_rb * (1.0 + lf * (B[t] / B[rb] - 1.0) + (1.0 - lf) * (acc - 1.0))
        scale = level_rb / levels[k]
        risky[k] = scale * lf * (B[t] - B[t - 1]) / B[rb]
        cash[k] = scale * (1.0 - lf) * (acc - acc_prev)
        lfs[k] = lf
        acc_prev = acc
    if np.any(levels <= 0):
        raise NumericError("sprci: index level fell to zero or below")
    schedule = LeverageSchedule(tuple(sched_d), np.array(sched_lf), np.array(sched_rv), tuple(sched_vd))
    params = {"engine": "sprci", "tv": p.tv, "cap": p.cap, "lag": p.lag, "vol": asdict(vol),
              "accrual": accrual, "rebalance_every": rebalance_every, "base": base,
              "day_count": "ACT/360"}
    return RiskControlSeries("sprci", dates[s:], levels, risky, cash, lfs, schedule, params)
