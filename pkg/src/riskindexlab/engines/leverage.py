"""Leverage-factor rules for cash/underlying risk-control indices.

The functions only use ``min``, ``max`` and division, so they work on
``fractions.Fraction`` inputs as well as floats; exact arithmetic matters
for the sensitivity-table properties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from ..errors import InputValidationError


@dataclass(frozen=True)
class LeverageParams:
    """Target volatility, exposure bounds and volatility lag.

    Attributes:
        tv: annualized target volatility.
        cap: maximum leverage factor; ``math.inf`` leaves it uncapped.
        floor: minimum leverage factor (HSRAI only; SPRCI ignores it).
        lag: how many observations before the leverage date the volatility
            reading is taken.
    """

    tv: float
    cap: float = math.inf
    floor: float = 0.0
    lag: int = 2

    def __post_init__(self):
        if not self.tv > 0:
            raise InputValidationError(f"target volatility must be positive, got {self.tv}")
        if self.floor < 0:
            raise InputValidationError(f"floor must be >= 0, got {self.floor}")
        if self.cap < self.floor:
            raise InputValidationError(f"cap {self.cap} is below floor {self.floor}")
        if self.lag < 0:
            raise InputValidationError(f"volatility lag must be >= 0, got {self.lag}")


def _check_rv(rv) -> None:
    if not rv > 0:
        raise InputValidationError(f"realized volatility must be positive, got {rv}")


def leverage_hsrai(p: LeverageParams, rv):
    """``max(min(cap, tv / rv), floor)``."""
    _check_rv(rv)
    return max(min(p.cap, p.tv / rv), p.floor)


def leverage_sprci(tv, cap, rv):
    """``min(cap, tv / rv)``; there is no floor."""
    _check_rv(rv)
    if not tv > 0:
        raise InputValidationError(f"target volatility must be positive, got {tv}")
    return min(cap, tv / rv)


@dataclass(frozen=True)
class LeverageSchedule:
    """Leverage set on each rebalance date and the volatility behind it."""

    dates: tuple[date, ...]
    leverage: np.ndarray
    rv: np.ndarray
    rv_dates: tuple[date, ...]

    def __len__(self) -> int:
        return len(self.dates)

    def to_records(self) -> list[dict]:
        return [
            {"date": d.isoformat(), "lf": float(lf), "rv": float(rv), "rv_date": vd.isoformat()}
            for d, lf, rv, vd in zip(self.dates, self.leverage, self.rv, self.rv_dates)
        ]
