"""Three-asset (stocks/bonds/cash) relative-risk allocator.

Each month the downside risk of the all-stock portfolio over the trailing
36 months sets a budget, ``risk_fraction`` times that figure. Weights are
then chosen on a fixed grid over the simplex: first the allocation to the
asset with the highest expected return is pushed as high as the budget
allows, then the allocation to the runner-up, with every weight held at or
above a 5% floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Literal, Sequence

import numpy as np

from ..errors import EnginePreconditionError, InputValidationError
from ..series import LevelSeries

CMAC_NAMES = ("stocks", "bonds", "cash")
RISK_FRACTIONS = (0.2, 0.4, 0.6, 0.8, 1.0)
RiskMeasure = Literal["semivariance", "semideviation"]


@dataclass(frozen=True)
class CmacAllocation:
    date: date
    weights: np.ndarray
    risk_fraction: float
    stock_risk: float
    target_risk: float
    achieved_risk: float
    expected_returns: np.ndarray
    attainable: bool

    def to_record(self) -> dict:
        rec = {"date": self.date.isoformat(), "risk_fraction": self.risk_fraction,
               "stock_risk": self.stock_risk, "target_risk": self.target_risk,
               "achieved_risk": self.achieved_risk, "attainable": self.attainable}
        for name, w, mu in zip(CMAC_NAMES, self.weights, self.expected_returns):
            rec[f"w_{name}"] = float(w)
            rec[f"er_{name}"] = float(mu)
        return rec


@dataclass(frozen=True)
class DjrriResult:
    allocations: list[CmacAllocation]
    composite: LevelSeries


def portfolio_semivariances(window_returns: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Semivariance of ``window_returns @ w`` for every row ``w`` of ``weights``."""
    port = window_returns @ np.atleast_2d(weights).T
    down = np.minimum(port - port.mean(axis=0), 0.0)
    return (down * down).mean(axis=0)


def _risk(sv, measure: RiskMeasure):
    return np.sqrt(sv) if measure == "semideviation" else sv


def allocate_cmac(
    window_returns: np.ndarray,
    risk_fraction: float,
    expected_returns: Sequence[float],
    floor: float = 0.05,
    granularity: float = 0.001,
    measure: RiskMeasure = "semivariance",
) -> tuple[np.ndarray, float, float, float, bool]:
    """Grid search for one month.

    Args:
        window_returns: (months, 3) simple returns of stocks, bonds, cash.

    Returns:
        ``(weights, stock_risk, target_risk, achieved_risk, attainable)``.
        When no grid point meets the budget the least risky point is
        returned with ``attainable=False``.
    """
    R = np.asarray(window_returns, dtype=np.float64)
    if R.ndim != 2 or R.shape[1] != 3:
        raise InputValidationError("window_returns must have shape (months, 3)")
    if not 0.0 < risk_fraction <= 1.0:
        raise InputValidationError(f"risk fraction must be in (0, 1], got {risk_fraction}")
    units = int(round(1.0 / granularity))
    fl = int(round(floor * units))
    if 3 * fl > units:
        raise InputValidationError(f"floor {floor} is infeasible for three assets")

    mu = np.asarray(expected_returns, dtype=np.float64)
    # stable sort keeps stocks > bonds > cash on ties
    order = np.argsort(-mu, kind="stable")
    stock_risk = float(_risk(portfolio_semivariances(R, np.array([1.0, 0.0, 0.0]))[0], measure))
    target = risk_fraction * stock_risk
    limit = target * (1.0 + 1e-12)

    best_min = (math.inf, None)
    for a in range(units - 2 * fl, fl - 1, -1):
        b = np.arange(units - fl - a, fl - 1, -1)
        W = np.zeros((b.size, 3))
        W[:, order[0]] = a
        W[:, order[1]] = b
        W[:, order[2]] = units - a - b
        W /= units
        risk = _risk(portfolio_semivariances(R, W), measure)
        ok = np.flatnonzero(risk <= limit)
        if ok.size:
            i = int(ok[0])  # b is descending, so the first hit is the largest
            return W[i], stock_risk, target, float(risk[i]), True
        i = int(np.argmin(risk))
        if risk[i] < best_min[0]:
            best_min = (float(risk[i]), W[i])
    return best_min[1], stock_risk, target, best_min[0], False


def run_djrri(
    stocks: LevelSeries,
    bonds: LevelSeries,
    cash: LevelSeries,
    risk_fraction: float,
    expected_returns: np.ndarray | Sequence[float] | None = None,
    window: int = 36,
    floor: float = 0.05,
    granularity: float = 0.001,
    measure: RiskMeasure = "semivariance",
    base: float = 100.0,
) -> DjrriResult:
    """Monthly re-weighting of three CMAC level series sharing one date grid.

    ``expected_returns`` may be a length-3 vector used every month, an
    array with one row per allocation date, or ``None`` for the trailing
    window mean of each CMAC's monthly returns. The allocation on date
    ``m`` earns the CMAC returns from ``m`` to ``m+1``.

    Raises:
        EnginePreconditionError: fewer than ``window`` monthly returns.
    """
    series = (stocks, bonds, cash)
    if not (stocks.dates == bonds.dates == cash.dates):
        raise InputValidationError("stock, bond and cash series must share the same dates")
    n = len(stocks)
    if n - 1 < window:
        raise EnginePreconditionError(
            f"djrri needs {window} months of returns, got {n - 1}"
        )
    levels = np.column_stack([s.levels for s in series])
    R = levels[1:] / levels[:-1] - 1.0
    alloc_idx = range(window, n)
    if expected_returns is None:
        er = np.array([R[m - window : m].mean(axis=0) for m in alloc_idx])
    else:
        er = np.asarray(expected_returns, dtype=np.float64)
        if er.shape == (3,):
            er = np.tile(er, (len(alloc_idx), 1))
        elif er.shape != (len(alloc_idx), 3):
            raise InputValidationError(
                f"expected_returns must have shape (3,) or ({len(alloc_idx)}, 3), got {er.shape}"
            )

    allocations = []
    for k, m in enumerate(alloc_idx):
        w, srisk, target, achieved, ok = allocate_cmac(
            R[m - window : m], risk_fraction, er[k], floor, granularity, measure
        )
        allocations.append(CmacAllocation(stocks.dates[m], w, risk_fraction, srisk, target,
                                          achieved, er[k].copy(), ok))

    comp = [base]
    for k, m in enumerate(alloc_idx):
        if m + 1 >= n:
            break
        comp.append(comp[-1] * (1.0 + float(allocations[k].weights @ R[m])))
    composite = LevelSeries(stocks.dates[window : window + len(comp)], comp, "djrri")
    return DjrriResult(allocations, composite)
