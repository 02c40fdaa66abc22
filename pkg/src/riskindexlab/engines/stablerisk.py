"""Constant-volatility futures portfolio simulator.

Positions are futures notionals. The whole portfolio value sits in cash
as collateral, a fixed share of it earns the money-market rate (ACT/360),
and each rebalance targets inverse-volatility weights scaled so the
estimated portfolio volatility equals the target. A contract is only
traded when its proposed notional differs from the current one by at
least ``threshold`` in relative terms.

The core loop is vectorized across paths; a single set of contracts is
just the one-path case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np

from ..errors import EnginePreconditionError, InputValidationError, NumericError
from ..series import LevelSeries, RateSeries

PERIODS_PER_YEAR = 252


def portfolio_volatility(weights, cov) -> float:
    """``sqrt(x' S x)`` for weights ``x`` and covariance matrix ``S``."""
    x = np.asarray(weights, dtype=np.float64)
    S = np.asarray(cov, dtype=np.float64)
    if x.ndim != 1 or S.shape != (x.size, x.size):
        raise InputValidationError(
            f"dimension mismatch: {x.size} weights vs covariance of shape {S.shape}"
        )
    scale = max(1.0, float(np.max(np.abs(S)))) if S.size else 1.0
    if not np.allclose(S, S.T, rtol=0.0, atol=1e-10 * scale):
        raise InputValidationError("covariance matrix is not symmetric")
    q = float(x @ S @ x)
    if q < -1e-10:
        raise NumericError(f"covariance matrix is not positive semidefinite (x'Sx = {q})")
    return math.sqrt(max(q, 0.0))


@dataclass(frozen=True)
class StableRiskParams:
    target_vol: float = 0.10
    threshold: float = 0.25
    cost_rate: float = 0.0005
    cov_window: int = 63
    cash_fraction: float = 0.8
    rebalance_every: int = 1
    realized_window: int = 63
    base: float = 100.0
    periods_per_year: int = PERIODS_PER_YEAR

    def __post_init__(self):
        if not self.target_vol > 0:
            raise InputValidationError("target_vol must be positive")
        if self.threshold < 0:
            raise InputValidationError("threshold must be >= 0")
        if self.cost_rate < 0:
            raise InputValidationError("cost_rate must be >= 0")
        if self.cov_window < 2 or self.realized_window < 2:
            raise InputValidationError("estimation windows must be >= 2")
        if not 0.0 <= self.cash_fraction <= 1.0:
            raise InputValidationError("cash_fraction must be within [0, 1]")
        if self.rebalance_every < 1:
            raise InputValidationError("rebalance_every must be >= 1")


@dataclass(frozen=True)
class FuturesPortfolio:
    """Portfolio state right after the rebalance decision on one date."""

    date: date
    value: float
    positions: np.ndarray
    prices: np.ndarray
    covariance: np.ndarray
    target_vol: float
    threshold: float
    cost_rate: float

    @property
    def weights(self) -> np.ndarray:
        return self.positions / self.value

    @property
    def cash_weight(self) -> float:
        """Residual so that weights plus cash account for the whole value."""
        return 1.0 - float(self.weights.sum())

    @property
    def cash(self) -> float:
        return self.cash_weight * self.value


@dataclass(frozen=True)
class StableRiskPaths:
    """Batched trajectories; leading axis is the path.

    Step arrays (``pnl``, ``accrual``) have one entry per move between
    consecutive simulated dates; ``cost`` and ``positions`` have one per
    date (the trade decided on that date).
    """

    values: np.ndarray        # (P, S)
    positions: np.ndarray     # (P, S, K)
    traded: np.ndarray        # (P, S, K) bool
    covariances: np.ndarray   # (P, S, K, K), NaN where no rebalance
    pnl: np.ndarray           # (P, S-1)
    accrual: np.ndarray       # (P, S-1)
    cost: np.ndarray          # (P, S)
    realized_vol: np.ndarray  # (P, S-1), NaN during warm-up
    params: StableRiskParams
    start_index: int

    def conservation_residual(self) -> float:
        """Largest ``|dV - (pnl + accrual - cost)|`` over all paths and steps."""
        if self.pnl.shape[1] == 0:
            return 0.0
        dv = np.diff(self.values, axis=1)
        return float(np.max(np.abs(dv - (self.pnl + self.accrual - self.cost[:, 1:]))))

    def band_exits(self, band: float = 0.20) -> np.ndarray:
        """Per path: does rolling realized vol ever leave ``target * (1 +- band)``?"""
        rv = self.realized_vol
        dev = np.abs(rv / self.params.target_vol - 1.0)
        return np.any(np.where(np.isfinite(dev), dev > band, False), axis=1)


@dataclass(frozen=True)
class StableRiskResult:
    dates: tuple[date, ...]
    paths: StableRiskPaths
    prices: np.ndarray  # (S, K)

    @property
    def values(self) -> np.ndarray:
        return self.paths.values[0]

    @property
    def realized_vol(self) -> np.ndarray:
        return self.paths.realized_vol[0]

    def as_level_series(self) -> LevelSeries:
        return LevelSeries(self.dates, self.values, "stablerisk")

    def portfolio_at(self, i: int) -> FuturesPortfolio:
        p = self.paths.params
        return FuturesPortfolio(self.dates[i], float(self.values[i]),
                                self.paths.positions[0, i].copy(), self.prices[i].copy(),
                                self.paths.covariances[0, i].copy(),
                                p.target_vol, p.threshold, p.cost_rate)


def apply_threshold(current, proposal, threshold: float):
    """Keep each position unless its proposed change is large enough.

    A contract trades when ``|proposal - current| >= threshold * |current|``;
    a zero position always takes the proposal.

    Returns:
        ``(new_positions, traded_mask)``.
    """
    cur = np.asarray(current, dtype=np.float64)
    prop = np.asarray(proposal, dtype=np.float64)
    trade = (cur == 0.0) | (np.abs(prop - cur) >= threshold * np.abs(cur))
    return np.where(trade, prop, cur), trade


def _window_cov(S1, S2, t, w):
    s1 = S1[:, t] - S1[:, t - w]
    s2 = S2[:, t] - S2[:, t - w]
    m = s1 / w
    cov = s2 / w - m[:, :, None] * m[:, None, :]
    return 0.5 * (cov + np.swapaxes(cov, 1, 2))


def simulate_stablerisk_paths(
    prices: np.ndarray,
    gaps: np.ndarray,
    rates: np.ndarray,
    params: StableRiskParams = StableRiskParams(),
) -> StableRiskPaths:
    """Run the simulator on ``prices`` of shape ``(paths, dates, contracts)``.

    Args:
        gaps: calendar days between consecutive dates, length ``dates - 1``.
        rates: money-market rate on the earlier date of each gap, same length.
    """
    F = np.asarray(prices, dtype=np.float64)
    if F.ndim != 3:
        raise InputValidationError("prices must have shape (paths, dates, contracts)")
    P, T, K = F.shape
    if K < 2:
        raise InputValidationError("need at least two contracts")
    if np.any(~np.isfinite(F)) or np.any(F <= 0):
        raise InputValidationError("contract prices must be positive and finite")
    gaps = np.asarray(gaps, dtype=np.float64)
    rates = np.asarray(rates, dtype=np.float64)
    if gaps.shape != (T - 1,) or rates.shape != (T - 1,):
        raise InputValidationError("gaps and rates need one entry per step")
    w = params.cov_window
    t0 = w
    if T - t0 < 2:
        raise EnginePreconditionError(
            f"stablerisk needs more than {w + 1} dates for a {w}-return covariance window"
        )

    r = np.log(F[:, 1:] / F[:, :-1])
    S1 = np.concatenate([np.zeros((P, 1, K)), np.cumsum(r, axis=1)], axis=1)
    S2 = np.concatenate(
        [np.zeros((P, 1, K, K)), np.cumsum(r[:, :, :, None] * r[:, :, None, :], axis=1)], axis=1
    )
    ann = params.periods_per_year
    steps = T - t0
    values = np.empty((P, steps))
    positions = np.zeros((P, steps, K))
    traded = np.zeros((P, steps, K), dtype=bool)
    covs = np.full((P, steps, K, K), np.nan)
    pnl = np.zeros((P, steps - 1))
    accrual = np.zeros((P, steps - 1))
    cost = np.zeros((P, steps))

    V = np.full(P, float(params.base))
    N = np.zeros((P, K))
    for k in range(steps):
        t = t0 + k
        if k > 0:
            pnl[:, k - 1] = (N * (F[:, t] / F[:, t - 1] - 1.0)).sum(axis=1)
            accrual[:, k - 1] = params.cash_fraction * V * rates[t - 1] * gaps[t - 1] / 360.0
            V = V + pnl[:, k - 1] + accrual[:, k - 1]
        if t < T - 1 and k % params.rebalance_every == 0:
            cov = _window_cov(S1, S2, t, w) * ann
            covs[:, k] = cov
            evals = np.linalg.eigvalsh(cov)
            bad = ~(evals[:, 0] > 1e-12 * np.maximum(evals[:, -1], 1e-300))
            if np.any(bad):
                p = int(np.flatnonzero(bad)[0])
                raise NumericError(f"degenerate covariance estimate on path {p} at step {t}")
            sig = np.sqrt(np.diagonal(cov, axis1=1, axis2=2))
            raw = 1.0 / sig
            pv = np.sqrt(np.einsum("pi,pij,pj->p", raw, cov, raw))
            target_w = raw * (params.target_vol / pv)[:, None]
            proposal = target_w * V[:, None]
            new_N, trade = apply_threshold(N, proposal, params.threshold)
            cost[:, k] = params.cost_rate * np.abs(new_N - N).sum(axis=1)
            V = V - cost[:, k]
            N = new_N
            traded[:, k] = trade
        positions[:, k] = N
        values[:, k] = V

    rets = values[:, 1:] / values[:, :-1] - 1.0
    rv = np.full_like(rets, np.nan)
    rw = params.realized_window
    if rets.shape[1] >= rw:
        win = np.lib.stride_tricks.sliding_window_view(rets, rw, axis=1)
        rv[:, rw - 1 :] = win.std(axis=2) * np.sqrt(ann)
    return StableRiskPaths(values, positions, traded, covs, pnl, accrual, cost, rv, params, t0)


def _align(contracts: Sequence[LevelSeries]):
    common = set(contracts[0].dates)
    for c in contracts[1:]:
        common &= set(c.dates)
    dates = tuple(sorted(common))
    if len(dates) < 2:
        raise EnginePreconditionError("contracts do not share an overlapping date range")
    cols = []
    for c in contracts:
        pos = {d: i for i, d in enumerate(c.dates)}
        cols.append(c.levels[[pos[d] for d in dates]])
    return dates, np.column_stack(cols)


def simulate_stablerisk(
    contracts: Sequence[LevelSeries],
    params: StableRiskParams = StableRiskParams(),
    rates: RateSeries | float = 0.0,
) -> StableRiskResult:
    """Simulate the portfolio on the dates all ``contracts`` have in common."""
    if len(contracts) < 2:
        raise InputValidationError("need at least two contracts")
    dates, F = _align(contracts)
    gaps = np.array([(b - a).days for a, b in zip(dates[:-1], dates[1:])], dtype=np.float64)
    if isinstance(rates, RateSeries):
        rr = np.array([rates.rate_on(d) for d in dates[:-1]])
    else:
        rr = np.full(len(dates) - 1, float(rates))
    paths = simulate_stablerisk_paths(F[None], gaps, rr, params)
    t0 = paths.start_index
    return StableRiskResult(dates[t0:], paths, F[t0:])
