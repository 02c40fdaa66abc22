"""Bias and sensitivity diagnostics for risk-control indices.

Covers the leverage-factor sensitivity grid, compounded-return tables,
window noise against a market benchmark, cumulative bias series, the
volatility-leakage experiment, a variance-component ledger and a Sharpe
ratio for comparing engine outputs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from fractions import Fraction
from typing import Sequence

import numpy as np

from .engines.leverage import LeverageParams, leverage_hsrai
from .engines.riskcontrol import run_hsrai
from .errors import InputValidationError, NumericError
from .moments import VolRecipe
from .scenarios import business_dates, path_to_series, regime_switch_paths
from .series import LevelSeries, ReturnSeries

# --- leverage sensitivity -----------------------------------------------------


@dataclass(frozen=True)
class SensitivityRow:
    tv: object
    rv: object
    d_rv: object
    lf: object
    d_lf: object


@dataclass(frozen=True)
class SensitivityTable:
    """Leverage factor across a realized-volatility grid.

    Values keep the numeric type of the inputs, so a grid built from
    ``Fraction`` objects is exact. ``d_lf`` is ``lf - previous lf``; the
    first row has zero deltas.
    """

    rows: tuple[SensitivityRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def row_at(self, rv) -> SensitivityRow:
        for r in self.rows:
            if abs(float(r.rv) - float(rv)) < 1e-12:
                return r
        raise KeyError(rv)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["tv_pct", "rv_pct", "d_rv_pct", "lf_pct", "d_lf_pp"])
        for r in self.rows:
            wr.writerow([f"{100 * float(r.tv):.2f}", f"{100 * float(r.rv):.2f}",
                         f"{100 * float(r.d_rv):.2f}", f"{100 * float(r.lf):.1f}",
                         f"{100 * float(r.d_lf):.3f}"])
        return buf.getvalue()


def lf_sensitivity_table(tv, rv_min, rv_max, step, cap=math.inf, floor=0) -> SensitivityTable:
    """Leverage ``max(min(cap, tv/rv), floor)`` for ``rv = rv_min, rv_min+step, ... <= rv_max``.

    The number of rows is ``round((rv_max - rv_min) / step) + 1`` so float
    grids do not lose their last point to rounding.
    """
    if not step > 0:
        raise InputValidationError("step must be positive")
    if not rv_min > 0:
        raise InputValidationError("realized volatility range must be positive")
    if rv_max < rv_min:
        raise InputValidationError("empty realized volatility range")
    count = int(round((rv_max - rv_min) / step)) + 1
    p = LeverageParams(tv=tv, cap=cap, floor=floor, lag=0)
    rows = []
    prev_rv = prev_lf = None
    for i in range(count):
        rv = rv_min + i * step
        lf = leverage_hsrai(p, rv)
        if prev_lf is None:
            d_rv, d_lf = rv - rv, lf - lf
        else:
            d_rv, d_lf = rv - prev_rv, lf - prev_lf
        rows.append(SensitivityRow(tv, rv, d_rv, lf, d_lf))
        prev_rv, prev_lf = rv, lf
    return SensitivityTable(tuple(rows))


def exact_grid(tv: str, rv_min: str, rv_max: str, step: str) -> SensitivityTable:
    """Same table with every input parsed to a ``Fraction``."""
    return lf_sensitivity_table(Fraction(tv), Fraction(rv_min), Fraction(rv_max), Fraction(step))


# --- compounded returns ---------------------------------------------------------


@dataclass(frozen=True)
class CompoundTable:
    """Per-scenario compounded returns and dispersion of the period returns.

    Attributes:
        returns: (scenarios, periods) matrix of per-period simple returns.
        compounded: ``prod(1 + r) - 1`` per row.
        compounded_change: previous row's compounded return minus this one.
        row_std: sample standard deviation (``n - 1``) of each row.
        row_std_change: previous row's ``row_std`` minus this one.
        period_std: sample standard deviation across scenarios per period.
    """

    returns: np.ndarray
    compounded: np.ndarray
    compounded_change: np.ndarray
    row_std: np.ndarray
    row_std_change: np.ndarray
    period_std: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["row", "compounded_pct", "compounded_change_pct", "row_std_pct",
                     "row_std_change_pct"])
        for i in range(len(self.compounded)):
            wr.writerow([f"R{i + 1}", f"{100 * self.compounded[i]:.2f}",
                         f"{100 * self.compounded_change[i]:.2f}",
                         f"{100 * self.row_std[i]:.3f}", f"{100 * self.row_std_change[i]:.2f}"])
        return buf.getvalue()


def _first_change(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    out[1:] = x[:-1] - x[1:]
    return out


def compound_table(returns) -> CompoundTable:
    R = np.asarray(returns, dtype=np.float64)
    if R.ndim != 2 or R.shape[1] == 0:
        raise InputValidationError("returns must be a non-empty rectangular matrix")
    if not np.all(np.isfinite(R)):
        raise InputValidationError("returns must be finite")
    if np.any(R <= -1.0):
        raise InputValidationError("a return of -100% or worse cannot be compounded")
    comp = np.prod(1.0 + R, axis=1) - 1.0
    row_std = R.std(axis=1, ddof=1) if R.shape[1] > 1 else np.zeros(R.shape[0])
    period_std = R.std(axis=0, ddof=1) if R.shape[0] > 1 else np.zeros(R.shape[1])
    return CompoundTable(R, comp, _first_change(comp), row_std, _first_change(row_std), period_std)


def step_scenarios(periods: int, base: float, alt: float) -> np.ndarray:
    """Rows with ``k = 0..periods`` of the periods at ``alt`` and the rest at ``base``.

    Row ``k`` puts ``alt`` in the last ``k`` periods. Only the count matters
    for the compounded return and the row dispersion.
    """
    rows = np.full((periods + 1, periods), float(base))
    for k in range(1, periods + 1):
        rows[k, periods - k :] = alt
    return rows


def single_to_double_digit_scenarios() -> np.ndarray:
    """The 39 twelve-period scenarios: 5%->10%, -5%->-10% and 5%->-10% ladders."""
    return np.vstack([
        step_scenarios(12, 0.05, 0.10),
        step_scenarios(12, -0.05, -0.10),
        step_scenarios(12, 0.05, -0.10),
    ])


def stack_tables(tables: Sequence[CompoundTable]) -> CompoundTable:
    """Concatenate tables row-wise; each block keeps its own change columns."""
    if not tables:
        raise InputValidationError("no tables to stack")
    if len({t.returns.shape[1] for t in tables}) != 1:
        raise InputValidationError("tables have different period counts")
    cols = ("returns", "compounded", "compounded_change", "row_std", "row_std_change")
    parts = {c: np.concatenate([getattr(t, c) for t in tables]) for c in cols}
    R = parts["returns"]
    period_std = R.std(axis=0, ddof=1) if R.shape[0] > 1 else np.zeros(R.shape[1])
    return CompoundTable(period_std=period_std, **parts)


def ladder_compound_table() -> CompoundTable:
    """Compound table of the 39 ladder scenarios, changes restarting per ladder."""
    R = single_to_double_digit_scenarios()
    return stack_tables([compound_table(R[k : k + 13]) for k in (0, 13, 26)])


# --- noise and bias ----------------------------------------------------------------


def _check_aligned(a: LevelSeries, b: LevelSeries) -> None:
    if a.dates != b.dates:
        raise InputValidationError(
            f"series are not aligned: {a.label or 'index'} has {len(a)} dates, "
            f"{b.label or 'market'} has {len(b)}, or the dates differ"
        )


def noise(index: LevelSeries, market: LevelSeries, window: int = 21) -> np.ndarray:
    """Rolling ``window``-observation return of the index minus that of the market.

    Entry ``k`` covers observations ``k .. k + window``.
    """
    _check_aligned(index, market)
    if window < 1:
        raise InputValidationError("window must be >= 1")
    if len(index) <= window:
        raise InputValidationError(f"need more than {window} observations, got {len(index)}")
    I, M = index.levels, market.levels
    return (I[window:] / I[:-window] - 1.0) - (M[window:] / M[:-window] - 1.0)


@dataclass(frozen=True)
class BiasSeries:
    """Gap between a rebased index and its rebased market benchmark.

    ``bias[t] = index[t] - market[t]`` with both starting at 100;
    ``increments[t-1] = bias[t] - bias[t-1]``.
    """

    dates: tuple[date, ...]
    index: np.ndarray
    market: np.ndarray
    bias: np.ndarray
    increments: np.ndarray
    noise: np.ndarray
    comovement: float

    def telescoping_residual(self) -> float:
        """Largest ``|(bias[t] - bias[0]) - sum(increments[:t])|``, summed exactly."""
        worst = 0.0
        partial = []
        for t in range(1, len(self.bias)):
            partial.append(float(self.increments[t - 1]))
            worst = max(worst, abs((self.bias[t] - self.bias[0]) - math.fsum(partial)))
        return worst

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["date", "index", "market", "bias", "increment"])
        for t, d in enumerate(self.dates):
            inc = repr(float(self.increments[t - 1])) if t else ""
            wr.writerow([d.isoformat(), repr(float(self.index[t])), repr(float(self.market[t])),
                         repr(float(self.bias[t])), inc])
        return buf.getvalue()


def bias_series(index: LevelSeries, market: LevelSeries, noise_window: int = 21) -> BiasSeries:
    """Rebase both series to 100 and track their level gap over time.

    ``comovement`` is the sample correlation between ``|increment|`` and the
    absolute index change; NaN when either is constant. ``noise`` is empty
    when the series are too short for ``noise_window``.
    """
    _check_aligned(index, market)
    I = index.levels * (100.0 / index.levels[0])
    M = market.levels * (100.0 / market.levels[0])
    B = I - M
    dB = np.diff(B)
    dI = np.diff(I)
    a, b = np.abs(dB), np.abs(dI)
    if a.size > 1 and a.std() > 0 and b.std() > 0:
        co = float(np.corrcoef(a, b)[0, 1])
    else:
        co = math.nan
    nz = noise(index, market, noise_window) if len(index) > noise_window else np.empty(0)
    return BiasSeries(index.dates, I, M, B, dB, nz, co)


# --- volatility leakage ---------------------------------------------------------------


LEAKAGE_LAGS = (1, 3, 5, 10)


@dataclass(frozen=True)
class LeakageScenario:
    """Single synthetic underlying whose volatility jumps part-way through."""

    n_steps: int = 756
    sigma: float = 0.10
    sigma_high: float = 0.40
    switch_at: int = 378
    mu: float = 0.0
    seed: int = 42
    start: date = date(2020, 1, 1)

    def underlying(self) -> LevelSeries:
        path = regime_switch_paths(1, self.n_steps, 1, self.sigma, self.sigma_high,
                                   self.switch_at, self.mu, seed=self.seed)[0, :, 0]
        return path_to_series(path, business_dates(self.start, self.n_steps + 1), "underlying")


@dataclass(frozen=True)
class LeakageReport:
    lags: tuple[int, ...]
    realized_vol: tuple[float, ...]
    leakage: tuple[float, ...]
    underlying_vol: float
    target_vol: float
    status: str
    params: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        v = self.realized_vol
        return all(b >= a for a, b in zip(v, v[1:]))

    def to_jsonl(self) -> str:
        lines = []
        for lag, rv, lk in zip(self.lags, self.realized_vol, self.leakage):
            lines.append(json.dumps({"lag": lag, "realized_vol": rv, "leakage": lk,
                                     "target_vol": self.target_vol, "status": self.status},
                                    sort_keys=True))
        lines.append(json.dumps({"summary": True, "monotone": self.monotone,
                                 "underlying_vol": self.underlying_vol, "params": self.params},
                                sort_keys=True, default=str))
        return "\n".join(lines) + "\n"


def _ann_vol(levels: np.ndarray, periods_per_year: int = 252) -> float:
    r = np.diff(np.log(levels))
    return float(r.std() * math.sqrt(periods_per_year)) if r.size else 0.0


def leakage_experiment(
    underlying: LevelSeries | LeakageScenario | None = None,
    lags: Sequence[int] = LEAKAGE_LAGS,
    params: LeverageParams = LeverageParams(tv=0.10, cap=1.5, floor=0.0, lag=2),
    vol: VolRecipe = VolRecipe(),
    rate: float = 0.0,
) -> LeakageReport:
    """Realized HSRAI volatility when leverage is only reset every ``D`` observations.

    ``leakage`` is the realized index volatility in excess of the target
    (zero when below). With the leverage factor pinned to one the index just
    replays the underlying and the report's status is ``"pass-through"``.
    """
    lags = tuple(int(d) for d in lags)
    if not lags or min(lags) < 1:
        raise InputValidationError("rebalance lags must be >= 1")
    scenario_params = {}
    if underlying is None:
        underlying = LeakageScenario()
    if isinstance(underlying, LeakageScenario):
        scenario_params = asdict(underlying)
        underlying = underlying.underlying()
    u_vol = _ann_vol(underlying.levels)
    vols, leaks = [], []
    for d in lags:
        res = run_hsrai(underlying, rate, params, vol, rebalance_every=d)
        v = _ann_vol(res.levels)
        vols.append(v)
        leaks.append(max(0.0, v - params.tv))
    status = "pass-through" if params.cap == params.floor == 1 else "targeted"
    meta = {"leverage": asdict(params), "vol": asdict(vol), "rate": rate,
            "scenario": scenario_params}
    return LeakageReport(lags, tuple(vols), tuple(leaks), u_vol, float(params.tv), status, meta)


# --- variance components and Sharpe ------------------------------------------------------


VARIANCE_COMPONENTS = (
    "fundamental", "market_noise", "expectations", "industry",
    "liquidity", "ownership", "order_flow", "cash_availability",
)


@dataclass(frozen=True)
class VarianceDecomposition:
    """Total variance as the sum of eight non-negative attributed components."""

    fundamental: float
    market_noise: float
    expectations: float
    industry: float
    liquidity: float
    ownership: float
    order_flow: float
    cash_availability: float

    def __post_init__(self):
        for name in VARIANCE_COMPONENTS:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InputValidationError(f"variance component {name} must be >= 0, got {v}")

    @property
    def components(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in VARIANCE_COMPONENTS}

    @property
    def total(self) -> float:
        return math.fsum(self.components.values())


def decompose_variance(components: dict[str, float] | Sequence[float]) -> VarianceDecomposition:
    """Build a :class:`VarianceDecomposition` from a mapping or 8 values in canonical order."""
    if isinstance(components, dict):
        unknown = set(components) - set(VARIANCE_COMPONENTS)
        if unknown:
            raise InputValidationError(f"unknown variance components {sorted(unknown)}")
        vals = {name: float(components.get(name, 0.0)) for name in VARIANCE_COMPONENTS}
        return VarianceDecomposition(**vals)
    vals = [float(v) for v in components]
    if len(vals) != len(VARIANCE_COMPONENTS):
        raise InputValidationError(f"expected {len(VARIANCE_COMPONENTS)} components, got {len(vals)}")
    return VarianceDecomposition(*vals)


def sharpe(returns: ReturnSeries | Sequence[float], risk_free: float = 0.0) -> float:
    """Mean excess return over its population standard deviation.

    Excess returns that are all exactly zero give 0. Any other constant
    excess return has zero dispersion and raises.
    """
    r = returns.values if isinstance(returns, ReturnSeries) else np.asarray(returns, dtype=np.float64)
    if r.size == 0:
        raise InputValidationError("need at least one return")
    excess = r - risk_free
    if np.all(excess == 0.0):
        return 0.0
    sd = float(excess.std())
    if sd == 0.0:
        raise NumericError("Sharpe ratio undefined: excess returns have zero dispersion")
    return float(excess.mean() / sd)
