"""Moment estimators used by the engines and diagnostics.

Sample moments use the population divisor (the observation count itself),
not ``n - 1``. The exponentially weighted variance works on undemeaned
squared log-returns, the way index providers publish it.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from datetime import date
from typing import Literal, Sequence

import numpy as np

from .errors import InputValidationError, NumericError
from .series import LevelSeries, ReturnSeries, to_returns

TRADING_DAYS_PER_YEAR = 252


def _observations(xs) -> np.ndarray:
    if isinstance(xs, ReturnSeries):
        xs = xs.values
    arr = np.asarray(xs, dtype=np.float64)
    if arr.ndim != 1:
        raise InputValidationError("observations must be one-dimensional")
    if arr.size == 0:
        raise InputValidationError("need at least one observation")
    if not np.all(np.isfinite(arr)):
        raise InputValidationError("observations must be finite")
    return arr


def sample_variance(xs) -> float:
    x = _observations(xs)
    dev = x - x.mean()
    return float(np.dot(dev, dev) / x.size)


def semivariance(xs) -> float:
    """Mean squared shortfall below the sample mean; upside deviations count as zero."""
    x = _observations(xs)
    down = np.minimum(x - x.mean(), 0.0)
    return float(np.dot(down, down) / x.size)


def covariance(xs, ys) -> float:
    x, y = _observations(xs), _observations(ys)
    if x.size != y.size:
        raise InputValidationError(f"length mismatch: {x.size} vs {y.size}")
    return float(np.dot(x - x.mean(), y - y.mean()) / x.size)


def correlation(xs, ys) -> float:
    x, y = _observations(xs), _observations(ys)
    if x.size != y.size:
        raise InputValidationError(f"length mismatch: {x.size} vs {y.size}")
    sx, sy = math.sqrt(sample_variance(x)), math.sqrt(sample_variance(y))
    if sx == 0.0 or sy == 0.0:
        raise NumericError("correlation undefined: zero standard deviation")
    rho = covariance(x, y) / (sx * sy)
    # rounding can push |rho| a hair past 1
    return float(min(1.0, max(-1.0, rho)))


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    semivariance: float
    std: float
    skewness: float
    kurtosis: float
    count: int


def moment_set(xs) -> MomentSet:
    """All moments of one sample at once.

    Skewness and kurtosis are the standardized third and fourth central
    moments (kurtosis is not excess); both are NaN for a constant sample.
    """
    x = _observations(xs)
    mu = float(x.mean())
    dev = x - mu
    var = float(np.dot(dev, dev) / x.size)
    sd = math.sqrt(var)
    if sd > 0:
        z = dev / sd  # standardize first so tiny variances do not underflow
        skew = float(np.mean(z**3))
        kurt = float(np.mean(z**4))
    else:
        skew = kurt = math.nan
    return MomentSet(mu, var, semivariance(x), sd, skew, kurt, int(x.size))


# --- exponentially weighted variance ---------------------------------------


@dataclass(frozen=True)
class EwmaParams:
    """Decay factor, return horizon ``n`` and initialization window ``N``."""

    decay: float = 0.94
    n: int = 1
    init_window: int = 20
    periods_per_year: int = TRADING_DAYS_PER_YEAR

    def __post_init__(self):
        if not 0.0 < self.decay < 1.0:
            raise InputValidationError(f"decay factor must lie in (0, 1), got {self.decay}")
        if self.n < 1:
            raise InputValidationError(f"return horizon n must be >= 1, got {self.n}")
        if self.init_window < 2:
            raise InputValidationError(f"initialization window must be >= 2, got {self.init_window}")
        if self.periods_per_year <= 0:
            raise InputValidationError("periods_per_year must be positive")


def ewma_weights(decay: float, count: int) -> np.ndarray:
    """Normalized recency weights, oldest first.

    The raw weight of an observation ``k`` steps before the as-of date is
    ``(1 - decay) * decay**k``; dividing by their sum makes them add to one.
    """
    if not 0.0 < decay < 1.0:
        raise InputValidationError(f"decay factor must lie in (0, 1), got {decay}")
    k = np.arange(count - 1, -1, -1, dtype=np.float64)
    raw = (1.0 - decay) * decay**k
    return raw / raw.sum()


def ewma_variance_init(returns, p: EwmaParams, end: int | None = None) -> float:
    """Seed variance from the ``N`` log-returns ending just before index ``end``.

    ``end`` defaults to the length of ``returns`` (the most recent window).
    """
    if isinstance(returns, ReturnSeries) and returns.kind != "log":
        raise InputValidationError("EWMA variance needs log returns")
    r = _observations(returns)
    end = r.size if end is None else end
    if end > r.size or end < p.init_window:
        raise InputValidationError(
            f"EWMA initialization needs {p.init_window} returns, only {min(end, r.size)} available"
        )
    window = r[end - p.init_window : end]
    return float(np.dot(ewma_weights(p.decay, p.init_window), window * window))


def ewma_variance_update(prev: float, new_log_return: float, decay: float) -> float:
    if not 0.0 < decay < 1.0:
        raise InputValidationError(f"decay factor must lie in (0, 1), got {decay}")
    if prev < 0:
        raise InputValidationError(f"previous variance must be >= 0, got {prev}")
    return decay * prev + (1.0 - decay) * new_log_return * new_log_return


def ewma_variance_path(returns, p: EwmaParams) -> np.ndarray:
    """EWMA variance as of every return; NaN before the seed window fills."""
    r = _observations(returns)
    out = np.full(r.size, np.nan)
    if r.size < p.init_window:
        return out
    t0 = p.init_window - 1
    var = ewma_variance_init(r, p, end=p.init_window)
    out[t0] = var
    lam = p.decay
    for t in range(t0 + 1, r.size):
        var = lam * var + (1.0 - lam) * r[t] * r[t]
        out[t] = var
    return out


def annualize(variance: float, n: int = 1, periods_per_year: int = TRADING_DAYS_PER_YEAR) -> float:
    """``sqrt((periods_per_year / n) * variance)``."""
    if variance < 0:
        raise InputValidationError(f"variance must be >= 0, got {variance}")
    if n < 1:
        raise InputValidationError(f"return horizon n must be >= 1, got {n}")
    return math.sqrt(periods_per_year / n * variance)


# --- realized volatility recipes ---------------------------------------------


VolMethod = Literal["ewma", "sample"]


@dataclass(frozen=True)
class VolRecipe:
    """How an engine measures realized volatility of its underlying.

    ``method="ewma"`` runs the exponentially weighted estimator with
    ``decay``; when ``decay_short`` is also set, the larger of the long- and
    short-horizon volatilities is used. ``method="sample"`` takes the
    population variance of the last ``window`` log-returns.
    """

    method: VolMethod = "ewma"
    decay: float = 0.94
    decay_short: float | None = None
    n: int = 1
    init_window: int = 20
    window: int = 20
    periods_per_year: int = TRADING_DAYS_PER_YEAR

    def __post_init__(self):
        if self.method not in ("ewma", "sample"):
            raise InputValidationError(f"unknown volatility method {self.method!r}")
        if self.method == "sample" and self.window < 2:
            raise InputValidationError("sample volatility window must be >= 2")
        self.ewma_params()  # raises on bad decay / window

    def ewma_params(self) -> list[EwmaParams]:
        if self.method != "ewma":
            return []
        decays = [self.decay] + ([self.decay_short] if self.decay_short is not None else [])
        return [EwmaParams(d, self.n, self.init_window, self.periods_per_year) for d in decays]

    @property
    def warmup(self) -> int:
        """Index of the first level with a defined volatility."""
        span = self.init_window if self.method == "ewma" else self.window
        return self.n + span - 1


def variance_path(series: LevelSeries, recipe: VolRecipe) -> np.ndarray:
    """Un-annualized variance as of each level (NaN during warm-up)."""
    out = np.full(len(series), np.nan)
    if len(series) <= recipe.n:
        return out
    r = to_returns(series, "log", recipe.n).values
    if recipe.method == "ewma":
        paths = [ewma_variance_path(r, p) for p in recipe.ewma_params()]
        var = paths[0] if len(paths) == 1 else np.fmax(paths[0], paths[1])
    else:
        var = np.full(r.size, np.nan)
        w = recipe.window
        if r.size >= w:
            win = np.lib.stride_tricks.sliding_window_view(r, w)
            var[w - 1 :] = win.var(axis=1)
    out[recipe.n :] = var
    return out


def realized_vol_path(series: LevelSeries, recipe: VolRecipe) -> np.ndarray:
    var = variance_path(series, recipe)
    return np.sqrt(recipe.periods_per_year / recipe.n * var)


@dataclass(frozen=True)
class VolEstimate:
    value: float
    variance: float
    method: str
    params: dict
    as_of: date

    def to_dict(self) -> dict:
        d = asdict(self)
        d["as_of"] = self.as_of.isoformat()
        return d


def realized_volatility(series: LevelSeries, recipe: VolRecipe = VolRecipe()) -> VolEstimate:
    """Annualized realized volatility as of the last date of ``series``."""
    var = variance_path(series, recipe)[-1]
    if not math.isfinite(var):
        raise InputValidationError(
            f"{series.label or 'series'}: {len(series)} levels is not enough history; "
            f"the {recipe.method} recipe needs at least {recipe.warmup + 1}"
        )
    if recipe.method == "ewma":
        method = "ewma-long" if recipe.decay_short is None else "ewma-max"
    else:
        method = "sample"
    return VolEstimate(
        value=annualize(float(var), recipe.n, recipe.periods_per_year),
        variance=float(var),
        method=method,
        params=asdict(recipe),
        as_of=series.end,
    )


# --- stationarity -------------------------------------------------------------


@dataclass(frozen=True)
class StationarityCheck:
    """Finite-difference estimate of one moment's drift across windows."""

    quantity: str
    window_values: tuple[float, ...]
    slopes: tuple[float, ...]
    relative_changes: tuple[float, ...]
    tolerance: float

    @property
    def max_relative_change(self) -> float:
        return max(self.relative_changes, default=0.0)

    @property
    def violated(self) -> bool:
        return self.max_relative_change > self.tolerance


@dataclass(frozen=True)
class StationarityReport:
    window: int
    checks: dict[str, StationarityCheck] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not any(c.violated for c in self.checks.values())

    def flags(self) -> dict[str, bool]:
        return {name: c.violated for name, c in self.checks.items()}

    def to_jsonl(self) -> str:
        lines = []
        for name, c in self.checks.items():
            rec = asdict(c)
            rec.update(window=self.window, violated=c.violated)
            lines.append(json.dumps(rec, sort_keys=True))
        return "\n".join(lines) + "\n"


def _relative(prev: float, cur: float, scale: float) -> float:
    change = abs(float(cur) - float(prev))
    if change == 0.0:
        return 0.0
    if scale == 0.0:
        return math.inf
    return change / float(scale)


def stationarity_diagnostic(xs, window: int, tolerance: float = 0.10) -> StationarityReport:
    """Check whether mean, variance and standard deviation drift with the sample.

    The data is cut into consecutive non-overlapping windows of ``window``
    observations. For each adjacent pair the change in a moment divided by
    ``window`` is the finite-difference slope with respect to sample length.
    A check is violated when any step's relative change exceeds
    ``tolerance``. Mean changes are scaled by ``max(|mean|, std)`` of the
    earlier window so a near-zero mean does not blow up the ratio.
    """
    x = _observations(xs)
    if window < 2:
        raise InputValidationError("stationarity window must be >= 2")
    if x.size < 2 * window:
        raise InputValidationError(
            f"need at least {2 * window} observations for window {window}, got {x.size}"
        )
    blocks = x[: (x.size // window) * window].reshape(-1, window)
    mu = blocks.mean(axis=1)
    var = blocks.var(axis=1)
    sd = np.sqrt(var)

    def check(name, vals, scales):
        rel = tuple(
            _relative(vals[k], vals[k + 1], scales[k]) for k in range(len(vals) - 1)
        )
        slopes = tuple(float(v) for v in np.diff(vals) / window)
        return StationarityCheck(name, tuple(float(v) for v in vals), slopes, rel, tolerance)

    checks = {
        "mean": check("mean", mu, np.maximum(np.abs(mu), sd)),
        "variance": check("variance", var, var),
        "std": check("std", sd, sd),
    }
    return StationarityReport(window, checks)
