"""Seeded synthetic price paths for experiments and tests.

Each path draws from its own generator seeded with ``(seed, path_index)``,
so a path's values do not depend on how many other paths are generated or
in what order.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from .errors import InputValidationError
from .series import LevelSeries


def business_dates(start: date, count: int) -> tuple[date, ...]:
    """``count`` consecutive weekdays starting at (or after) ``start``."""
    out = []
    d = start
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return tuple(out)


def month_end_dates(start_year: int, count: int) -> tuple[date, ...]:
    out = []
    y, m = start_year, 1
    for _ in range(count):
        nxt = date(y + (m == 12), m % 12 + 1, 1)
        out.append(nxt - timedelta(days=1))
        y, m = nxt.year, nxt.month
    return tuple(out)


def regime_switch_paths(
    n_paths: int,
    n_steps: int,
    n_assets: int = 1,
    sigma: float = 0.15,
    sigma_high: float | None = None,
    switch_at: int | None = None,
    mu: float = 0.0,
    rho: float = 0.0,
    seed: int = 0,
    s0: float = 100.0,
    periods_per_year: int = 252,
) -> np.ndarray:
    """Geometric Brownian paths whose volatility jumps once.

    Steps before ``switch_at`` (default: mid-sample) use annualized
    volatility ``sigma``; later steps use ``sigma_high`` (default
    ``2 * sigma``). Assets share pairwise correlation ``rho``.

    Returns:
        Array of shape ``(n_paths, n_steps + 1, n_assets)`` starting at ``s0``.
    """
    if n_paths < 1 or n_steps < 1 or n_assets < 1:
        raise InputValidationError("n_paths, n_steps and n_assets must be positive")
    if sigma < 0:
        raise InputValidationError("sigma must be >= 0")
    if n_assets > 1 and not -1.0 / (n_assets - 1) <= rho <= 1.0:
        raise InputValidationError(f"rho {rho} is not a valid equicorrelation")
    sigma_high = 2.0 * sigma if sigma_high is None else sigma_high
    switch_at = n_steps // 2 if switch_at is None else switch_at
    dt = 1.0 / periods_per_year
    vol = np.where(np.arange(n_steps) < switch_at, sigma, sigma_high)[:, None]

    corr = np.full((n_assets, n_assets), rho) + (1.0 - rho) * np.eye(n_assets)
    # eigen-factor instead of Cholesky so rho = 1 is allowed
    evals, evecs = np.linalg.eigh(corr)
    factor = evecs * np.sqrt(np.clip(evals, 0.0, None))

    out = np.empty((n_paths, n_steps + 1, n_assets))
    for p in range(n_paths):
        rng = np.random.default_rng([seed, p])
        z = rng.standard_normal((n_steps, n_assets)) @ factor.T
        logret = (mu - 0.5 * vol**2) * dt + vol * np.sqrt(dt) * z
        out[p, 0] = s0
        out[p, 1:] = s0 * np.exp(np.cumsum(logret, axis=0))
    return out


def path_to_series(path: np.ndarray, dates, label: str = "") -> LevelSeries:
    return LevelSeries(dates, np.asarray(path, dtype=np.float64), label)
