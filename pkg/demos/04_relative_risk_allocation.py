"""
Downside-risk budget across stocks, bonds and cash
==================================================

Each month the budget is a fraction of the all-stock semivariance over the
past 36 months. Weights sit on a 0.1% grid with a 5% floor.
"""

# %%
import numpy as np

from riskindexlab.engines import RISK_FRACTIONS, run_djrri
from riskindexlab.scenarios import month_end_dates
from riskindexlab.series import LevelSeries

rng = np.random.default_rng(12)
months = 60
R = np.column_stack([
    rng.normal(0.007, 0.045, months),
    rng.normal(0.003, 0.015, months),
    np.full(months, 0.0015),
])
dates = month_end_dates(2015, months + 1)
levels = 100 * np.vstack([np.ones(3), np.cumprod(1 + R, axis=0)])
stocks, bonds, cash = (LevelSeries(dates, levels[:, i], n)
                       for i, n in enumerate(("stocks", "bonds", "cash")))

# %%
for fraction in RISK_FRACTIONS:
    res = run_djrri(stocks, bonds, cash, fraction)
    w = np.mean([a.weights for a in res.allocations], axis=0)
    print(f"fraction {fraction:.1f}: mean weights {np.round(w, 3)}, "
          f"final level {res.composite.levels[-1]:.2f}")
