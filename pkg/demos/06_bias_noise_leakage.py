"""
Bias, noise and volatility leakage
==================================

Compare a risk-control index with its own underlying: the rebased level
gap, the window noise, and how realized index volatility grows when the
leverage is reset less often.
"""

# %%
import numpy as np

from riskindexlab.diagnostics import (
    LeakageScenario,
    bias_series,
    ladder_compound_table,
    leakage_experiment,
    noise,
)
from riskindexlab.engines import LeverageParams, run_hsrai
from riskindexlab.series import LevelSeries

scenario = LeakageScenario(seed=42)
underlying = scenario.underlying()
index = run_hsrai(underlying, 0.0, LeverageParams(0.10, cap=1.5))
market = LevelSeries(index.dates, underlying.levels[-len(index):], "underlying")

# %%
bias = bias_series(index.as_level_series(), market)
print("final bias %.2f, telescoping residual %.1e" % (bias.bias[-1], bias.telescoping_residual()))
print("mean |noise| over 21 observations: %.4f" % np.mean(np.abs(noise(index.as_level_series(), market))))

# %%
report = leakage_experiment(scenario)
for d, v, lk in zip(report.lags, report.realized_vol, report.leakage):
    print(f"rebalance every {d:2d}: realized vol {v:.4f}, leakage {lk:.4f}")
print("monotone:", report.monotone)

# %%
# Same compounded return, different path dispersion.
table = ladder_compound_table()
print(table.to_csv().splitlines()[0])
print("\n".join(table.to_csv().splitlines()[1:4]))
