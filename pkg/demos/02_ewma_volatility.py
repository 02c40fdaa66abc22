"""
EWMA realized volatility
========================

Seed the exponentially weighted variance from a window of log returns,
roll it forward one return at a time and annualize.
"""

# %%
from datetime import date

import numpy as np

from riskindexlab.moments import (
    EwmaParams,
    VolRecipe,
    annualize,
    ewma_variance_path,
    ewma_weights,
    realized_volatility,
)
from riskindexlab.scenarios import business_dates, path_to_series, regime_switch_paths

# weights for a 20-observation seed window, oldest first
w = ewma_weights(0.94, 20)
print("oldest weight %.4f, newest weight %.4f, sum %.12f" % (w[0], w[-1], w.sum()))

# %%
# A path whose volatility doubles half way through.
path = regime_switch_paths(1, 500, 1, sigma=0.15, seed=3)[0, :, 0]
series = path_to_series(path, business_dates(date(2022, 1, 3), 501), "demo")
r = np.diff(np.log(series.levels))

var = ewma_variance_path(r, EwmaParams(decay=0.94))
for t in (100, 240, 260, 300, 499):
    print(f"step {t:3d}: annualized vol {annualize(var[t]):.3f}")

# %%
# Long decay alone against the larger of a long and a short decay.
long_only = realized_volatility(series, VolRecipe(decay=0.97))
with_short = realized_volatility(series, VolRecipe(decay=0.97, decay_short=0.80))
print(long_only.method, round(long_only.value, 4))
print(with_short.method, round(with_short.value, 4))
