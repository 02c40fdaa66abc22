"""
Leverage factor sensitivity
===========================

How much does the leverage factor move for each extra point of realized
volatility? With a 20% target the answer shrinks quickly as volatility
rises.
"""

# %%
from fractions import Fraction

from riskindexlab.diagnostics import exact_grid, lf_sensitivity_table

table = lf_sensitivity_table(0.20, 0.08, 0.48, 0.01)
print(table.to_csv())

# %%
# The same grid on exact rationals: every step is smaller than the last.
exact = exact_grid("1/5", "2/25", "12/25", "1/100")
steps = [r.d_lf for r in exact.rows[1:]]
print("first step", steps[0], "=", float(steps[0]))
print("last step ", steps[-1], "=", float(steps[-1]))
print("all shrinking:", all(abs(b) < abs(a) for a, b in zip(steps, steps[1:])))

# %%
# A cap and floor flatten the ends of the curve.
clipped = lf_sensitivity_table(0.20, 0.05, 0.60, 0.05, cap=1.5, floor=0.5)
for row in clipped.rows:
    print(f"RV {row.rv:5.2f}  LF {row.lf:5.3f}")

assert isinstance(exact.rows[0].lf, Fraction)
