import csv
import json
import math
from datetime import date
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, daily_series
from riskindexlab.diagnostics import (
    VARIANCE_COMPONENTS,
    LeakageScenario,
    bias_series,
    compound_table,
    decompose_variance,
    exact_grid,
    ladder_compound_table,
    leakage_experiment,
    lf_sensitivity_table,
    noise,
    sharpe,
    single_to_double_digit_scenarios,
    step_scenarios,
)
from riskindexlab.engines import LeverageParams, run_hsrai
from riskindexlab.errors import InputValidationError, NumericError
from riskindexlab.scenarios import business_dates, regime_switch_paths
from riskindexlab.series import LevelSeries, ReturnSeries


def read_reference(name):
    with open(f"{DATA}/{name}") as fh:
        return list(csv.DictReader(fh))


# --- sensitivity table ------------------------------------------------------------


def test_table_examples():
    t = lf_sensitivity_table(0.20, 0.08, 0.48, 0.01)
    assert len(t) == 41
    r = t.row_at(0.09)
    assert 100 * r.lf == pytest.approx(222.2, abs=0.05)
    assert 100 * r.d_lf == pytest.approx(-27.778, abs=5e-4)
    assert 100 * t.row_at(0.27).d_lf == pytest.approx(-2.849, abs=5e-4)
    assert 100 * t.row_at(0.47).d_lf == pytest.approx(-0.925, abs=5e-4)
    single = lf_sensitivity_table(0.2, 0.2, 0.2, 0.01)
    assert len(single) == 1 and single.rows[0].lf == 1.0 and single.rows[0].d_lf == 0


def test_table_matches_reference_grid():
    t = lf_sensitivity_table(0.20, 0.08, 0.48, 0.01)
    ref = read_reference("lf_grid_reference.csv")
    assert len(ref) == len(t)
    for row, want in zip(t.rows, ref):
        assert 100 * row.rv == pytest.approx(float(want["rv_pct"]), abs=1e-9)
        assert abs(100 * row.lf - float(want["lf_pct"])) <= 0.05 + 1e-9
        assert abs(100 * row.d_lf - float(want["d_lf_pp"])) <= 5e-4 + 1e-9


def test_table_csv_and_errors():
    t = lf_sensitivity_table(0.20, 0.08, 0.10, 0.01)
    lines = t.to_csv().splitlines()
    assert lines[0] == "tv_pct,rv_pct,d_rv_pct,lf_pct,d_lf_pp"
    assert lines[2] == "20.00,9.00,1.00,222.2,-27.778"
    with pytest.raises(InputValidationError):
        lf_sensitivity_table(0.2, 0.3, 0.1, 0.01)
    with pytest.raises(InputValidationError):
        lf_sensitivity_table(0.2, 0.1, 0.3, 0)


def test_table_cap_and_floor_clip():
    t = lf_sensitivity_table(0.2, 0.05, 0.80, 0.05, cap=1.5, floor=0.3)
    lf = t.column("lf")
    assert max(lf) == 1.5 and min(lf) == 0.3


def test_exact_grid_shape_properties():
    t = exact_grid("1/5", "2/25", "12/25", "1/100")
    lf = t.column("lf")
    assert all(isinstance(v, Fraction) for v in lf)
    d1 = [b - a for a, b in zip(lf, lf[1:])]
    d2 = [b - a for a, b in zip(d1, d1[1:])]
    assert all(d < 0 for d in d1)
    assert all(d > 0 for d in d2)
    assert all(abs(b) < abs(a) for a, b in zip(d1, d1[1:]))
    assert [r.d_lf for r in t.rows[1:]] == d1


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 50), st.integers(1, 40), st.integers(2, 30), st.integers(1, 5))
def test_exact_grid_property_any_grid(tv, lo, n, step):
    t = lf_sensitivity_table(Fraction(tv, 100), Fraction(lo, 100), Fraction(lo + n * step, 100),
                             Fraction(step, 100))
    d = [r.d_lf for r in t.rows[1:]]
    assert all(x < 0 for x in d)
    assert all(abs(b) < abs(a) for a, b in zip(d, d[1:]))


# --- compound table -----------------------------------------------------------------


def test_compound_anchors():
    t = compound_table([[0.05] * 12, [0.10] * 12, [-0.05] * 12])
    np.testing.assert_allclose(100 * t.compounded, [79.59, 213.84, -45.96], atol=0.005)
    assert t.compounded[0] == pytest.approx(1.05**12 - 1, abs=1e-12)


def test_compound_ladders_match_reference():
    t = ladder_compound_table()
    assert t.returns.shape == (39, 12)
    assert t.compounded_change[13] == 0 and t.compounded_change[26] == 0
    for i, want in enumerate(read_reference("compound_reference.csv")):
        assert abs(100 * t.compounded[i] - float(want["compounded_pct"])) <= 0.005 + 1e-9
        assert abs(100 * t.compounded_change[i] - float(want["compounded_change_pct"])) <= 0.005 + 1e-9
        assert abs(100 * t.row_std[i] - float(want["row_std_pct"])) <= 5e-4 + 1e-9
        assert abs(100 * t.row_std_change[i] - float(want["row_std_change_pct"])) <= 0.005 + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=2, max_size=24), st.randoms(use_true_random=False))
def test_compound_permutation_invariance(row, rnd):
    perm = row[:]
    rnd.shuffle(perm)
    t = compound_table([row, perm])
    assert t.compounded[1] == pytest.approx(t.compounded[0], rel=1e-12, abs=1e-14)
    assert t.row_std[1] == pytest.approx(t.row_std[0], rel=1e-12, abs=1e-14)


def test_compound_period_std_changes_with_order():
    rows = step_scenarios(12, 0.05, 0.10)
    rng = np.random.default_rng(0)
    back = np.array([rng.permutation(r) for r in rows])
    a, b = compound_table(rows), compound_table(back)
    np.testing.assert_allclose(a.compounded, b.compounded, rtol=1e-14)
    assert not np.allclose(a.period_std, b.period_std)


def test_compound_rejects_total_loss():
    with pytest.raises(InputValidationError):
        compound_table([[0.1, -1.0]])


# --- noise and bias -----------------------------------------------------------------


def test_noise_examples():
    m = daily_series(np.linspace(100, 130, 40))
    assert np.all(noise(m, m, 5) == 0)
    flat = daily_series([100.0] * 22)
    up = daily_series(np.r_[100.0, np.full(20, 105.0), 110.0])
    assert noise(flat, up, 21)[0] == pytest.approx(-0.10, abs=1e-15)
    with pytest.raises(InputValidationError):
        noise(m, daily_series(m.levels[:-1]), 5)


def test_noise_hsrai_high_vol_regime():
    seed = 17
    path = regime_switch_paths(1, 400, 1, sigma=0.30, sigma_high=0.60, seed=seed)[0, :, 0]
    u = LevelSeries(business_dates(date(2020, 1, 1), 401), path, "u")
    idx = run_hsrai(u, 0.0, LeverageParams(0.10, cap=1.5))
    market = LevelSeries(idx.dates, u.levels[-len(idx):], "u")
    nz = noise(idx.as_level_series(), market, 21)
    assert np.mean(np.abs(nz)) > 0.01


def test_bias_identity_and_scaled_growth():
    m = daily_series(np.linspace(100, 150, 60))
    b = bias_series(m, m)
    assert np.all(b.bias == 0) and np.all(b.increments == 0)
    idx = daily_series(m.levels * 1.01 ** np.arange(60))
    b = bias_series(idx, m)
    assert np.all(b.increments > 0)
    assert b.telescoping_residual() <= 1e-12
    text = b.to_csv().splitlines()
    assert text[0] == "date,index,market,bias,increment" and len(text) == 61


def test_bias_hsrai_telescoping():
    rng = np.random.default_rng(23)
    u = daily_series(100 * np.exp(np.cumsum(np.r_[0, rng.normal(0, 0.02, 299)])))
    idx = run_hsrai(u, 0.01, LeverageParams(0.10, cap=1.5))
    market = LevelSeries(idx.dates, u.levels[-len(idx):])
    b = bias_series(idx.as_level_series(), market)
    assert b.telescoping_residual() <= 1e-12
    assert b.noise.size == len(idx) - 21
    assert -1 <= b.comovement <= 1


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 400))
def test_telescoping_property(seed, n):
    rng = np.random.default_rng(seed)
    a = daily_series(100 * np.exp(np.cumsum(rng.normal(0, 0.03, n))))
    b = daily_series(50 * np.exp(np.cumsum(rng.normal(0, 0.03, n))))
    assert bias_series(a, b).telescoping_residual() <= 1e-12


# --- leakage -------------------------------------------------------------------------


def test_leakage_reference_seed_matches_golden():
    with open(f"{DATA}/golden_leakage.json") as fh:
        golden = json.load(fh)
    rep = leakage_experiment(LeakageScenario(**golden["scenario"]), golden["lags"])
    assert list(rep.lags) == golden["lags"]
    np.testing.assert_allclose(rep.realized_vol, golden["realized_vol"], rtol=1e-12)
    assert rep.monotone
    assert rep.realized_vol[-1] >= rep.realized_vol[0]
    assert rep.status == "targeted"


def test_leakage_zero_vol_and_pass_through():
    flat = daily_series([100.0] * 80)
    rep = leakage_experiment(flat)
    assert rep.leakage == (0.0, 0.0, 0.0, 0.0)
    u = LeakageScenario(n_steps=200, switch_at=100).underlying()
    rep = leakage_experiment(u, params=LeverageParams(0.1, cap=1, floor=1))
    assert rep.status == "pass-through"
    assert max(rep.realized_vol) - min(rep.realized_vol) <= 1e-12
    records = [json.loads(l) for l in rep.to_jsonl().splitlines()]
    assert records[-1]["summary"] and len(records) == 5


def test_leakage_rejects_bad_lag():
    with pytest.raises(InputValidationError):
        leakage_experiment(daily_series([100.0] * 40), lags=[0, 1])


# --- variance decomposition and Sharpe ---------------------------------------------------


def test_decompose_variance_examples():
    assert decompose_variance([0.0] * 8).total == 0
    assert decompose_variance({"liquidity": 0.04}).total == 0.04
    assert decompose_variance([0.01] * 8).total == pytest.approx(0.08, abs=1e-15)
    with pytest.raises(InputValidationError):
        decompose_variance([0.01] * 7 + [-0.01])
    with pytest.raises(InputValidationError):
        decompose_variance({"bogus": 1.0})


@given(st.lists(st.floats(0, 1), min_size=8, max_size=8), st.permutations(range(8)))
def test_decompose_variance_order_independent(vals, perm):
    forward = decompose_variance(dict(zip(VARIANCE_COMPONENTS, vals)))
    shuffled = decompose_variance({VARIANCE_COMPONENTS[i]: vals[i] for i in perm})
    assert forward == shuffled
    assert forward.total == pytest.approx(math.fsum(vals), abs=1e-12)


def test_sharpe_examples():
    assert sharpe([0.01, 0.03]) == pytest.approx(2.0, abs=1e-12)
    assert sharpe([0.02, 0.02, 0.02], risk_free=0.02) == 0.0
    with pytest.raises(NumericError):
        sharpe([0.01, 0.01, 0.01])
    rs = ReturnSeries(daily_series([1.0, 2.0]).dates, np.array([0.03, 0.05]), "simple", 1)
    assert sharpe(rs, risk_free=0.02) == pytest.approx(2.0, abs=1e-12)
