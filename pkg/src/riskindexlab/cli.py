"""Command-line interface: ``riskindexlab {ingest,vol,index,diagnose}``.

Settings come from built-in defaults, then an optional flat ``key = value``
config file (``--config``), then command-line flags. The effective values
and the seed are written into every JSON artifact. Exit codes: 0 success,
2 input or configuration error, 3 numeric failure, 4 engine precondition.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict
from typing import Any, Sequence

import numpy as np

from . import diagnostics as dg
from .engines import (
    LeverageParams,
    StableRiskParams,
    run_djrri,
    run_hsrai,
    run_sprci,
    simulate_stablerisk,
)
from .errors import EnginePreconditionError, InputValidationError, NumericError
from .moments import VolRecipe, realized_volatility
from .series import format_csv, ingest_csv, ingest_rates_csv

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_ENGINE = 0, 2, 3, 4
SEED_ENV = "RISKINDEXLAB_SEED"
DEFAULT_SEED = 42

DEFAULTS: dict[str, Any] = {
    "out": None,
    "format": "csv",
    "date_col": "date",
    "level_col": "level",
    "rate_col": "rate",
    # volatility
    "method": "ewma",
    "lambda_long": 0.94,
    "lambda_short": None,
    "n": 1,
    "init_window": 20,
    "window": 20,
    # leverage
    "tv": 0.10,
    "cap": 1.5,
    "floor": 0.0,
    "lag": 2,
    "rebalance_every": 1,
    "base": 100.0,
    "rate": None,
    "accrual": "simple-rate",
    # djrri
    "risk_fraction": 1.0,
    "expected_returns": None,
    "measure": "semivariance",
    # stablerisk
    "threshold": 0.25,
    "cost_bps": 5.0,
    "cov_window": 63,
    "realized_window": 63,
    "cash_fraction": 0.8,
    # diagnostics
    "rv_min": 0.08,
    "rv_max": 0.48,
    "step": 0.01,
    "noise_window": 21,
    "lags": "1,3,5,10",
}

INT_KEYS = {"n", "init_window", "window", "lag", "rebalance_every", "cov_window",
            "realized_window", "noise_window", "seed"}
FLOAT_KEYS = {"lambda_long", "lambda_short", "tv", "cap", "floor", "base", "rate",
              "risk_fraction", "threshold", "cost_bps", "cash_fraction", "rv_min", "rv_max",
              "step"}


class ConfigError(InputValidationError):
    pass


def read_config(path: str) -> dict[str, Any]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, Any] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value: Any) -> Any:
    if value is None or (isinstance(value, str) and value.lower() in ("", "none")):
        return None
    try:
        if key in INT_KEYS:
            return int(value)
        if key in FLOAT_KEYS:
            v = float(value)
            if math.isnan(v):
                raise ValueError
            return v
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None
    return value


def effective_config(args: argparse.Namespace) -> dict[str, Any]:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("config", "func") or value is None:
            continue
        cfg[key] = value
    if cfg.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        cfg["seed"] = env if env not in (None, "") else DEFAULT_SEED
    return {k: _coerce(k, v) for k, v in cfg.items()}


def _dumps(obj: Any) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if hasattr(o, "isoformat"):
            return o.isoformat()
        return str(o)

    return json.dumps(obj, sort_keys=True, indent=2, default=default, allow_nan=True) + "\n"


def _config_record(cfg: dict[str, Any]) -> dict[str, Any]:
    # the output directory does not change results, so it stays out of the hash
    body = json.dumps({k: v for k, v in cfg.items() if k != "out"}, sort_keys=True, default=str)
    return {"config": cfg, "seed": cfg["seed"],
            "config_sha256": hashlib.sha256(body.encode()).hexdigest()}


def _write(cfg: dict[str, Any], name: str, text: str) -> str:
    out = cfg["out"] or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, name)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def _records_text(records: list[dict], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    buf = io.StringIO()
    if records:
        wr = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        wr.writeheader()
        wr.writerows(records)
    return buf.getvalue()


def _require(cfg: dict[str, Any], *keys: str) -> None:
    missing = [k for k in keys if not cfg.get(k)]
    if missing:
        raise ConfigError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _vol_recipe(cfg: dict[str, Any]) -> VolRecipe:
    return VolRecipe(method=cfg["method"], decay=cfg["lambda_long"], decay_short=cfg["lambda_short"],
                     n=cfg["n"], init_window=cfg["init_window"], window=cfg["window"])


def _levels(cfg: dict[str, Any], key: str):
    return ingest_csv(cfg[key], cfg["date_col"], cfg["level_col"])


def _rates(cfg: dict[str, Any], key: str = "rates"):
    if cfg.get(key):
        return ingest_rates_csv(cfg[key], cfg["date_col"], cfg["rate_col"])
    return None


# --- commands -----------------------------------------------------------------


def cmd_ingest(cfg: dict[str, Any]) -> int:
    _require(cfg, "input")
    series = ingest_csv(cfg["input"], cfg["date_col"], cfg["level_col"])
    text = format_csv(series.dates, series.levels, cfg["date_col"], cfg["level_col"])
    if cfg["out"]:
        _write(cfg, f"{series.label}.csv", text)
        summary = {**_config_record(cfg), "rows": len(series), "start": series.start,
                   "end": series.end, "label": series.label}
        _write(cfg, f"{series.label}.json", _dumps(summary))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_vol(cfg: dict[str, Any]) -> int:
    _require(cfg, "input")
    series = _levels(cfg, "input")
    est = realized_volatility(series, _vol_recipe(cfg))
    _write(cfg, "vol.json", _dumps({**_config_record(cfg), **est.to_dict()}))
    print(f"{series.label}: annualized volatility {est.value:.6f} as of {est.as_of}")
    return EXIT_OK


def _leverage(cfg: dict[str, Any]) -> LeverageParams:
    cap = cfg["cap"] if cfg["cap"] is not None else math.inf
    return LeverageParams(tv=cfg["tv"], cap=cap, floor=cfg["floor"] or 0.0, lag=cfg["lag"])


def cmd_index(cfg: dict[str, Any]) -> int:
    engine = cfg["engine"]
    meta = _config_record(cfg)
    if engine in ("hsrai", "sprci"):
        _require(cfg, "underlying")
        roll = engine == "sprci" and cfg["accrual"] == "roll-3m"
        if roll:
            _require(cfg, "ir2m", "ir3m")
        elif not cfg.get("rates") and cfg.get("rate") is None:
            raise ConfigError(f"{engine} needs --rates FILE (or a flat --rate)")
        underlying = _levels(cfg, "underlying")
        rates = _rates(cfg) if cfg.get("rates") else cfg.get("rate")
        p = _leverage(cfg)
        vol = _vol_recipe(cfg)
        if engine == "hsrai":
            res = run_hsrai(underlying, rates, p, vol, cfg["rebalance_every"], cfg["base"])
        else:
            res = run_sprci(underlying, rates, p, cfg["accrual"], vol, cfg["rebalance_every"],
                            cfg["base"], ir2m=_rates(cfg, "ir2m"), ir3m=_rates(cfg, "ir3m"))
        levels_text = format_csv(res.dates, res.levels)
        sidecar = {**meta, "engine": engine, "params": res.params, "steps": res.to_records(),
                   "schedule": res.schedule.to_records(),
                   "decomposition_residual": res.decomposition_residual()}
    elif engine == "djrri":
        _require(cfg, "stocks", "bonds", "cash")
        er = cfg.get("expected_returns")
        if er is not None:
            try:
                er = [float(x) for x in str(er).split(",")]
            except ValueError:
                raise ConfigError(f"invalid --expected-returns {er!r}") from None
        res = run_djrri(_levels(cfg, "stocks"), _levels(cfg, "bonds"), _levels(cfg, "cash"),
                        cfg["risk_fraction"], er, measure=cfg["measure"], base=cfg["base"])
        levels_text = format_csv(res.composite.dates, res.composite.levels)
        sidecar = {**meta, "engine": engine,
                   "allocations": [a.to_record() for a in res.allocations]}
    elif engine == "stablerisk":
        _require(cfg, "contracts")
        contracts = [ingest_csv(p, cfg["date_col"], cfg["level_col"]) for p in cfg["contracts"]]
        if cfg.get("rates"):
            rates = _rates(cfg)
        else:
            rates = cfg.get("rate") or 0.0
        params = StableRiskParams(target_vol=cfg["tv"], threshold=cfg["threshold"],
                                  cost_rate=cfg["cost_bps"] / 10_000.0, cov_window=cfg["cov_window"],
                                  cash_fraction=cfg["cash_fraction"],
                                  rebalance_every=cfg["rebalance_every"],
                                  realized_window=cfg["realized_window"], base=cfg["base"])
        res = simulate_stablerisk(contracts, params, rates)
        paths = res.paths
        levels_text = format_csv(res.dates, res.values)
        steps = []
        for i, d in enumerate(res.dates):
            steps.append({"date": d, "value": res.values[i],
                          "positions": paths.positions[0, i], "traded": paths.traded[0, i],
                          "cost": paths.cost[0, i],
                          "pnl": paths.pnl[0, i - 1] if i else None,
                          "accrual": paths.accrual[0, i - 1] if i else None,
                          "realized_vol": paths.realized_vol[0, i - 1] if i else None})
        sidecar = {**meta, "engine": engine, "params": asdict(params),
                   "contracts": [c.label for c in contracts], "steps": steps,
                   "conservation_residual": paths.conservation_residual(),
                   "band_exit": bool(paths.band_exits()[0])}
    else:
        raise ConfigError(f"unknown engine {engine!r}")
    _write(cfg, f"{engine}.csv", levels_text)
    _write(cfg, f"{engine}.json", _dumps(sidecar))
    return EXIT_OK


def cmd_diagnose(cfg: dict[str, Any]) -> int:
    which = cfg["which"]
    meta = _config_record(cfg)
    fmt = cfg["format"]
    ext = "jsonl" if fmt == "jsonl" else "csv"
    if which == "table1":
        cap = cfg["cap_table"] if cfg.get("cap_table") is not None else math.inf
        table = dg.lf_sensitivity_table(cfg["tv"], cfg["rv_min"], cfg["rv_max"], cfg["step"],
                                        cap, cfg.get("floor_table") or 0.0)
        records = [{"tv": float(r.tv), "rv": float(r.rv), "d_rv": float(r.d_rv),
                    "lf": float(r.lf), "d_lf": float(r.d_lf)} for r in table.rows]
        text = table.to_csv() if fmt == "csv" else _records_text(records, fmt)
        _write(cfg, f"table1.{ext}", text)
        _write(cfg, "table1.json", _dumps({**meta, "rows": len(table)}))
    elif which == "leakage":
        lags = [int(x) for x in str(cfg["lags"]).split(",")]
        scenario = dg.LeakageScenario(seed=cfg["seed"])
        p = _leverage(cfg)
        report = dg.leakage_experiment(scenario, lags, p, _vol_recipe(cfg), cfg.get("rate") or 0.0)
        records = [{"lag": d, "realized_vol": v, "leakage": lk}
                   for d, v, lk in zip(report.lags, report.realized_vol, report.leakage)]
        _write(cfg, f"leakage.{ext}", _records_text(records, fmt))
        _write(cfg, "leakage.json", _dumps({**meta, "monotone": report.monotone,
                                             "underlying_vol": report.underlying_vol,
                                             "status": report.status, "params": report.params}))
    elif which == "noise":
        _require(cfg, "index", "market")
        idx, mkt = _levels(cfg, "index"), _levels(cfg, "market")
        w = cfg["noise_window"]
        nz = dg.noise(idx, mkt, w)
        records = [{"date": d.isoformat(), "noise": float(v)} for d, v in zip(idx.dates[w:], nz)]
        _write(cfg, f"noise.{ext}", _records_text(records, fmt))
        _write(cfg, "noise.json", _dumps({**meta, "mean_abs_noise": float(np.mean(np.abs(nz)))}))
    elif which == "compound":
        if cfg.get("input"):
            table = dg.compound_table(_read_matrix(cfg["input"]))
        else:
            table = dg.ladder_compound_table()
        R = table.returns
        _write(cfg, f"compound.{ext}", table.to_csv() if fmt == "csv" else _records_text(
            [{"row": i + 1, "compounded": float(c), "row_std": float(s)}
             for i, (c, s) in enumerate(zip(table.compounded, table.row_std))], fmt))
        _write(cfg, "compound.json", _dumps({**meta, "rows": int(R.shape[0]),
                                              "periods": int(R.shape[1])}))
    elif which == "bias":
        _require(cfg, "index", "market")
        bs = dg.bias_series(_levels(cfg, "index"), _levels(cfg, "market"), cfg["noise_window"])
        _write(cfg, f"bias.{ext}", bs.to_csv() if fmt == "csv" else _records_text(
            [{"date": d.isoformat(), "bias": float(b)} for d, b in zip(bs.dates, bs.bias)], fmt))
        _write(cfg, "bias.json", _dumps({**meta, "comovement": bs.comovement,
                                          "telescoping_residual": bs.telescoping_residual()}))
    else:
        raise ConfigError(f"unknown diagnostic {which!r}")
    return EXIT_OK


def _read_matrix(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise InputValidationError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        return np.array([[float(x) for x in r] for r in rows])
    except ValueError:
        raise InputValidationError(f"{path}: returns matrix must be numeric CSV without header") from None


# --- parser --------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--config", help="flat key = value settings file")
    g.add_argument("--out", help="output directory")
    g.add_argument("--seed", type=int, help=f"master seed (fallback: ${SEED_ENV})")
    g.add_argument("--format", choices=["csv", "jsonl"])
    g.add_argument("--date-col", dest="date_col")
    g.add_argument("--level-col", dest="level_col")
    g.add_argument("--rate-col", dest="rate_col")


def _vol_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("volatility")
    g.add_argument("--method", choices=["ewma", "sample"])
    g.add_argument("--lambda-long", dest="lambda_long", type=float)
    g.add_argument("--lambda-short", dest="lambda_short", type=float)
    g.add_argument("--n", type=int, help="return horizon in observations")
    g.add_argument("--init-window", dest="init_window", type=int)
    g.add_argument("--window", type=int, help="sample-volatility window")


def _lev_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("leverage")
    g.add_argument("--tv", type=float, help="target volatility")
    g.add_argument("--cap", type=float)
    g.add_argument("--floor", type=float)
    g.add_argument("--lag", type=int)
    g.add_argument("--rebalance-every", dest="rebalance_every", type=int)
    g.add_argument("--base", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskindexlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a date,level CSV")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("vol", help="realized volatility of a level series")
    p.add_argument("input")
    _common(p)
    _vol_flags(p)
    p.set_defaults(func=cmd_vol)

    p = sub.add_parser("index", help="compute a risk-control index")
    p.add_argument("engine", choices=["hsrai", "sprci", "djrri", "stablerisk"])
    _common(p)
    _vol_flags(p)
    _lev_flags(p)
    g = p.add_argument_group("inputs")
    g.add_argument("--underlying")
    g.add_argument("--rates", help="date,rate CSV (decimal per annum)")
    g.add_argument("--rate", type=float, help="flat rate instead of --rates")
    g.add_argument("--accrual", choices=["simple-rate", "roll-3m"])
    g.add_argument("--ir2m")
    g.add_argument("--ir3m")
    g.add_argument("--stocks")
    g.add_argument("--bonds")
    g.add_argument("--cash")
    g.add_argument("--risk-fraction", dest="risk_fraction", type=float)
    g.add_argument("--expected-returns", dest="expected_returns",
                   help="comma-separated stocks,bonds,cash")
    g.add_argument("--measure", choices=["semivariance", "semideviation"])
    g.add_argument("--contracts", nargs="+")
    g.add_argument("--threshold", type=float)
    g.add_argument("--cost-bps", dest="cost_bps", type=float)
    g.add_argument("--cov-window", dest="cov_window", type=int)
    g.add_argument("--realized-window", dest="realized_window", type=int)
    g.add_argument("--cash-fraction", dest="cash_fraction", type=float)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("diagnose", help="bias and sensitivity diagnostics")
    p.add_argument("which", choices=["table1", "leakage", "noise", "compound", "bias"])
    _common(p)
    _vol_flags(p)
    g = p.add_argument_group("diagnostic inputs")
    g.add_argument("--tv", type=float)
    g.add_argument("--rv-min", dest="rv_min", type=float)
    g.add_argument("--rv-max", dest="rv_max", type=float)
    g.add_argument("--step", type=float)
    g.add_argument("--table-cap", dest="cap_table", type=float,
                   help="leverage cap for table1 (default: uncapped)")
    g.add_argument("--table-floor", dest="floor_table", type=float)
    g.add_argument("--cap", type=float, help="leverage cap for the leakage engine")
    g.add_argument("--floor", type=float)
    g.add_argument("--lag", type=int)
    g.add_argument("--lags", help="comma-separated rebalance intervals for leakage")
    g.add_argument("--rate", type=float)
    g.add_argument("--index")
    g.add_argument("--market")
    g.add_argument("--noise-window", dest="noise_window", type=int)
    g.add_argument("--input", help="returns matrix CSV for compound (no header)")
    p.set_defaults(func=cmd_diagnose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func = args.func
    try:
        code = func(effective_config(args))
    except (ConfigError, InputValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EnginePreconditionError as exc:
        print(f"engine precondition failed: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    return code


if __name__ == "__main__":
    sys.exit(main())
