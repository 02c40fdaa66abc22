"""Risk-control index engines."""

from .djrri import CMAC_NAMES, RISK_FRACTIONS, CmacAllocation, DjrriResult, allocate_cmac, run_djrri
from .leverage import LeverageParams, LeverageSchedule, leverage_hsrai, leverage_sprci
from .riskcontrol import RiskControlSeries, roll_3m_rate, run_hsrai, run_sprci
from .stablerisk import (
    FuturesPortfolio,
    StableRiskParams,
    StableRiskPaths,
    StableRiskResult,
    apply_threshold,
    portfolio_volatility,
    simulate_stablerisk,
    simulate_stablerisk_paths,
)

__all__ = [
    "CMAC_NAMES", "RISK_FRACTIONS", "CmacAllocation", "DjrriResult", "allocate_cmac", "run_djrri",
    "LeverageParams", "LeverageSchedule", "leverage_hsrai", "leverage_sprci",
    "RiskControlSeries", "roll_3m_rate", "run_hsrai", "run_sprci",
    "FuturesPortfolio", "StableRiskParams", "StableRiskPaths", "StableRiskResult",
    "apply_threshold", "portfolio_volatility", "simulate_stablerisk", "simulate_stablerisk_paths",
]
