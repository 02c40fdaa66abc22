"""Risk-controlled index engines, moment estimators and bias diagnostics."""

__version__ = "0.1.0"
