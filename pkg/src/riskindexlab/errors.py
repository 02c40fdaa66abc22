"""Exception hierarchy shared by every module.

The CLI maps these onto its exit codes, so library callers and scripts see
the same failure categories.
"""


class RiskIndexError(Exception):
    """Base class for all package errors."""


class InputValidationError(RiskIndexError, ValueError):
    """Bad input data or configuration (malformed CSV, invariant violation)."""


class NumericError(RiskIndexError, ArithmeticError):
    """A computation could not produce a finite, meaningful number."""


class EnginePreconditionError(RiskIndexError):
    """An engine was asked to run without the data it needs."""


class MissingRateError(EnginePreconditionError, KeyError):
    """No interest rate is available for a date the engine needs."""

    def __init__(self, when):
        self.date = when
        super().__init__(f"no rate available for {when.isoformat()}")

    def __str__(self) -> str:
        return self.args[0]
