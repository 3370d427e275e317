"""Exception hierarchy.

Everything numerical derives from :class:`NumericalError` so the CLI can map
it to a single exit code; scenario problems derive from :class:`ScenarioError`.
"""


class AssetFlowError(Exception):
    """Base class for all package errors."""


class NumericalError(AssetFlowError):
    pass


class DegenerateMarket(NumericalError):
    """Sell-side denominator vanished: the model left its valid region."""

    def __init__(self, message, asset=None, time=None):
        super().__init__(message)
        self.asset = asset
        self.time = time

    def __str__(self):
        msg = super().__str__()
        if self.time is not None:
            msg += f" (t = {self.time:.6g})"
        return msg


class CalibrationImpossible(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NonPositivePrice(NumericalError):
    pass


class StepSizeUnderflow(NumericalError):
    pass


class HypothesisViolated(NumericalError):
    pass


class TooShort(NumericalError):
    pass


class NoSignChange(NumericalError):
    pass


class FoldNotHopf(NumericalError):
    pass


class NoOnset(NumericalError):
    pass


class ScenarioError(AssetFlowError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(ScenarioError):
    def __init__(self, key, constraint):
        super().__init__(f"{key}: {constraint}")
        self.key = key
        self.constraint = constraint


class OutputError(AssetFlowError):
    """Writing a result file failed; the message names the path."""
