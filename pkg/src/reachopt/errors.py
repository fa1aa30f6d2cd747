"""Exception types shared across the package."""


class ReachoptError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ReachoptError):
    """A model, table, or scenario description is invalid."""


class ParseError(ConfigurationError):
    """A data file could not be parsed; message carries location info."""


class ContractError(ReachoptError, ValueError):
    """An argument violates a documented precondition."""


class CalibrationError(ReachoptError):
    """Automatic weight calibration could not produce a usable value."""


class EvaluationError(ReachoptError):
    """An objective probe returned a non-finite value."""


class StepFailure(ReachoptError):
    """A damped-least-squares step could not be computed or accepted.

    Recoverable: callers respond by increasing the damping and retrying.
    """
