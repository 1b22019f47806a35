"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``code`` so the command-line
front end can report it as JSON and map it onto an exit status.
"""


class WeakValueError(Exception):
    """Base class for all package errors."""

    code = "error"
    exit_status = 1


class ValidationError(WeakValueError, ValueError):
    """A parameter is outside its allowed range."""

    code = "validation"
    exit_status = 2

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvalidDimensionError(ValidationError):
    code = "invalid_dimension"


class InvalidStateError(ValidationError):
    code = "invalid_state"


class ConfigParseError(ValidationError):
    code = "parse"


class OutOfRegimeError(WeakValueError):
    """Parameters are valid but outside the regime a model is built for."""

    code = "out_of_regime"
    exit_status = 3


class TruncationError(WeakValueError):
    """Probability weight leaked into the top of the truncated Fock space."""

    code = "truncation"
    exit_status = 3


class PostSelectionError(WeakValueError):
    code = "impossible_post_selection"
    exit_status = 3


class UndefinedWeakValueError(WeakValueError, ZeroDivisionError):
    code = "undefined_weak_value"
    exit_status = 3


class OracleScaleError(WeakValueError):
    code = "oracle_scale"
    exit_status = 3


class InsufficientDataError(WeakValueError):
    code = "insufficient_data"
    exit_status = 3
