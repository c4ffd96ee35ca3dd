"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class LraError(Exception):
    exit_code = 1


class ArgumentError(LraError, ValueError):
    """Bad parameter value (out-of-range dim, mismatched lengths, ...)."""

    exit_code = 2


class DataError(LraError):
    exit_code = 3


class ContourError(DataError):
    """Contour fails validity checks (too few vertices, zero length)."""


class FormatError(DataError):
    """Unparsable file content or malformed coordinate vector."""


class CorpusError(DataError):
    pass


class NumericError(LraError, ArithmeticError):
    exit_code = 4
