"""Exception hierarchy shared by the library and the CLI."""


class MvTreeletError(Exception):
    """Base class; ``kind`` is the machine-readable tag used by the CLI."""

    kind = "error"


class DimensionError(MvTreeletError, ValueError):
    kind = "dimension"


class ParameterError(MvTreeletError, ValueError):
    kind = "parameter"


class DegenerateError(MvTreeletError, ValueError):
    kind = "degenerate"


class NonFiniteError(MvTreeletError, ValueError):
    kind = "non-finite"


class MatrixParseError(MvTreeletError, ValueError):
    kind = "parse"

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class InputNotFoundError(MvTreeletError, FileNotFoundError):
    kind = "input-not-found"
