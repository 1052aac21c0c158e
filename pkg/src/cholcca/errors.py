"""Exception hierarchy shared by the library and the command line."""


class CCAError(Exception):
    """Base class for all errors raised by cholcca."""

    exit_code = 1


class InputError(CCAError, ValueError):
    """Malformed or out-of-contract input (maps to CLI exit code 2)."""

    exit_code = 2


class ResourceError(CCAError):
    """A configured resource cap was exceeded (maps to CLI exit code 2)."""

    exit_code = 2


class NumericalFailure(CCAError, ArithmeticError):
    """A factorization or solve could not be carried out (CLI exit code 3).

    Attributes
    ----------
    column : int or None
        1-based column (in the ordered labelling) where the failure occurred.
    component : int or None
        1-based connected component index, filled in by the pipeline.
    """

    exit_code = 3

    def __init__(self, message, column=None, component=None):
        super().__init__(message)
        self.column = column
        self.component = component

    def __str__(self):
        msg = super().__str__()
        if self.component is not None:
            msg = f"component {self.component}: {msg}"
        return msg
