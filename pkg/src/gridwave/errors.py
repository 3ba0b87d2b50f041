"""Exception hierarchy shared across the package.

Every error raised by gridwave derives from :class:`GridwaveError` so callers
can catch the package's failures with a single handler.  The three concrete
classes map onto the CLI exit codes: bad parameters (1), numerical failure
such as a non-invertible bank (2), and file-format or I/O problems (3).
"""

__all__ = [
    "GridwaveError",
    "UsageError",
    "NonInvertibleError",
    "FormatError",
]


class GridwaveError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(GridwaveError, ValueError):
    """Invalid parameters or preconditions (CLI exit code 1)."""


class NonInvertibleError(GridwaveError, ArithmeticError):
    """A filter bank is numerically singular on the signal space (exit code 2).

    Carries the offending frequency-bin class in ``bin_index`` when known.
    """

    def __init__(self, message, bin_index=None):
        super().__init__(message)
        self.bin_index = bin_index


class FormatError(GridwaveError, OSError):
    """Malformed or unsupported file content (CLI exit code 3)."""
