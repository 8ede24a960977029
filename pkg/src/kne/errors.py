"""Exception types shared across the package.

The CLI maps these onto process exit codes: usage problems exit 2 (handled
by click), :class:`DataError` exits 3 and :class:`NumericalError` exits 4.
"""


class KneError(Exception):
    """Base class for package errors."""


class DataError(KneError):
    """Unreadable, malformed, or inconsistent input data."""

    exit_code = 3


class NumericalError(KneError):
    """Training produced non-finite values (diverged or misconfigured)."""

    exit_code = 4
