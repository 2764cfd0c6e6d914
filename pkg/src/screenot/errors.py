"""Error taxonomy shared by the library and the command line.

Each error carries a machine-readable `category` and the process `exit_code` the CLI terminates with.
"""

from __future__ import annotations


class ScreeNOTError(Exception):
    """Base class of all errors raised by this package."""

    category: str = "error"
    exit_code: int = 1


class DomainError(ScreeNOTError, ValueError):
    """An evaluation point or argument lies outside the domain of a functional."""

    category = "domain"
    exit_code = 10


class DegenerateSpectrumError(ScreeNOTError, ValueError):
    """All atoms of a CDF are zero, so the threshold equation has no root."""

    category = "degenerate-spectrum"
    exit_code = 11


class RankBoundError(ScreeNOTError, ValueError):
    """The rank bound `k` is incompatible with the number of singular values."""

    category = "rank-bound"
    exit_code = 12


class BelowTransitionError(ScreeNOTError, ValueError):
    """A spike lies at or below the phase transition and produces no outlier."""

    category = "below-transition"
    exit_code = 13


class SolverError(ScreeNOTError, RuntimeError):
    """A root could not be bracketed or the bisection did not converge."""

    category = "solver"
    exit_code = 14


class ShapeMismatchError(ScreeNOTError, ValueError):
    category = "shape-mismatch"
    exit_code = 15


class InputFileError(ScreeNOTError, OSError):
    """An input file cannot be read, or an output file cannot be written."""

    category = "input-file"
    exit_code = 20


class MalformedInputError(ScreeNOTError, ValueError):
    """An input file was read but its content is not valid numeric data."""

    category = "malformed-input"
    exit_code = 21


class ConfigError(ScreeNOTError, ValueError):
    """An experiment configuration is invalid.

    Args:
        message: Human readable description.
        field: Dotted path of the offending field, e.g. ``noise.gamma``.
        line: Line number in the configuration file, if known.
    """

    category = "config"
    exit_code = 22

    def __init__(self, message: str, field: str | None = None, line: int | None = None) -> None:
        self.message = message
        self.field = field
        self.line = line
        location = ""
        if field is not None:
            location += f"field '{field}'"
        if line is not None:
            location += f"{', ' if location else ''}line {line}"
        super().__init__(f"{location}: {message}" if location else message)
