"""
Exception hierarchy for the CC-estimation library.

Every error raised on purpose by the library derives from CCError, so callers
(the CLI in particular) can map failures to exit codes without catching
unrelated exceptions.
"""

from typing import List, Optional


class CCError(Exception):
    """Base error for the library."""


class ValidationError(CCError, ValueError):
    """Inputs violate a contract: bad parameter values, shapes or labels."""


class DomainError(ValidationError):
    """A function was evaluated outside its domain (e.g. negative z)."""


class ConfigError(ValidationError):
    """Configuration file or run configuration is invalid."""


class DegenerateProblemError(CCError):
    """
    The weighted problem has no information left to fit.

    Attributes:
        iteration: Outer iteration at which the problem became degenerate
            (None when raised outside the outer loop)
    """

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (outer iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class ConvergenceError(CCError):
    """
    A solver diverged or could not make progress.

    Attributes:
        trace: Objective values recorded before the failure
    """

    def __init__(self, message: str, trace: Optional[List[float]] = None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class DataFormatError(CCError):
    """
    A data file could not be parsed.

    Attributes:
        line: 1-based line number of the offending record (None if unknown)
    """

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        location = ""
        if path is not None:
            location += f"{path}"
        if line is not None:
            location += f":{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.line = line
        self.path = path


class SimulationError(CCError):
    """Too many Monte-Carlo fits failed for the aggregate to be meaningful."""
