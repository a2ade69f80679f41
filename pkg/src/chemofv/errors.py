"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class DomainError(ValueError):
    """Argument outside the domain of a model nonlinearity."""


class SimulationError(RuntimeError):
    """Base class for failures that abort a time integration."""

    def __init__(self, message: str, step: int | None = None, t: float | None = None):
        super().__init__(message)
        self.step = step
        self.t = t


class CFLViolation(SimulationError):
    pass


class SolverError(SimulationError):
    pass


class BlowUpError(SimulationError):
    """Nonfinite values in the state."""


class CoverageError(ValueError):
    """Recorded data do not cover the interval a diagnostic needs."""


class PreconditionError(ValueError):
    pass


class ConfigError(ValueError):
    """Collects every problem found in a config file.

    ``problems`` is a list of ``(line, message)``; ``line`` is None when the
    problem has no location (e.g. a missing key).
    """

    def __init__(self, problems: list[tuple[int | None, str]]):
        self.problems = list(problems)
        lines = []
        for line, msg in self.problems:
            lines.append(f"line {line}: {msg}" if line is not None else msg)
        super().__init__("\n".join(lines))
