"""Exception hierarchy shared by every module."""
from __future__ import annotations


class PFNoiseError(Exception):
    """Base class for all library errors."""


class DomainError(PFNoiseError, ValueError):
    """Argument outside the domain of a map or function."""


class RangeError(PFNoiseError, ValueError):
    """Value outside an open admissible interval.

    The interval is kept on ``admissible`` so callers (and the CLI) can report it.
    """

    def __init__(self, message: str, admissible: tuple[float, float] | None = None):
        super().__init__(message)
        self.admissible = admissible


class InvalidMapError(PFNoiseError, ValueError):
    """Map parameters violate the catalog invariants."""


class SingularityError(PFNoiseError, ZeroDivisionError):
    pass


class AnalysisError(PFNoiseError, RuntimeError):
    """A numeric search (bracketing, critical point) failed."""


class BoundViolationError(PFNoiseError, ValueError):
    """Noise level or perturbation bound at or above its admissible maximum."""


class DesignError(PFNoiseError, ValueError):
    pass


class NoiseSupportError(PFNoiseError, ValueError):
    """A noise sample fell outside [-1, 1]."""


class PreconditionError(PFNoiseError, ValueError):
    pass


class SimulationFault(PFNoiseError, RuntimeError):
    """A trajectory diverged or produced a non-finite value.

    ``step`` is the index of the state that could not be computed and
    ``partial`` holds the states computed before it.
    """

    def __init__(self, message: str, step: int, partial=None):
        super().__init__(f"{message} (step {step})")
        self.step = step
        self.partial = partial
