"""Exception types shared across the package."""


class StokesAtlasError(Exception):
    """Base class for every error raised by this package."""


class PoleError(StokesAtlasError, ValueError):
    """A Gamma function (or a series parameter) sits on a pole."""


class DivisionByZeroSeries(StokesAtlasError, ZeroDivisionError):
    """Truncated series division by a series with vanishing constant term."""


class NoConvergence(StokesAtlasError, ArithmeticError):
    """A series did not reach the requested tolerance within the term cap."""


class SectorError(StokesAtlasError, ValueError):
    """An asymptotic expansion was requested outside its sector of validity."""


class StepFailure(StokesAtlasError, RuntimeError):
    """The ODE integrator could not meet its local error target."""


class CaseError(StokesAtlasError, ValueError):
    """A label or index is not valid for the current sigma-case."""


class GenericityError(StokesAtlasError, ValueError):
    """Parameters violate the non-integer difference assumption."""


class DomainError(StokesAtlasError, ValueError):
    """Evaluation point lies on (or too close to) a singular locus."""
