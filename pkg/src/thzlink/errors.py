"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class UnsupportedDomainError(DomainError):
    """The argument combination is valid mathematically but outside the
    restricted family this implementation supports."""


class NumericsError(ArithmeticError):
    """A numerical method failed to deliver the requested accuracy
    (non-convergence, overflow, or catastrophic cancellation).

    Carries a human-readable diagnostic; never returns a silently wrong
    value in its place.
    """


class BeamwidthError(DomainError):
    """No 1/e beamwidth exists for the requested array (e.g. a single
    element has no main lobe)."""


class ScenarioError(ValueError):
    """A scenario file or CLI override failed validation.  The message
    names the offending field path."""
