"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedMechanismError(DomainError):
    """The requested mechanism cannot provide the requested guarantee."""


class BracketError(ValueError):
    """Root bracket endpoints do not straddle zero."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap."""


class AuditError(RuntimeError):
    """A privacy audit cannot be carried out (e.g. unbounded loss)."""
