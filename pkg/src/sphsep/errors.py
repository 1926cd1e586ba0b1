"""Exception types raised across the package."""


class SphSepError(Exception):
    """Base class for all package errors."""


class DomainError(SphSepError, ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(SphSepError, ValueError):
    """A singular kernel was evaluated at its singular point."""


class PreconditionError(SphSepError):
    """Input data violates a precondition of the separation."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class UnderResolutionError(SphSepError):
    """The grid has too few nodes inside a kernel cap."""

    def __init__(self, message, scale=None, cap=None, nodes=None):
        super().__init__(message)
        self.scale = scale
        self.cap = cap
        self.nodes = nodes


class InputFormatError(SphSepError):
    """A data file is missing columns, malformed or inconsistent with its sidecar."""
