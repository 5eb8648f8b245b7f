"""Exception types raised across the package."""


class PSWError(Exception):
    """Base class for all package errors."""


class CutoffError(PSWError, ValueError):
    """The Fock cutoff is too small for the requested accuracy."""


class PreconditionError(PSWError, ValueError):
    """A numerical precondition of an evaluation is not met."""


class ConfigError(PSWError, ValueError):
    """A run configuration failed validation."""
