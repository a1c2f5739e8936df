"""Exception hierarchy shared across the package."""


class FacetrecError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FacetrecError):
    """Input data violates a documented schema or invariant."""


class ConfigError(FacetrecError):
    """A configuration file or option is malformed or inconsistent."""


class TrainingError(FacetrecError):
    """Model training failed, e.g. the optimizer diverged."""
