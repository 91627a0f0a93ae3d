"""Exception types shared across the package."""


class DyngreenError(Exception):
    """Base class for all package errors."""


class ValidationError(DyngreenError, ValueError):
    """Input rejected: malformed data, violated precondition."""


class ZeroResultantError(ValidationError):
    """The two forms share a linear factor, so they do not define a map."""


class DuplicatePointError(ValidationError):
    """Two points of a configuration coincide projectively."""


class ResourceLimitError(DyngreenError):
    """A computation would exceed a configured size guard."""


class PropertyViolation(DyngreenError):
    """A proven inequality or identity failed numerically (a bug signal)."""
