"""Exception types shared across the package."""


class WedgelabError(Exception):
    """Base class for all package-specific errors."""


class GridSpanError(WedgelabError):
    """A sampling grid is too short for the requested function.

    Raised when a profile has not decayed below the required fraction of
    its peak at the ends of the grid, so any computation on that grid
    would silently truncate the function.
    """


class SupportPreconditionError(WedgelabError):
    """An operation requires support metadata the input does not carry.

    Example: analytic continuation into the lower rapidity strip is only
    defined for functions supported in the right wedge.
    """


class DomainViolationError(WedgelabError):
    """The input lies outside the domain of an unbounded operator.

    Detected numerically through exponential norm growth of the result
    beyond a configured threshold.
    """


class ConfigValidationError(WedgelabError):
    """An experiment configuration failed schema validation."""
