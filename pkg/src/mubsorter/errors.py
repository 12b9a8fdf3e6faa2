"""Exception hierarchy shared by all modules."""


class SorterError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(SorterError, ValueError):
    pass


class UnsupportedDimensionError(SorterError, ValueError):
    pass


class DimensionMismatchError(SorterError, ValueError):
    pass


class EvanescentModeError(SorterError, ValueError):
    """A requested plane wave has no real z-component inside the medium."""


class DegenerateGeometryError(SorterError, ValueError):
    pass


class InvalidSpecError(SorterError, ValueError):
    pass


class ConfigError(SorterError, ValueError):
    pass


class NumericalError(SorterError, ArithmeticError):
    """Non-finite data, failed convergence or a search without an interior optimum."""


class UndefinedProbabilityError(NumericalError):
    """Probabilities were requested for a field carrying zero flux."""
