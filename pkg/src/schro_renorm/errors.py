"""Exception types raised by the toolkit."""


class InvalidParameterError(ValueError):
    pass


class ResolutionError(ValueError):
    """A grid or time step does not resolve the scale it must resolve."""


class CapacityError(MemoryError):
    pass


class GridAlignmentError(ValueError):
    pass


class DomainError(ValueError):
    """Requested evaluation lies outside the data the object carries."""


class RangeError(ValueError):
    """An asymptotic or truncated expansion is used outside its valid range."""


class ConfigError(ValueError):
    pass
