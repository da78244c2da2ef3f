"""Exception hierarchy shared by every module."""


class LemonLensError(Exception):
    """Base class for all library errors."""


class DomainError(LemonLensError, ValueError):
    """An argument lies outside the domain of the function."""


class ConfigError(LemonLensError, ValueError):
    """Invalid scenario, configuration or precondition."""


class NumericalError(LemonLensError, ArithmeticError):
    """A numerical routine lost precision or failed to converge."""


class RegularityError(NumericalError):
    """The type distribution violates a regularity assumption."""


class QuadratureError(NumericalError):
    pass


class DegenerateError(LemonLensError, ValueError):
    pass
