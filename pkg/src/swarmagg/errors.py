"""Exception hierarchy shared across the package."""


class SwarmError(Exception):
    """Base class for all errors raised by swarmagg."""


class InvalidInputError(SwarmError, ValueError):
    pass


class SingularityError(SwarmError, ArithmeticError):
    pass


class NoEquilibriumError(SwarmError, ValueError):
    pass


class PreconditionError(SwarmError, ValueError):
    pass


class GenerationError(SwarmError):
    pass


class DegenerateSpectrumError(SwarmError, ArithmeticError):
    pass


class ConfigError(SwarmError):
    pass


class DivergenceError(SwarmError, ArithmeticError):
    """The integrated state left the finite region.

    ``time`` is the simulation time of the first offending step.
    """

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time
