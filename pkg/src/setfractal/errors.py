"""Exception types raised across the package."""


class SetFractalError(Exception):
    """Base class for every error raised by setfractal."""


class EmptySetError(SetFractalError, ValueError):
    pass


class InvalidEndpointError(SetFractalError, ValueError):
    pass


class LevelOverflowError(SetFractalError, ValueError):
    pass


class LiteralParseError(SetFractalError, ValueError):
    pass


class FiniteOnlyError(SetFractalError, ValueError):
    """A finite-point set was required but an interval of positive length was given."""


class TooLargeError(SetFractalError, ValueError):
    pass


class DomainError(SetFractalError, ValueError):
    pass


class BadExponentError(SetFractalError, ValueError):
    pass


class NotContractiveError(SetFractalError, ValueError):
    pass


class ConvexityRequiredError(SetFractalError, ValueError):
    pass


class IllPosedEndpointError(SetFractalError, ValueError):
    """No interval offset S_n satisfies the endpoint conditions for the given data."""


class GlueError(SetFractalError, ValueError):
    pass


class NoConvergenceError(SetFractalError, RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BadWeightsError(SetFractalError, ValueError):
    pass


class DegenerateInputError(SetFractalError, ValueError):
    pass


class ConfigError(SetFractalError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
