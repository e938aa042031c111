"""Exception hierarchy shared by every module."""


class WemmError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(WemmError, ValueError):
    pass


class ConvergenceFailure(WemmError, ArithmeticError):
    pass


class InvalidRegularizer(WemmError, ValueError):
    pass


class InvalidParameter(WemmError, ValueError):
    pass


class InputNormViolation(WemmError, ValueError):
    pass


class DegenerateWeight(WemmError, ArithmeticError):
    pass


class EmptyStream(WemmError, ValueError):
    pass


class InvalidSpec(WemmError, ValueError):
    pass


class WeightModeMismatch(WemmError):
    pass


class PreconditionViolation(WemmError):
    pass


class InfeasibleParameters(WemmError, ValueError):
    pass


class InstanceTooLarge(WemmError, ValueError):
    pass


class ConfigError(WemmError):
    pass


class ParseError(WemmError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NormViolation(WemmError, ValueError):
    pass


class CertificationFailure(WemmError):
    pass
