"""Exception types shared across the package."""


class BmlandError(Exception):
    """Base class for all package errors."""


class UnknownPattern(BmlandError):
    pass


class InvalidParams(BmlandError):
    pass


class EmptyS(BmlandError):
    pass


class SNotRealizable(BmlandError):
    pass


class InvalidS(BmlandError):
    pass


class DimensionMismatch(BmlandError):
    pass


class MissingGraph(BmlandError):
    pass


class MissingS(BmlandError):
    pass


class ZeroMatrix(BmlandError):
    pass


class NoOddCycle(BmlandError):
    pass


class Disconnected(BmlandError):
    pass


class SingularBlock(BmlandError):
    pass


class NotPSD(BmlandError):
    pass


class SingularHessian(BmlandError):
    pass


class NotNearCritical(BmlandError):
    pass


class UnmatchedEndpoint(BmlandError):
    pass


class ConfigParseError(BmlandError):
    pass


class ValidationError(BmlandError):
    def __init__(self, field, message=None):
        self.field = field
        detail = f": {message}" if message else ""
        super().__init__(f"config field {field!r}{detail}")


class IoError(BmlandError):
    pass
