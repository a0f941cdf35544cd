"""Exception hierarchy shared by every module."""


class DmdivError(Exception):
    """Base class for all errors raised by this package."""


class NonChordalInput(DmdivError):
    pass


class CyclicInput(DmdivError):
    pass


class TableTooLarge(DmdivError):
    pass


class DomainTooLarge(DmdivError):
    pass


class ScopeNotContained(DmdivError):
    pass


class NegativeInput(DmdivError):
    pass


class DivisionByZero(DmdivError, ZeroDivisionError):
    """Nonzero numerator met a zero denominator (the model is inconsistent)."""


class ModelError(DmdivError):
    """A model file or model object failed validation."""


class InconsistentModel(ModelError):
    pass


class VariableMismatch(ModelError):
    pass


class OutOfDomainValue(ModelError):
    pass


class EmptyData(ModelError):
    pass


class NoSuchEdge(ModelError):
    pass


class UndefinedDivergence(DmdivError):
    """The requested quantity is infinite or undefined for these supports."""


class NegativePowerOfZero(UndefinedDivergence):
    pass


class LogOfZero(UndefinedDivergence):
    pass


class LogOfZeroOnSupport(LogOfZero):
    pass


class ZeroProbabilitySample(UndefinedDivergence):
    pass


class ConsistencyError(DmdivError):
    """Two independent evaluation routes disagreed beyond tolerance."""
