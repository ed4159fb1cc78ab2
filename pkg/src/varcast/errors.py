"""Exception types raised across the toolkit.

Three broad families map onto the CLI exit codes: configuration problems
(``ConfigError``), data problems (``DataError`` subclasses) and numerical
failures (``NumericalError`` subclasses).
"""


class VarcastError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(VarcastError):
    """Invalid run configuration or command usage."""


class DataError(VarcastError):
    """Problems with input data."""


class UnreadableFile(DataError):
    pass


class NoValidRows(DataError):
    pass


class NonPositivePrice(DataError):
    pass


class ConstantSeries(DataError):
    pass


class SeriesTooShort(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class EmptyInput(DataError):
    pass


class NumericalError(VarcastError):
    """Numerical procedure failed."""


class DegenerateSample(NumericalError):
    pass


class AlphaOutOfRange(NumericalError):
    pass


class BadDistParams(NumericalError):
    pass


class NonFiniteRecursion(NumericalError):
    pass


class OptimFailed(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class NotFitted(NumericalError):
    pass


class DegenerateLosses(NumericalError):
    pass


class AllPointsFailed(NumericalError):
    pass
