"""Exception types raised across the package."""


class EMZError(Exception):
    """Base class for all package errors."""


class WindowMismatch(EMZError):
    pass


class InvalidMatrix(EMZError):
    pass


class StepSizeTooCoarse(EMZError):
    pass


class QuadratureFailure(EMZError):
    pass


class UnsupportedFamily(EMZError):
    pass


class ContinuousSpectrumOnly(EMZError):
    pass


class SymbolicACUnsupported(EMZError):
    """An operation needing eigenvectors met an absolutely continuous part."""


class UnboundedFunction(EMZError):
    pass


class UnknownSolutionBasis(EMZError):
    pass


class EnumerationBudgetExceeded(EMZError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DimensionMismatch(EMZError):
    pass


class ParseError(EMZError):
    pass


class SchemaError(EMZError):
    pass
