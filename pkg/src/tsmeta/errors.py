"""Exception hierarchy shared across the package."""


class TsMetaError(Exception):
    """Base class for every error raised by tsmeta."""


class ValidationError(TsMetaError, ValueError):
    """Input data or configuration violates a documented invariant."""


class DuplicateTimestamp(ValidationError):
    pass


class NonUniformSpacing(ValidationError):
    pass


class NonFiniteValue(ValidationError):
    pass


class TooShort(ValidationError):
    pass


class BadPeriod(ValidationError):
    pass


class BadHorizon(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class ZeroActual(ValidationError):
    pass


class ConstantInput(ValidationError):
    """Statistic is undefined because the input has zero variance."""


class InvalidAssignment(ValidationError):
    pass


class FitFailure(TsMetaError):
    """A forecasting model could not be fitted with the given parameters."""


class GridTooLarge(TsMetaError):
    pass


class EmptySpaceWithZeroTrials(TsMetaError):
    pass


class AllModelsFailed(TsMetaError):
    """Every candidate model failed; ``record`` holds the partial result if any."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class DegenerateSplit(TsMetaError):
    pass


class TooFewRecords(TsMetaError):
    pass


class NoTrainingRows(TsMetaError):
    pass


class SingularSystem(TsMetaError):
    pass


class SchemaMismatch(TsMetaError):
    pass


class CorruptFile(TsMetaError):
    pass


class OverlapError(TsMetaError):
    pass


class BadCheckpoint(ValidationError):
    pass
