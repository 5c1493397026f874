"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class NotSquare(PipelineError, ValueError):
    pass


class NotSymmetric(PipelineError, ValueError):
    pass


class NotPositiveDefinite(PipelineError, ValueError):
    pass


class DimensionMismatch(PipelineError, ValueError):
    pass


class EmptyInput(PipelineError, ValueError):
    pass


class InvalidBand(PipelineError, ValueError):
    pass


class EventOutOfRange(PipelineError, ValueError):
    pass


class MixedLabels(PipelineError, ValueError):
    pass


class MissingClass(PipelineError, ValueError):
    pass


class BadPrior(PipelineError, ValueError):
    pass


class WrongMode(PipelineError, ValueError):
    pass


class EmptyFlashSet(PipelineError, ValueError):
    pass


class IndexOutOfRange(PipelineError, IndexError):
    pass


class NoEvidence(PipelineError, ValueError):
    pass


class BadConfig(PipelineError, ValueError):
    pass


class BadArgument(PipelineError, ValueError):
    pass


class InsufficientTraining(PipelineError, ValueError):
    pass


class MissingLabels(PipelineError, ValueError):
    pass


class SessionFormatError(PipelineError, ValueError):
    """A session directory does not match the on-disk format contract."""


class MeanConvergenceWarning(RuntimeWarning):
    """Geometric mean iteration stopped before reaching its tolerance."""
