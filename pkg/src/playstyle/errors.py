"""Exception hierarchy shared by every playstyle module."""


class PlaystyleError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(PlaystyleError):
    """A file does not carry the expected magic bytes or version."""


class CorruptionError(PlaystyleError):
    """A file is structurally valid but truncated or damaged."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class SizeError(PlaystyleError, ValueError):
    pass


class ShapeError(PlaystyleError, ValueError):
    pass


class EstimationError(PlaystyleError, ValueError):
    """A distribution cannot be estimated from the supplied samples."""


class StateLookupError(PlaystyleError, KeyError):
    pass


class NoPredictionError(PlaystyleError):
    """Every candidate distance was undefined."""


class EvaluationError(PlaystyleError):
    pass


class ConfigError(PlaystyleError, ValueError):
    pass


class DomainError(PlaystyleError, ValueError):
    pass


class StateError(PlaystyleError):
    pass


class TrainingError(PlaystyleError):
    """Training produced a non-finite loss."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
