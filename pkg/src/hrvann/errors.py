"""Exception hierarchy shared by every pipeline stage."""


class HrvError(Exception):
    """Base class for all errors raised by hrvann."""


class ParseError(HrvError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class RangeError(ParseError):
    pass


class TooShortError(HrvError):
    pass


class IoError(HrvError):
    def __init__(self, subject_id, message):
        super().__init__(f"{subject_id}: {message}")
        self.subject_id = subject_id


class SchemaError(HrvError):
    pass


class AllArtifactsError(HrvError):
    pass


class InsufficientSupportError(HrvError):
    pass


class NoSegmentsError(HrvError):
    pass


class ShapeError(HrvError, ValueError):
    pass


class DegenerateSpectrumError(HrvError):
    pass


class ConstantFeatureError(HrvError):
    def __init__(self, column):
        super().__init__(f"feature {column!r} has zero variance on the fitting rows")
        self.column = column


class MissingFeatureError(HrvError):
    pass


class EmptySelectionError(HrvError):
    pass


class ConfigError(HrvError, ValueError):
    pass


class DivergenceError(HrvError):
    pass


class DegenerateLabelsError(HrvError):
    pass


class ExperimentError(HrvError):
    pass


class ModelFormatError(HrvError):
    pass
