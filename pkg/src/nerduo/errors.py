"""Exception types shared across the toolkit."""


class NerduoError(Exception):
    """Base class for all toolkit errors."""


class ParseError(NerduoError):
    """Malformed CoNLL input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LabelingError(NerduoError):
    """A tag or label outside the configured label set, or an invalid tag sequence."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class EmbeddingFormatError(NerduoError):
    """Malformed or inconsistent embedding interchange data."""

    def __init__(self, message, record=None):
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)
        self.record = record


class CoverageError(NerduoError):
    """An embedding provider cannot serve a requested sentence."""


class NumericError(NerduoError):
    """Non-finite values where finite ones are required."""


class ConfigError(NerduoError):
    """Invalid or incomplete run configuration."""
