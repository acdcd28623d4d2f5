"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class UndefinedCorrelatorError(ValueError):
    """A correlator was requested from zero coincidences."""


class StreamFormatError(ValueError):
    """An event-stream file or array violates the expected format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
