"""Exception hierarchy shared across the package.

Everything derives from :class:`ContourFPError`; input-shaped problems also
derive from :class:`ValueError` so callers can catch them generically. The CLI
maps :class:`IncompatibleVersionError` to exit code 3 and every other
``ContourFPError`` to exit code 2.
"""


class ContourFPError(Exception):
    pass


class MalformedInputError(ContourFPError, ValueError):
    """Input that does not parse or violates a format invariant."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyMaskError(ContourFPError, ValueError):
    pass


class EmptyCloudError(ContourFPError, ValueError):
    pass


class InvalidParameterError(ContourFPError, ValueError):
    pass


class InvalidObservationError(ContourFPError, ValueError):
    pass


class DimensionError(ContourFPError, ValueError):
    pass


class SequencingError(ContourFPError, ValueError):
    pass


class EmptyDatabaseError(ContourFPError, ValueError):
    pass


class EmptyEditError(ContourFPError, ValueError):
    pass


class GenerationError(ContourFPError, ValueError):
    pass


class NoTargetError(ContourFPError, ValueError):
    pass


class IncompatibleVersionError(ContourFPError):
    """Two artifacts were produced by incompatible pipeline versions."""
