"""Exception hierarchy shared across the toolkit.

Every error raised on purpose derives from :class:`PrmError`, so callers
(CLI, HTTP service) can separate expected failures from bugs.
"""


class PrmError(Exception):
    """Base class for all toolkit errors."""


class DomainError(PrmError, ValueError):
    """A numeric argument is outside its mathematical domain."""


class StructuralError(PrmError, ValueError):
    """Shapes, indices or feature names do not line up."""


class ModeError(PrmError, ValueError):
    """Operation invoked on a model of the wrong mode."""


class SizeError(PrmError, ValueError):
    """Input too large or an operation produced an empty result."""


class DataError(PrmError, ValueError):
    """Raw data could not be ingested.

    ``row_errors`` holds (line_number, column, message) triples for the
    offending cells; the list is truncated at 50 entries.
    """

    def __init__(self, message: str, row_errors: list[tuple[int, str, str]] | None = None):
        self.row_errors = row_errors or []
        if self.row_errors:
            shown = "; ".join(f"line {ln}: {col}: {msg}" for ln, col, msg in self.row_errors[:5])
            message = f"{message} ({len(self.row_errors)} bad cells, first: {shown})"
        super().__init__(message)


class ValidationError(PrmError, ValueError):
    """A declarative document (scenario spec, config) failed validation.

    ``field_errors`` maps a dotted field path to a human message; the HTTP
    service turns this into a 400 response body.
    """

    def __init__(self, field_errors: list[tuple[str, str]]):
        self.field_errors = list(field_errors)
        super().__init__("; ".join(f"{path}: {msg}" for path, msg in self.field_errors))
