"""Exception hierarchy shared across the harness.

Each class maps to one CLI exit-code category: usage errors are argparse's
business (exit 2), everything deriving from DataError exits 3, TransportError
exits 4.
"""


class AudiobenchError(Exception):
    pass


class DataError(AudiobenchError):
    """Base for anything wrong with input data or artifacts."""


class ParseError(DataError):
    """Input text or record that cannot be interpreted."""


class ManifestParseError(ParseError):
    def __init__(self, message, path=None, line=None):
        loc = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class IntegrityError(DataError):
    """Cross-reference or invariant violation inside otherwise well-formed data."""


class FormatError(DataError):
    """Malformed binary payload, prompt input, or schema mismatch."""


class DecodeError(DataError):
    """Audio payload exists but cannot be decoded."""


class DegenerateInputError(DataError):
    """An operation was asked to run on an empty or unusable selection."""


class TransportError(AudiobenchError):
    """LLM endpoint unreachable or persistently failing."""

    def __init__(self, message, unconverted=()):
        super().__init__(message)
        self.unconverted = list(unconverted)
