"""Exception types shared across the pipeline."""


class PropdetectError(Exception):
    """Base class for all package errors."""


class DataFormatError(PropdetectError, ValueError):
    """A data file or record violates its format.

    ``path`` and ``line`` are attached when known so the CLI can point at
    the offending row.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class SchemaMismatchError(PropdetectError, ValueError):
    """Feature vectors were built with a different extractor configuration."""


class CoverageError(PropdetectError, ValueError):
    """An ensemble column does not cover every target sentence."""


class InvariantError(PropdetectError, RuntimeError):
    """An internal consistency check failed."""
