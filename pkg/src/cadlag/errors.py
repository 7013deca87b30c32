"""Exception hierarchy shared by all modules."""


class CadlagError(Exception):
    """Base class for library errors."""


class DomainError(CadlagError, ValueError):
    """An argument lies outside the domain of the operation."""


class ModeError(CadlagError, ValueError):
    """The requested computation mode does not support the input."""


class CapacityError(CadlagError, RuntimeError):
    """The input is too large for the chosen exact method."""


class ConfigError(CadlagError, ValueError):
    """An experiment or CLI configuration is inconsistent."""


class SeriesTruncationError(CadlagError, ArithmeticError):
    """A series hit its term budget before reaching the tolerance."""


class ParseError(CadlagError, ValueError):
    """A path or measure document is malformed.

    ``line`` and ``field`` locate the problem when known.
    """

    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.line = line
        self.field = field
