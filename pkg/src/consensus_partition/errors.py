"""Exception hierarchy shared by the library and the command line."""


class PartitionError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(PartitionError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 3


class ParseError(ValidationError):
    """A partition, ensemble or dataset file is malformed.

    ``field`` names the offending JSON key or CSV column when known.
    """

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{message} (field: {field})"
        super().__init__(message)
        self.field = field


class CapacityError(PartitionError):
    """Instance is too large for an exhaustive routine."""

    exit_code = 4


class OracleMismatch(PartitionError, AssertionError):
    """An internal cross-check between two independent routes failed."""

    exit_code = 1
