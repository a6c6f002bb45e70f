"""Exception hierarchy.

Every error raised on purpose by the package derives from ``TrajLDPError`` so
the CLI can map failure classes to exit codes.
"""


class TrajLDPError(Exception):
    """Base class for package errors."""


class InvalidParameterError(TrajLDPError, ValueError):
    """A mechanism or operation received an out-of-domain parameter."""


class UndefinedBearingError(TrajLDPError, ValueError):
    """Bearing requested between two points with identical coordinates."""

    def __init__(self, msg: str = "undefined bearing: origin and target coincide"):
        super().__init__(msg)


class BudgetExceededError(TrajLDPError, RuntimeError):
    """A privacy-ledger spend would push the total above its budget.

    This signals a bug in an allocation, not a recoverable condition.
    """

    def __init__(self, label: str, requested: float, spent: float, total: float):
        self.label = label
        self.requested = requested
        self.spent = spent
        self.total = total
        super().__init__(
            f"privacy budget exceeded by {label!r}: spent {spent:.12g} + "
            f"{requested:.12g} > total {total:.12g}"
        )


class SchemaError(TrajLDPError, ValueError):
    """Input file does not match the expected schema."""

    def __init__(self, path, line: int | None, msg: str):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {msg}")
