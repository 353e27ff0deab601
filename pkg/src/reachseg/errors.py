"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Invalid curve or region (too few vertices, duplicates, self-intersection...)."""


class PreconditionError(ValueError):
    """An operation was called on input that violates its stated precondition."""


class ParseError(ValueError):
    """Malformed image, curve or config file."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
