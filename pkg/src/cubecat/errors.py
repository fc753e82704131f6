"""Exception hierarchy shared by all modules."""


class CubecatError(Exception):
    """Base class for every error raised by the package."""


class DegreeMismatch(CubecatError, ValueError):
    """Two operands live over objects of different degree."""


class NotComposable(CubecatError, ValueError):
    """Endpoints of a composite do not match."""


class InvalidMorphism(CubecatError, ValueError):
    """A value violates the invariants of its type."""


class TruncationError(CubecatError, ValueError):
    """An operation needs objects above the available degree bound."""


class SchemaError(CubecatError, ValueError):
    """An input document does not match its schema."""


class FunctorialityError(SchemaError):
    """A presheaf action fails to respect identities or composition."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair
