"""Shared exception types."""


class SizeLimitError(ValueError):
    """A requested computation exceeds a hard size cap (factorial/Hilbert dims)."""


class ShapeMismatchError(ValueError):
    """Operands have incompatible sizes (replica counts, vector lengths, bonds)."""


class PreconditionError(ValueError):
    """An input violates a documented precondition (e.g. unnormalized state)."""
