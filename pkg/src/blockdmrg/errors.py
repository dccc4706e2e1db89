"""Exception types shared across the package."""


class BlockStructureError(ValueError):
    """A tensor or operation violates block/charge structure (flux mismatch,
    non-dual contracted indices, inconsistent shapes, malformed keys)."""


class TruncationError(RuntimeError):
    """A factorization discarded every singular value (degenerate truncation)."""


class ResourceLimitError(RuntimeError):
    """A dense materialization or exact diagonalization exceeds its size cap."""
