"""Exception types shared by the sparsebound library and CLI."""

from typing import Optional


class SparseBoundError(Exception):
    """Base class for every error raised on purpose by sparsebound."""


class ShapeError(SparseBoundError, ValueError):
    """Dimension mismatch or non-square input where a square one is required."""


class RankDeficientError(SparseBoundError, ValueError):
    def __init__(self, message: str = "matrix not full row rank"):
        super().__init__(message)


class SingularMatrixError(SparseBoundError, ValueError):
    """Square matrix with determinant zero where an invertible one is required."""


class CapExceededError(SparseBoundError):
    """A configured work cap would be exceeded. Results are never truncated silently."""

    def __init__(self, cap_name: str, limit: int, requested: int):
        self.cap_name = cap_name
        self.limit = limit
        self.requested = requested
        super().__init__(f"{cap_name} cap exceeded: {requested} > {limit}")


class FactorizationIncompleteError(SparseBoundError):
    def __init__(self, value: int, cofactor: int, ceiling: int):
        self.value = value
        self.cofactor = cofactor
        self.ceiling = ceiling
        super().__init__(
            f"factorization incomplete for {value}: cofactor {cofactor} exceeds ceiling {ceiling}"
        )


class ConeMismatchError(SparseBoundError):
    """cone(A) != cone(W) for the chosen column subset W."""


class ParseError(SparseBoundError, ValueError):
    def __init__(self, path: str, line: Optional[int], message: str):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")
