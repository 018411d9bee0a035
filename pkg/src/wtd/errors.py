"""Exception types shared across the library."""


class DomainError(ValueError):
    """Input violates an operation's domain (shape, sign, mode, ...)."""


class RankDeficient(DomainError):
    """Matrix is numerically rank deficient where full rank is required."""


class MajorizationError(DomainError):
    """Requested triangular diagonal is not majorized by the singular values.

    ``prefix_index`` is the 1-based length of the first violating prefix
    product; a value equal to the vector length flags a total-product
    mismatch.
    """

    def __init__(self, message, prefix_index=None):
        super().__init__(message)
        self.prefix_index = prefix_index


class NotPSD(DomainError):
    """Matrix expected to be positive semidefinite has a negative eigenvalue."""


class NumericalFailure(RuntimeError):
    """An underlying numerical routine failed to converge."""


class InsufficientSamples(DomainError):
    """Too few Monte Carlo samples for the requested estimate."""
