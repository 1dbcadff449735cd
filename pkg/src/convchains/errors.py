"""Exception hierarchy shared by all modules."""


class ConvChainError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ConvChainError, ValueError):
    """Parameters fall outside the region where a formula is valid."""


class PoleError(ConvChainError, ZeroDivisionError):
    """A denominator Pochhammer symbol vanishes inside the summation range."""

    def __init__(self, k, message=None):
        self.k = k
        super().__init__(message or f"denominator vanishes at term k={k}")


class CaseError(ConvChainError, KeyError):
    """Unknown, rejected or unsupported chain case."""

    def __str__(self):
        return str(self.args[0]) if self.args else "case error"


class BalanceError(ConvChainError):
    """Detailed balance fails, usually because the stationary parameters are wrong."""


class TruncationError(ConvChainError):
    """A semi-infinite sum or lattice needs more points than the allowed cap."""


class PatternError(ConvChainError, ValueError):
    """Sign pattern of a multiple convolution is not normalized."""


class CompletenessError(ConvChainError):
    """The eigenvector family does not span the lattice."""


class NumericError(ConvChainError):
    """Floating point eigensolver failure."""


class TuningError(ConvChainError):
    """Weights for a banded birth-death chain cannot be chosen."""

    def __init__(self, message, k=None):
        self.k = k
        super().__init__(message)


class RatesError(ConvChainError):
    """Birth/death rates do not satisfy the polynomial difference equation."""
