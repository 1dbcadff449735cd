"""Exactly solvable reversible Markov chains built by convolving orthogonality measures.

Submodules:

* :mod:`convchains.numerics` - Pochhammer symbols, (q-)hypergeometric series, summation identities
* :mod:`convchains.families` - measures, polynomials and norms of the Askey-scheme families used
* :mod:`convchains.chains` - transition matrices for every registered case, duals, products, deformations
* :mod:`convchains.spectral` - symmetrization, eigenvalues, reconstruction, evolution, sampling
* :mod:`convchains.selfsim` - self-similarity of the measures under convolution
* :mod:`convchains.bd` - banded chains from powers of birth-death generators
* :mod:`convchains.cli` - command-line interface
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BalanceError,
    CaseError,
    CompletenessError,
    ConvChainError,
    DomainError,
    NumericError,
    PatternError,
    PoleError,
    RatesError,
    TruncationError,
    TuningError,
)

__all__ = [
    "__version__",
    "BalanceError",
    "CaseError",
    "CompletenessError",
    "ConvChainError",
    "DomainError",
    "NumericError",
    "PatternError",
    "PoleError",
    "RatesError",
    "TruncationError",
    "TuningError",
]
