"""Cointegrated VAR analysis of the global carbon budget.

The package covers the full pipeline: ingesting the annual budget
accounting file and the Southern Oscillation Index, reduced-rank
(cointegration) estimation and rank testing, likelihood-ratio tests on
the cointegration space, maximum-likelihood estimation of a structural
sink/source system, residual diagnostics, and stochastic projection of
atmospheric carbon under prescribed emission scenarios.
"""

from .errors import (
    AlignmentError,
    CarbonCvarError,
    ConvergenceError,
    DataError,
    DegenerateInputError,
    FeedbackSingularityError,
    NumericalError,
    ParameterDomainError,
    ParseError,
    SampleError,
    SchemaError,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "CarbonCvarError",
    "ConvergenceError",
    "DataError",
    "DegenerateInputError",
    "FeedbackSingularityError",
    "NumericalError",
    "ParameterDomainError",
    "ParseError",
    "SampleError",
    "SchemaError",
    "__version__",
]
