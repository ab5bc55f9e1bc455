"""Exception hierarchy shared across the package.

Data and usage problems derive from :class:`DataError`; numerical and
convergence problems derive from :class:`NumericalError`.  The command line
layer maps the two branches to distinct exit codes.
"""


class CarbonCvarError(Exception):
    """Base class for all errors raised by this package."""


class DataError(CarbonCvarError):
    """A problem with user-supplied data or arguments."""


class SchemaError(DataError):
    """A required column is missing or a header could not be resolved."""


class ParseError(DataError):
    """A cell could not be parsed as a number."""


class AlignmentError(DataError):
    """Year coverage of two inputs does not line up."""


class SampleError(DataError):
    """The sample is too short, or two samples disagree in length."""


class DegenerateInputError(DataError):
    """An input series is constant or otherwise carries no information."""


class NumericalError(CarbonCvarError):
    """A matrix is numerically singular or an eigenvalue is out of range."""


class ConvergenceError(NumericalError):
    """An iterative optimizer failed to converge."""


class ParameterDomainError(NumericalError):
    """A parameter vector lies outside the admissible domain."""


class FeedbackSingularityError(NumericalError):
    """The simultaneous concentration solve lost its positive denominator."""
