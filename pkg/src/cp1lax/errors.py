"""Exception taxonomy shared across the package.

Exit codes used by the command line driver: 0 pass, 2 configuration error,
3 check failure, 4 numerical error.
"""


class Cp1laxError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigurationError(Cp1laxError):
    """Invalid configuration, inadmissible parameters, or unsupported ids."""

    exit_code = 2


class CheckFailure(Cp1laxError):
    """A verification run produced a value outside its declared tolerance."""

    exit_code = 3


class NumericalError(Cp1laxError):
    """Numerical breakdown: blow-up, non-invertible factor, failed solve."""

    exit_code = 4


class PoleError(NumericalError):
    """Evaluation requested on an excluded locus (pole of the integrand)."""


class IllConditionedEvaluation(NumericalError):
    """Evaluation point too close to the quadrature contour to be trusted."""


class ModelInconsistencyError(CheckFailure):
    """Cross-derivation fit failed; signals a convention bug, not noise."""
