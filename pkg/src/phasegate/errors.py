"""Exception hierarchy.

Input problems derive from ``InvalidInputError`` (CLI exit code 2), numerical
breakdowns from ``NumericalError`` (CLI exit code 3).
"""


class PhaseGateError(Exception):
    """Base class for all package errors."""


class InvalidInputError(PhaseGateError, ValueError):
    """A parameter, force sample or config value is not acceptable."""


class GridMismatchError(InvalidInputError):
    """Two paths or a path and a noise stream live on different grids."""


class NumericalError(PhaseGateError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class NoSolutionError(NumericalError):
    """No real amplitude factor reaches the requested phase."""


class DegenerateSeedError(NumericalError):
    """The Gram-Schmidt seed lies (numerically) in the constraint span."""


class ConditioningError(NumericalError):
    """The constraint Gram matrix is too ill-conditioned to trust."""


class TruncationError(NumericalError):
    """The Fock-space truncation cap was reached without converging."""


class StepSizeError(NumericalError):
    """The master-equation step lost trace beyond tolerance."""
