"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage/parameter problems exit 2,
file format problems exit 3, numeric divergence exits 4, I/O exits 5.
"""


class GnbenchError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(GnbenchError):
    """An argument violates a documented precondition."""


class StructureError(GnbenchError):
    """A graph lacks a structural property an operation requires (e.g. connectivity)."""


class FormatError(GnbenchError):
    """A file failed validation; the message names the file and offending location."""


class SamplingError(GnbenchError):
    """Rejection sampling exhausted its attempt budget."""


class MetricError(GnbenchError):
    """A metric is undefined for the given input (e.g. single-class ROC AUC)."""


class ShapeError(GnbenchError):
    """Operand shapes do not line up."""


class StateError(GnbenchError):
    """An operation was invoked out of order (e.g. backward before forward)."""


class DivergenceError(GnbenchError):
    """Training produced a non-finite loss."""


class SweepError(GnbenchError):
    """A hyperparameter sweep could not produce any usable result."""
