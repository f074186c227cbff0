"""Exception types raised by the library.

Everything derives from QGuessError so the CLI can map library failures to a
single exit code while callers can still catch specific conditions.
"""


class QGuessError(ValueError):
    """Base class for all validation and runtime errors in this package."""


class InvalidDirectionError(QGuessError):
    """A direction vector is not unit length."""


class InvalidStateError(QGuessError):
    """A ket is not normalized or violates the phase convention."""


class InvalidEnsembleError(QGuessError):
    """Ensemble weights are negative, empty, or do not sum to one."""


class InvalidProbabilityError(QGuessError):
    """A probability parameter lies outside [0, 1]."""


class DegenerateEntanglementError(QGuessError):
    """The shared state is a product state, so no second decomposition basis exists."""


class InvalidFormError(QGuessError):
    """A guessing form is not usable as a probability density."""


class UnfittableHistogramError(QGuessError):
    """The histogram does not constrain a two-parameter fit."""
