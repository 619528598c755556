"""Exception hierarchy shared by every module."""


class SimAlgError(Exception):
    """Base class for all errors raised by simalg."""


class InputError(SimAlgError, ValueError):
    """Malformed argument: wrong shape, non-finite entry, bad enum value."""


class DomainError(SimAlgError, ValueError):
    """A value lies outside the domain an operation is defined on."""


class ConfigurationError(SimAlgError):
    """A descriptor or run config is missing something the task needs."""


class EvaluationError(SimAlgError):
    """An operation failed (raised, or produced non-finite output) at a specific input.

    The offending input tuple is kept in ``witness``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class EstimationError(SimAlgError):
    """Not enough non-degenerate data to form an estimate."""


class SingularityError(DomainError):
    """A closed-form inverse was requested at a singular point."""


class ConditioningError(SimAlgError):
    """The contraction precondition of the fixed-point inverse does not hold."""


class ConvergenceError(SimAlgError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class CompositionError(SimAlgError):
    """Morphisms whose endpoints do not line up."""


class ClosureError(SimAlgError):
    """An operation left a finite carrier."""


class NotClassicalError(SimAlgError):
    """A structure offered as classical has nonzero axiom defects."""
