"""Exception hierarchy shared by every saddleflow module."""


class SaddleFlowError(Exception):
    """Base class for all errors raised by saddleflow."""


class InvalidArgumentError(SaddleFlowError, ValueError):
    """An argument is outside the documented domain of an operation."""


class DegenerateInputError(SaddleFlowError, ValueError):
    """Input is numerically degenerate (e.g. rank deficient)."""


class DomainError(SaddleFlowError, ValueError):
    """A time argument lies before the schedule's initial time."""


class HypothesisViolationError(SaddleFlowError):
    """A parameter condition required by a certificate does not hold."""


class UnsupportedError(SaddleFlowError):
    """The requested combination has no implemented evaluation route."""


class NumericalBlowupError(SaddleFlowError):
    """Integration produced non-finite values or could not make progress.

    Attributes
    ----------
    t : float
        Time at which the failure was detected.
    partial : list
        States produced before the failure. From ``integrate`` this is a
        ``Trajectory`` that also carries the step counts.
    """

    def __init__(self, message, t, partial=None):
        super().__init__(message)
        self.t = t
        self.partial = partial if partial is not None else []


class StepBudgetError(NumericalBlowupError):
    """The integrator exhausted ``max_steps`` before reaching ``t_end``."""
