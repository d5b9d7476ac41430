"""Exception hierarchy shared by every module."""


class PacInvError(Exception):
    """Base class for all package errors."""


class SizeLimitExceeded(PacInvError):
    pass


class NotGInvariant(PacInvError):
    pass


class EmptySample(PacInvError):
    pass


class SearchBudgetExceeded(PacInvError):
    """Search stopped early; ``lower_bound`` is a verified lower bound."""

    def __init__(self, message, lower_bound):
        super().__init__(message)
        self.lower_bound = lower_bound


class EmptyClass(PacInvError):
    pass


class FlowInfeasible(PacInvError):
    pass


class NoConsistentVertex(PacInvError):
    pass


class NotRealizable(PacInvError):
    pass


class NumericalFailure(PacInvError):
    pass


class OrbitLabelConflict(PacInvError):
    pass


class InsufficientSamples(PacInvError):
    pass


class WeakLearnerStuck(PacInvError):
    pass


class RoundsCapExceeded(PacInvError):
    pass


class AllSubclassesEmpty(PacInvError):
    pass


class ParamOutOfRange(PacInvError):
    pass
