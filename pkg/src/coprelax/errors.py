"""Shared exception types."""


class CoprelaxError(Exception):
    pass


class DimensionMismatch(CoprelaxError):
    pass


class NumericalFailure(CoprelaxError):
    pass


class DimensionTooLarge(CoprelaxError):
    pass


class NotStrictlyCopositive(CoprelaxError):
    pass


class NotCDT(CoprelaxError):
    pass


class NotApplicable(CoprelaxError):
    pass


class InfeasibleProblem(CoprelaxError):
    pass


class CombinatorialBlowup(CoprelaxError):
    pass
