"""Exception hierarchy shared by all planner stages."""


class StancePlanError(Exception):
    """Base class. ``stage`` is filled in by the pipeline when an error escapes a stage."""

    stage: str | None = None

    def __str__(self) -> str:
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class DegenerateInput(StancePlanError, ValueError):
    pass


class Unreachable(StancePlanError):
    pass


class EmptyRegion(StancePlanError):
    pass


class UncoverableTarget(StancePlanError):
    pass


class Infeasible(StancePlanError):
    pass


class TooLarge(StancePlanError, ValueError):
    pass


class TimeBudgetExceeded(StancePlanError):
    pass


class OutOfRange(StancePlanError, ValueError):
    pass


class NonConvergence(StancePlanError):
    pass


class ParseError(StancePlanError, ValueError):
    pass


class ValidationError(StancePlanError, ValueError):
    def __init__(self, field: str, reason: str, line: int | None = None):
        self.field = field
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{field}: {reason}{where}")


class MultipleComponentsWarning(UserWarning):
    """An alpha shape fell apart into several pieces; only the largest was kept."""
