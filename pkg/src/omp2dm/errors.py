"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class Omp2dmError(Exception):
    """Base class; every error raised on purpose by omp2dm derives from it."""

    def __init__(self, message: str, span=None):
        self.message = message
        self.span = span
        super().__init__(self._render())

    def _render(self) -> str:
        if self.span is None:
            return self.message
        return f"{self.span}: {self.message}"


class LexError(Omp2dmError):
    pass


class ParseError(Omp2dmError):
    def __init__(self, span, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(f"expected {expected}, found {found!r}", span)


class UnsupportedConstruct(Omp2dmError):
    def __init__(self, span, construct: str):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", span)


class PragmaError(Omp2dmError):
    pass


class AnalysisError(Omp2dmError):
    pass


class DegenerateLoop(Omp2dmError):
    """The iteration space is empty; the block emits no messages."""


class PlanViolation(Omp2dmError):
    pass


class UnsupportedReductionOp(Omp2dmError):
    pass


class ExecError(Omp2dmError, RuntimeError):
    """Runtime fault while executing a program (bounds, division by zero, ...)."""


class ProtocolError(ExecError):
    pass


class BudgetExceeded(ExecError):
    pass


class SimulationError(Omp2dmError):
    pass


class DeadlockDetected(SimulationError):
    def __init__(self, pending: dict):
        self.pending = pending
        desc = ", ".join(f"rank {r} waiting on {d}" for r, d in sorted(pending.items()))
        super().__init__(f"deadlock: {desc}")


class UnreceivedMessages(SimulationError):
    def __init__(self, leftovers: dict):
        self.leftovers = leftovers
        desc = ", ".join(f"rank {r}: {n} message(s)" for r, n in sorted(leftovers.items()))
        super().__init__(f"unreceived messages at exit: {desc}")
