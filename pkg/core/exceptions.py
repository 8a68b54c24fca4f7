"""
猜测与证明引擎的异常层次

Guessers report failure by returning ``None``; everything below is raised for
conditions that make a computation meaningless (zero divisors, singular
equations, malformed input) or for a pipeline stage that cannot continue.
"""

from typing import Optional


class CFracError(Exception):
    """Base class for every error raised by the engine."""


# 代数运算

class AlgebraError(CFracError):
    """Invalid operation in the exact arithmetic kernel."""


class DivisionByZeroError(AlgebraError):
    """Division by an exactly zero element."""


class DegenerateRootSearchError(AlgebraError):
    """Integer-root search on the zero polynomial (every index is a root)."""


# 级数

class SeriesError(CFracError):
    """The equation does not determine a unique power series solution."""


class SingularEquationError(SeriesError):
    """The equation is singular at the expansion point."""


class NoFormalSolutionError(SeriesError):
    """The undetermined-coefficients recursion hits an inconsistent order."""


class BranchingSolutionError(SeriesError):
    """The leading coefficient is not determined linearly; supply it explicitly."""


# 算子

class OperatorError(CFracError):
    """Invalid operation on recurrence operators or sequence definitions."""


class InsufficientInitialConditionsError(OperatorError):
    """A sequence definition lacks a value at a mandatory index."""


class InternalConsistencyError(OperatorError):
    """A containment that must hold by construction failed (arithmetic bug)."""


class ContractionError(CFracError):
    """Subsequence contraction degenerates for every index."""


class RecurrenceSearchError(CFracError):
    """No linear dependency among H values below the order cap."""


# 输入

class ProblemSpecError(CFracError):
    """Semantic error in a problem description."""


class EquationSyntaxError(ProblemSpecError):
    """Syntax error in an equation, carrying the offending position."""

    def __init__(self, message: str, source: str = "", position: Optional[int] = None):
        self.message = message
        self.source = source
        self.position = position
        super().__init__(self.render())

    def render(self) -> str:
        """Message followed by the source line and a caret under the position."""
        if self.position is None or not self.source:
            return self.message
        caret = " " * self.position + "^"
        return f"{self.message} at position {self.position}:\n  {self.source}\n  {caret}"


# 流水线

class StageFailure(CFracError):
    """A pipeline stage could not produce its artifact."""

    def __init__(self, stage: str, reason: str):
        self.stage = stage
        self.reason = reason
        super().__init__(f"stage '{stage}' failed: {reason}")


class CertificateError(CFracError):
    """A certificate document is malformed or fails a recheck step."""

    def __init__(self, message: str, step: Optional[str] = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")
