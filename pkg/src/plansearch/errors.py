"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PlanSearchError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(PlanSearchError):
    pass


class ConsistencyError(PlanSearchError):
    pass


class ParseError(PlanSearchError):
    def __init__(self, line: int, expected: str, text: str = "") -> None:
        self.line = line
        self.expected = expected
        self.text = text
        super().__init__(f"line {line}: expected {expected}" + (f" in {text!r}" if text else ""))


class RuntimeFailure(PlanSearchError):
    """A tool or plan execution failure. ``step`` is filled in by the interpreter."""

    kind = "RuntimeFailure"

    def __init__(self, message: str, step: int | None = None) -> None:
        self.message = message
        self.step = step
        super().__init__(message)

    def __str__(self) -> str:
        if self.step is None:
            return self.message
        return f"step {self.step}: {self.message}"


class NonSingleton(RuntimeFailure):
    kind = "NonSingleton"


class UnknownRelation(RuntimeFailure):
    kind = "UnknownRelation"


class SameObject(RuntimeFailure):
    kind = "SameObject"


class NoRelation(RuntimeFailure):
    kind = "NoRelation"


class NoMatch(RuntimeFailure):
    kind = "NoMatch"


class AmbiguousPart(RuntimeFailure):
    kind = "AmbiguousPart"


class NoSuchPart(RuntimeFailure):
    kind = "NoSuchPart"


class UnsupportedStyle(RuntimeFailure):
    kind = "UnsupportedStyle"


class TypeMismatch(RuntimeFailure):
    kind = "TypeMismatch"


class DescriptorError(RuntimeFailure):
    kind = "DescriptorError"


class UndefinedVariable(RuntimeFailure):
    kind = "UndefinedVariable"


class UnknownFunction(RuntimeFailure):
    kind = "UnknownFunction"


class ArityMismatch(RuntimeFailure):
    kind = "ArityMismatch"


class UnformattableValue(RuntimeFailure):
    kind = "UnformattableValue"


class GenerationError(PlanSearchError):
    pass


class InsufficientExamples(PlanSearchError):
    pass


class TransportError(PlanSearchError):
    pass


class RateLimited(TransportError):
    pass


class ReplayMiss(PlanSearchError):
    pass


class TaxonomyError(SchemaError):
    pass


class GoldPlanMismatch(PlanSearchError):
    pass


class MissingGoldPlan(PlanSearchError):
    pass


class DegenerateInput(PlanSearchError):
    pass
