"""Exception hierarchy for the kernel.

Every error derives from ``ValueError`` so tool handlers can keep a single
``except ValueError`` clause and report ``{"error": ...}`` to the caller.
"""

from typing import Optional


class KernelError(ValueError):
    """Base class for all kernel failures."""


class SignatureError(KernelError):
    """A symbol is undeclared or declared inconsistently."""


class TheoryError(KernelError):
    """The constant algebra of a theory is ambiguous or non-confluent."""


class ConfigurationError(KernelError):
    """A system lacks a distinguished connective required by an operation."""


class ParseError(KernelError):
    """A document could not be parsed."""

    def __init__(self, message: str, line: int = 1, column: int = 1, source: Optional[str] = None):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class SystemDefinitionError(KernelError):
    """A system document violates a semantic invariant."""

    def __init__(self, invariant: str, message: str):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}")


class MatchError(KernelError):
    """A rule does not match at the requested position."""


class CheckError(KernelError):
    """A derivation node is not a valid inference."""

    def __init__(self, message: str, path: str = "", upper: str = "", lower: str = ""):
        self.path = path
        self.upper = upper
        self.lower = lower
        detail = f" at node {path or '.'}" if path is not None else ""
        formulae = f"\n  upper: {upper}\n  lower: {lower}" if upper or lower else ""
        super().__init__(f"{message}{detail}{formulae}")


class CompositionError(KernelError):
    """Two derivations cannot be composed."""


class SplitError(KernelError):
    """A splitting precondition does not hold."""


class UnsupportedRuleError(KernelError):
    """An up-rule that is not a cut was found where only cuts are handled."""


class NotInterpretable(KernelError):
    """A subatomic formula has no ordinary reading."""

    def __init__(self, message: str, path: str = "."):
        self.path = path
        super().__init__(f"{message} (at {path})")


class TranslationError(KernelError):
    """A derivation step has no image in the target system."""


class GenerationError(KernelError):
    """Random generation gave up after its retry budget."""


class SearchBudgetExceeded(KernelError):
    """Proof search ran out of its step budget."""
